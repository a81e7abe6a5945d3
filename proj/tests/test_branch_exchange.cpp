#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace gridreconf;
using Catch::Matchers::WithinAbs;

namespace {

ForestBuildResult start_at(const Configuration& config) {
    ForestBuildResult f;
    f.config = config;
    f.open_list = config.open_branches();
    return f;
}

ForestBuildResult greedy_forest(const NetworkCase& net) {
    return build_spanning_forest(net, weights_from_flow(net, solve_network(net, Configuration::all_closed(net))));
}

SearchOptions plain() {
    SearchOptions o;
    o.use_surrogate = false;
    return o;
}

// Accepted moves replayed from the start strictly lower the objective and stay radial.
void check_trace(const NetworkCase& net, const Configuration& initial, const SearchResult& result) {
    Configuration c = initial;
    double last = result.initial_fo;
    std::size_t accepted = 0;
    for (const auto& m : result.trace.moves) {
        CHECK(m.close_branch != m.open_branch);
        CHECK(m.accepted != m.rejected_reason.has_value());
        if (!m.accepted) continue;
        ++accepted;
        CHECK(m.fo_after < m.fo_before);
        CHECK(m.fo_before == last);
        last = m.fo_after;
        c.set(m.close_branch, SwitchState::Closed);
        c.set(m.open_branch, SwitchState::Open);
        CHECK(is_radial(net, c));
    }
    CHECK(c == result.config);
    CHECK(accepted == result.trace.accepted_moves());
    CHECK(result.trace.evaluations >= accepted);
    CHECK(result.objective.fo_value <= result.initial_fo);
    CHECK(result.objective.feasible);
}

// No radial single exchange of the result, found without the topology module, is feasible and better.
void check_local_optimum(const NetworkCase& net, const SearchResult& result) {
    for (const auto& n : support::exchange_neighbours(net, result.config)) {
        const auto e = evaluate_candidate(net, n);
        if (!e.ok()) continue;
        CHECK(e.report->fo_value >= result.objective.fo_value - 1e-12);
    }
    CHECK(result.trace.local_optimum);
}

}  // namespace

TEST_CASE("candidate evaluation outcomes") {
    const auto net = support::ieee14();
    const auto forest = greedy_forest(net);
    const auto ok = evaluate_candidate(net, forest.config);
    REQUIRE(ok.ok());
    CHECK(ok.report->feasible);
    CHECK(ok.report->fo_value > 0.0);

    Configuration extra = forest.config;
    extra.set(forest.open_list.front(), SwitchState::Closed);
    const auto loop = evaluate_candidate(net, extra);
    CHECK(loop.rejection == RejectReason::Infeasible);
    CHECK(loop.detail.find("radiality") != std::string::npos);

    // bus 8 hangs off 7-8 alone
    Configuration isolated = forest.config;
    isolated.set(14, SwitchState::Open);
    const auto cut = evaluate_candidate(net, isolated);
    CHECK(cut.rejection == RejectReason::Infeasible);
    CHECK_FALSE(cut.solution.has_value());
}

TEST_CASE("diverged power flow is a rejection") {
    const auto base = support::load("toy_feeder.json");
    std::vector<Bus> buses = base.buses();
    buses[2].p_load = 5000.0;  // far beyond the nose of the curve
    NetworkCase heavy(base.base_mva(), buses, base.branches(), base.roots());
    const auto e = evaluate_candidate(heavy, Configuration::defaults(heavy));
    CHECK(e.rejection == RejectReason::PowerFlowDiverged);
}

TEST_CASE("infeasible candidate keeps its report") {
    const auto base = support::load("toy_feeder.json");
    std::vector<Bus> buses = base.buses();
    buses[2].v_min = 0.99;
    NetworkCase strict(base.base_mva(), buses, base.branches(), base.roots());
    const auto e = evaluate_candidate(strict, Configuration::defaults(strict));
    CHECK(e.rejection == RejectReason::Infeasible);
    REQUIRE(e.report);
    CHECK_FALSE(e.report->feasible);
}

TEST_CASE("toy feeder reaches the enumerated optimum") {
    const auto net = support::load("toy_feeder.json");
    const auto initial = Configuration::defaults(net);  // B served through A
    REQUIRE(initial.open_branches() == std::vector<int>{2});
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : support::radial_configs(net)) best = std::min(best, evaluate_candidate(net, c).report->fo_value);

    for (bool surrogate : {false, true}) {
        SearchOptions o;
        o.use_surrogate = surrogate;
        const auto result = improve(net, start_at(initial), o);
        CHECK_THAT(result.objective.fo_value, WithinAbs(best, 1e-12));
        CHECK(result.config.is_closed(2));
        CHECK(result.trace.accepted_moves() >= 1);
        check_trace(net, initial, result);
        check_local_optimum(net, result);
    }
}

TEST_CASE("a local optimum is a fixed point") {
    const auto net = support::load("toy_feeder.json");
    const auto first = improve(net, start_at(Configuration::defaults(net)), plain());
    const auto again = improve(net, start_at(first.config), plain());
    CHECK(again.trace.accepted_moves() == 0);
    CHECK(again.config == first.config);
    CHECK(again.objective.fo_value == first.objective.fo_value);
    CHECK(again.trace.passes == 1);
}

TEST_CASE("two-feeder fixture: every radial start ends in a local optimum") {
    const auto net = support::load("two_feeder6.json");
    int starts = 0;
    for (const auto& c : support::radial_configs(net)) {
        if (!evaluate_candidate(net, c).ok()) continue;
        ++starts;
        const auto result = improve(net, start_at(c), plain());
        check_trace(net, c, result);
        check_local_optimum(net, result);
        CHECK(result.trace.passes <= SearchOptions{}.max_passes);
    }
    CHECK(starts > 5);
}

TEST_CASE("IEEE-14 from the greedy forest") {
    const auto net = support::ieee14();
    const auto forest = greedy_forest(net);
    const auto plain_result = improve(net, forest, plain());
    check_trace(net, forest.config, plain_result);
    check_local_optimum(net, plain_result);
    CHECK(plain_result.solution.total_loss_mw < 13.436);

    const auto ranked = improve(net, forest);
    check_trace(net, forest.config, ranked);
    CHECK(ranked.objective.fo_value == plain_result.objective.fo_value);
    CHECK(ranked.trace.evaluations <= plain_result.trace.evaluations);
    CHECK(ranked.model.r_squared >= 0.0);
    CHECK(ranked.model.r_squared <= 1.0);
}

TEST_CASE("surrogate ranking does not change the reached objective") {
    for (const char* name : {"toy_feeder.json", "two_feeder6.json"}) {
        INFO(name);
        const auto net = support::load(name);
        const auto forest = greedy_forest(net);
        const auto a = improve(net, forest, plain());
        const auto b = improve(net, forest);
        CHECK(a.objective.fo_value == b.objective.fo_value);
        CHECK(b.trace.evaluations <= a.trace.evaluations);
    }
}

TEST_CASE("prune mode stays monotone and counts what it skipped") {
    const auto net = support::ieee14();
    const auto forest = greedy_forest(net);
    SearchOptions o;
    o.surrogate_mode = SurrogateMode::Prune;
    o.prune_threshold = 0.0;
    const auto result = improve(net, forest, o);
    check_trace(net, forest.config, result);
    CHECK(result.trace.evaluations + result.trace.pruned > 0);
}

TEST_CASE("a prior model seeds the ranking") {
    const auto net = support::ieee14();
    const auto forest = greedy_forest(net);
    const auto first = improve(net, forest);
    REQUIRE(first.model.trained());
    const auto seeded = improve(net, forest, SearchOptions{}, &first.model);
    CHECK(seeded.objective.fo_value == first.objective.fo_value);
}

TEST_CASE("search option and start checks") {
    const auto net = support::load("toy_feeder.json");
    SearchOptions o;
    o.max_passes = 0;
    CHECK_THROWS_AS(improve(net, start_at(Configuration::defaults(net)), o), std::invalid_argument);
    CHECK_THROWS_AS(improve(net, start_at(Configuration::all_closed(net))), InitialInfeasible);

    o.max_passes = 1;
    const auto result = improve(net, start_at(Configuration::defaults(net)), o);
    CHECK(result.trace.passes == 1);
}

TEST_CASE("pipeline on IEEE-14") {
    const auto net = support::ieee14();
    const auto result = reconfigure(net);
    CHECK(result.all_closed.converged);
    CHECK(is_radial(net, result.forest.config));
    CHECK(is_radial(net, result.search.config));
    CHECK(result.search.objective.feasible);
    CHECK(result.search.solution.total_loss_mw < 13.436);
    CHECK(result.search.config.closed_branches().size() == 12);
}

TEST_CASE("reject reason names") {
    CHECK(to_string(RejectReason::WorseObjective) == "WorseObjective");
    CHECK(to_string(RejectReason::Infeasible) == "Infeasible");
    CHECK(to_string(RejectReason::PowerFlowDiverged) == "PowerFlowDiverged");
}
