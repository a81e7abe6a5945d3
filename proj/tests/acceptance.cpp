// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <functional>
#include <iostream>
#include <queue>

#include "support.hpp"

using namespace gridreconf;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = true;
    std::ostringstream notes;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes << " [failed: " << what << "]";
        }
    }
};

ForestBuildResult greedy_forest(const NetworkCase& net) {
    return build_spanning_forest(net, weights_from_flow(net, solve_network(net, Configuration::all_closed(net))));
}

Verdict ac1_base_loss() {
    Verdict v;
    const auto t0 = Clock::now();
    const auto net = support::ieee14();
    const auto sol = solve_network(net, Configuration::all_closed(net));
    const double elapsed = seconds_since(t0);
    v.require(sol.converged, "converged");
    v.require(sol.iterations <= 10, "iterations <= 10");
    v.require(std::abs(sol.total_loss_mw - 13.436) <= 0.01 * 13.436, "loss within 1% of 13.436 MW");
    v.require(elapsed < 1.0, "runtime < 1 s");
    v.notes << " loss=" << sol.total_loss_mw << " MW iterations=" << sol.iterations << " time=" << elapsed << "s";
    return v;
}

Verdict ac2_reconfiguration() {
    Verdict v;
    const auto t0 = Clock::now();
    const auto net = support::ieee14();
    PipelineResult r;
    try {
        r = reconfigure(net);
    } catch (const Error& e) {
        v.require(false, std::string("pipeline threw: ") + e.what());
        return v;
    }
    const auto& s = r.search;
    v.require(is_radial(net, s.config) && support::radial_oracle(net, s.config), "final config radial");
    v.require(s.objective.feasible, "final config feasible");
    v.require(s.solution.total_loss_mw < 13.436, "final loss < 13.436 MW");
    v.require(s.objective.fo_value <= s.initial_fo, "final FO <= initial forest FO");

    double last = s.initial_fo;
    bool monotone = true;
    for (const auto& m : s.trace.moves) {
        if (!m.accepted) continue;
        monotone = monotone && m.fo_after < m.fo_before && m.fo_before == last;
        last = m.fo_after;
    }
    v.require(monotone, "accepted-move trace strictly decreasing");

    const auto neighbours = support::exchange_neighbours(net, s.config);
    bool local = true;
    for (const auto& n : neighbours) {
        const auto e = evaluate_candidate(net, n);
        if (e.ok() && e.report->fo_value < s.objective.fo_value) local = false;
    }
    v.require(local, "no feasible 1-exchange neighbour improves");
    v.require(neighbours.size() <= 500, "neighbourhood is a few hundred configurations");
    const double elapsed = seconds_since(t0);
    v.require(elapsed < 30.0, "runtime < 30 s");
    v.notes << " initial_fo=" << s.initial_fo << " final_fo=" << s.objective.fo_value
            << " final_loss=" << s.solution.total_loss_mw << " MW neighbours=" << neighbours.size()
            << " time=" << elapsed << "s";
    return v;
}

// Independent feasibility: voltage band, branch rating and feeder capacity read off the solution.
bool feasible_oracle(const NetworkCase& net, const PowerFlowSolution& sol) {
    for (const auto& [id, b] : sol.buses)
        if (b.v_mag < net.bus(id).v_min || b.v_mag > net.bus(id).v_max) return false;
    for (const auto& [id, f] : sol.branches) {
        const auto& limit = net.branch(id).mva_limit;
        if (limit && std::max(std::hypot(f.p_send, f.q_send), std::hypot(f.p_recv, f.q_recv)) > *limit) return false;
    }
    for (int root : net.roots()) {
        const Bus& bus = net.bus(root);
        const double p = sol.buses.at(root).p_injection + bus.p_load;
        const double q = sol.buses.at(root).q_injection + bus.q_load;
        if ((bus.p_max && p > *bus.p_max) || (bus.q_max && q > *bus.q_max) || (bus.q_min && q < *bus.q_min))
            return false;
    }
    return true;
}

Verdict ac3_oracle_equivalence() {
    Verdict v;
    const auto t0 = Clock::now();
    for (const char* name : {"toy_feeder.json", "two_feeder6.json"}) {
        const auto net = support::load(name);

        // radiality and constraint checks against brute force on every state vector
        std::map<Configuration, double> feasible_fo;
        for (const auto& c : support::all_configs(net)) {
            const bool radial = support::radial_oracle(net, c);
            v.require(is_radial(net, c) == radial, std::string(name) + " is_radial matches oracle");
            const auto e = evaluate_candidate(net, c);
            if (!radial) {
                v.require(e.rejection == RejectReason::Infeasible, std::string(name) + " non-radial rejected");
                continue;
            }
            if (!e.solution || !e.solution->converged) continue;
            v.require(e.ok() == feasible_oracle(net, *e.solution), std::string(name) + " feasibility matches oracle");
            if (e.ok()) feasible_fo[c] = e.report->fo_value;
        }

        double global = std::numeric_limits<double>::infinity();
        for (const auto& [c, fo] : feasible_fo) global = std::min(global, fo);

        // every configuration reachable from the forest by strictly improving feasible exchanges
        const auto forest = greedy_forest(net);
        auto improving = [&](const Configuration& c) {
            std::vector<Configuration> out;
            for (const auto& n : support::exchange_neighbours(net, c)) {
                auto it = feasible_fo.find(n);
                if (it != feasible_fo.end() && it->second < feasible_fo.at(c)) out.push_back(n);
            }
            return out;
        };
        double best_reachable = std::numeric_limits<double>::infinity();
        std::set<Configuration> seen{forest.config};
        std::queue<Configuration> queue;
        queue.push(forest.config);
        v.require(feasible_fo.contains(forest.config), std::string(name) + " forest feasible");
        while (!queue.empty() && feasible_fo.contains(forest.config)) {
            const Configuration c = queue.front();
            queue.pop();
            const auto next = improving(c);
            if (next.empty()) best_reachable = std::min(best_reachable, feasible_fo.at(c));
            for (const auto& n : next)
                if (seen.insert(n).second) queue.push(n);
        }

        const auto result = improve(net, forest);
        v.require(result.objective.fo_value == best_reachable,
                  std::string(name) + " search matches best reachable local optimum");
        v.notes << " " << name << ": radial=" << support::radial_configs(net).size() << " global=" << global
                << " best_reachable=" << best_reachable << " search=" << result.objective.fo_value << ";";
    }
    const double elapsed = seconds_since(t0);
    v.require(elapsed < 10.0, "runtime < 10 s");
    v.notes << " time=" << elapsed << "s";
    return v;
}

Verdict ac4_solver_cross_validation() {
    Verdict v;
    SolverOptions gs;
    gs.method = SolverMethod::GaussSeidel;
    gs.tolerance = 1e-10;
    gs.max_iterations = 200000;

    const auto ieee = support::ieee14();
    std::vector<std::pair<std::string, std::pair<NetworkCase, Configuration>>> fixtures;
    fixtures.push_back({"ieee14 all closed", {ieee, Configuration::all_closed(ieee)}});
    fixtures.push_back({"ieee14 radial", {ieee, Configuration::with_open(ieee, {1, 5, 6, 7, 9, 16, 19, 20})}});
    for (const char* name : {"toy_feeder.json", "two_feeder6.json"}) {
        const auto net = support::load(name);
        fixtures.push_back({name, {net, Configuration::defaults(net)}});
    }
    NetworkCase two_bus(100.0, {support::feeder(1), support::load_bus(2, 50, 20)}, {support::line(1, 1, 2, 0.01, 0.05)},
                        {1});
    fixtures.push_back({"two bus", {two_bus, Configuration::all_closed(two_bus)}});

    int compared = 0;
    double worst = 0.0;
    for (const auto& [label, fixture] : fixtures) {
        const auto& [net, config] = fixture;
        const auto a = solve_network(net, config);
        const auto b = solve_network(net, config, gs);
        if (!a.converged || !b.converged) continue;
        ++compared;
        for (const auto& [id, _] : a.buses) worst = std::max(worst, std::abs(a.voltage(id) - b.voltage(id)));
    }
    v.require(compared == static_cast<int>(fixtures.size()), "both solvers converge on every fixture");
    v.require(worst <= 1e-6, "NR and GS voltages within 1e-6 pu");

    std::mt19937 rng(2024);
    double worst_jacobian = 0.0;
    for (int trial = 0; trial < 20; ++trial)
        worst_jacobian = std::max(worst_jacobian, support::jacobian_fd_gap(rng, trial % 2 == 0));
    v.require(worst_jacobian <= 1e-5, "Jacobian within 1e-5 relative of finite differences");
    v.notes << " fixtures=" << compared << " max_voltage_gap=" << worst << " max_jacobian_gap=" << worst_jacobian;
    return v;
}

Verdict ac5_objective_consistency() {
    Verdict v;
    const auto net = support::ieee14();
    const auto result = reconfigure(net);
    std::size_t checked = 0;
    double worst = 0.0;
    for (const auto& rec : result.search.trace.evaluated) {
        if (!rec.converged || !std::isfinite(rec.fo_value)) continue;
        ++checked;
        const double rel = std::abs(rec.fo_value / net.delta_t_hours() - rec.total_loss_mw) / rec.total_loss_mw;
        worst = std::max(worst, rel);
    }
    v.require(checked > 0, "search sampled converged configurations");
    v.require(worst <= 0.02, "FO/dt within 2% of power-flow loss");
    v.notes << " sampled=" << checked << " worst_relative_gap=" << worst;
    return v;
}

Verdict ac6_surrogate() {
    Verdict v;
    std::vector<std::pair<std::string, NetworkCase>> fixtures{{"ieee14", support::ieee14()}};
    for (const char* name : {"toy_feeder.json", "two_feeder6.json"}) fixtures.push_back({name, support::load(name)});
    for (const auto& [label, net] : fixtures) {
        SearchOptions off;
        off.use_surrogate = false;
        const auto a = reconfigure(net, off);
        const auto b = reconfigure(net);
        v.require(a.search.objective.fo_value == b.search.objective.fo_value, label + " identical final FO");
        v.require(b.search.trace.evaluations <= a.search.trace.evaluations, label + " evaluations with <= without");
        v.notes << " " << label << ": fo=" << b.search.objective.fo_value << " evals " << b.search.trace.evaluations
                << " vs " << a.search.trace.evaluations << " hits=" << b.search.trace.surrogate_hits << ";";
    }
    return v;
}

Verdict ac7_round_trip() {
    Verdict v;
    const auto ieee = support::ieee14();
    v.require(ieee.buses().size() == 14, "14 buses");
    v.require(ieee.branches().size() == 20, "20 branches");
    v.require(ieee.base_mva() == 100.0, "base 100 MVA");
    std::vector<std::pair<std::string, NetworkCase>> fixtures{{"ieee14", ieee}};
    for (const char* name : {"toy_feeder.json", "two_feeder6.json"}) fixtures.push_back({name, support::load(name)});
    for (const auto& [label, net] : fixtures) {
        const auto text = write_native(net);
        const auto back = parse_case(text, CaseFormat::NativeJson);
        v.require(back == net, label + " parse(write(case)) == case");
        v.require(write_native(back) == text, label + " write is stable");
    }
    v.notes << " fixtures=" << fixtures.size();
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
        {"AC1 IEEE-14 base-case loss", ac1_base_loss},
        {"AC2 reconfiguration improves loss", ac2_reconfiguration},
        {"AC3 oracle equivalence on small instances", ac3_oracle_equivalence},
        {"AC4 solver cross-validation", ac4_solver_cross_validation},
        {"AC5 objective/loss consistency", ac5_objective_consistency},
        {"AC6 surrogate neutrality and economy", ac6_surrogate},
        {"AC7 format round trip", ac7_round_trip},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Verdict v;
        try {
            v = check();
        } catch (const std::exception& e) {
            v.require(false, std::string("threw: ") + e.what());
        }
        if (!v.pass) ++failures;
        std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << name << " --" << v.notes.str() << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
