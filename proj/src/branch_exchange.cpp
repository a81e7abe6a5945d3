#include "gridreconf/branch_exchange.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridreconf {

std::string to_string(RejectReason reason) {
    switch (reason) {
        case RejectReason::WorseObjective: return "WorseObjective";
        case RejectReason::Infeasible: return "Infeasible";
        case RejectReason::PowerFlowDiverged: return "PowerFlowDiverged";
    }
    return "Infeasible";
}

std::size_t SearchTrace::accepted_moves() const {
    return static_cast<std::size_t>(
        std::count_if(moves.begin(), moves.end(), [](const Move& m) { return m.accepted; }));
}

void check_options(const SearchOptions& options) {
    if (options.max_passes < 1) throw std::invalid_argument("max_passes must be at least 1");
    check_options(options.solver);
}

CandidateEvaluation evaluate_candidate(const NetworkCase& net, const Configuration& config,
                                       const SolverOptions& options) {
    CandidateEvaluation out;
    if (!config.covers(net) || !is_radial(net, config)) {
        out.rejection = RejectReason::Infeasible;
        out.detail = "radiality: closed branches do not form one tree per feeder";
        return out;
    }
    try {
        out.solution = solve_all_islands(net, config, options);
    } catch (const SingularJacobian& e) {
        out.rejection = RejectReason::PowerFlowDiverged;
        out.detail = e.what();
        return out;
    }
    if (!out.solution->converged) {
        out.rejection = RejectReason::PowerFlowDiverged;
        for (const auto& s : out.solution->islands)
            if (!s.converged) out.detail = "power flow diverged in island of feeder " + std::to_string(s.root);
        return out;
    }
    out.report = evaluate_fo(net, config, *out.solution);
    if (!out.report->feasible) {
        out.rejection = RejectReason::Infeasible;
        for (const auto& c : out.report->constraints)
            if (!c.passed) out.detail += c.name + ": " + c.detail;
    }
    return out;
}

namespace {

class Search {
public:
    Search(const NetworkCase& net, const SearchOptions& options, const LinearModel* prior)
        : net_(net), options_(options), names_(feature_names(net)) {
        if (options_.use_surrogate && prior) model_ = *prior;
    }

    SearchResult run(const ForestBuildResult& initial) {
        incumbent_ = initial.config;
        const CandidateEvaluation& start = evaluate(incumbent_);
        if (!start.ok()) throw InitialInfeasible("initial configuration rejected: " + start.detail);
        incumbent_fo_ = start.report->fo_value;
        const double initial_fo = incumbent_fo_;

        for (int pass = 1; pass <= options_.max_passes; ++pass) {
            trace_.passes = pass;
            bool improved = false;
            for (int s : pass_order()) {
                if (incumbent_.is_closed(s)) continue;
                improved = walk_loop(s) || improved;
            }
            if (!improved && !scan_neighbourhood()) {
                trace_.local_optimum = true;
                break;
            }
        }

        SearchResult result;
        const CandidateEvaluation& last = evaluate(incumbent_);
        result.config = incumbent_;
        result.objective = *last.report;
        result.solution = *last.solution;
        result.initial_fo = initial_fo;
        refit();
        result.model = model_;
        result.trace = std::move(trace_);
        return result;
    }

private:
    const CandidateEvaluation& evaluate(const Configuration& config) {
        auto it = cache_.find(config);
        if (it != cache_.end()) return it->second;
        CandidateEvaluation e = evaluate_candidate(net_, config, options_.solver);
        ++trace_.evaluations;

        EvaluationRecord record;
        record.open_branches = config.open_branches();
        record.converged = e.solution && e.solution->converged;
        record.feasible = e.ok();
        record.fo_value = e.report ? e.report->fo_value : std::numeric_limits<double>::quiet_NaN();
        record.total_loss_mw = e.solution ? e.solution->total_loss_mw : std::numeric_limits<double>::quiet_NaN();
        trace_.evaluated.push_back(std::move(record));

        if (e.report) samples_.push_back({featurize(net_, config), e.report->fo_value});
        return cache_.emplace(config, std::move(e)).first->second;
    }

    void refit() {
        if (!options_.use_surrogate) return;
        LinearModel fresh = fit(samples_, names_);
        if (fresh.trained() || !model_.trained()) model_ = std::move(fresh);
    }

    bool surrogate_active() const { return options_.use_surrogate && model_.trained(); }

    double predict(const Configuration& config) const { return model_.predict(featurize(net_, config)); }

    Configuration exchanged(int close_branch, int open_branch) const {
        Configuration c = incumbent_;
        c.set(close_branch, SwitchState::Closed);
        c.set(open_branch, SwitchState::Open);
        return c;
    }

    // Direction walks over the switchable loop branches: from-bus side first, then the reverse.
    std::pair<std::vector<int>, std::vector<int>> directions(int open_branch) const {
        std::vector<int> forward;
        for (int id : fundamental_loop(net_, incumbent_, open_branch).path)
            if (net_.branch(id).switchable) forward.push_back(id);
        return {forward, std::vector<int>(forward.rbegin(), forward.rend())};
    }

    std::vector<int> pass_order() {
        std::vector<int> order;
        for (int id : incumbent_.open_branches())
            if (net_.branch(id).switchable) order.push_back(id);
        refit();
        if (!surrogate_active()) return order;

        std::vector<double> score;
        for (int s : order) {
            auto [forward, backward] = directions(s);
            double best = std::numeric_limits<double>::infinity();
            for (const auto* dir : {&forward, &backward})
                if (!dir->empty()) best = std::min(best, predict(exchanged(s, dir->front())));
            score.push_back(best);
        }
        std::vector<std::size_t> idx(order.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
        std::vector<int> ranked;
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] != i) ++trace_.surrogate_hits;
            ranked.push_back(order[idx[i]]);
        }
        return ranked;
    }

    bool pruned(const Configuration& candidate) {
        if (!surrogate_active() || options_.surrogate_mode != SurrogateMode::Prune) return false;
        if (cache_.contains(candidate)) return false;
        if (predict(candidate) > incumbent_fo_ + options_.prune_threshold) {
            ++trace_.pruned;
            return true;
        }
        return false;
    }

    bool try_move(int close_branch, int open_branch) {
        const Configuration candidate = exchanged(close_branch, open_branch);
        if (pruned(candidate)) return false;
        const CandidateEvaluation& e = evaluate(candidate);

        Move move;
        move.close_branch = close_branch;
        move.open_branch = open_branch;
        move.fo_before = incumbent_fo_;
        move.fo_after = e.report ? e.report->fo_value : std::numeric_limits<double>::quiet_NaN();
        if (!e.ok()) {
            move.rejected_reason = e.rejection;
        } else if (e.report->fo_value < incumbent_fo_) {
            move.accepted = true;
            incumbent_ = candidate;
            incumbent_fo_ = e.report->fo_value;
        } else {
            move.rejected_reason = RejectReason::WorseObjective;
        }
        trace_.moves.push_back(move);
        return move.accepted;
    }

    // Close `start`, then push the open point along one direction of the loop while
    // every step improves.
    bool walk(int start, const std::vector<int>& direction) {
        int open_point = start;
        bool any = false;
        for (int next : direction) {
            if (!try_move(open_point, next)) break;
            open_point = next;
            any = true;
        }
        return any;
    }

    bool walk_loop(int s) {
        auto [forward, backward] = directions(s);
        if (forward.empty()) return false;
        if (surrogate_active() && predict(exchanged(s, backward.front())) < predict(exchanged(s, forward.front()))) {
            std::swap(forward, backward);
            ++trace_.surrogate_hits;
        }
        if (walk(s, forward)) return true;
        return walk(s, backward);
    }

    // Every (close s, open t in loop(s)) neighbour; applies the best improving one.
    bool scan_neighbourhood() {
        std::vector<std::pair<int, int>> neighbours;
        std::vector<Configuration> configs;
        for (int s : incumbent_.open_branches()) {
            if (!net_.branch(s).switchable) continue;
            for (int t : adjacent_switches(net_, incumbent_, s)) {
                neighbours.emplace_back(s, t);
                configs.push_back(exchanged(s, t));
            }
        }
        std::optional<std::size_t> best;
        for (std::size_t i = 0; i < configs.size(); ++i) {
            if (pruned(configs[i])) continue;
            const CandidateEvaluation& e = evaluate(configs[i]);
            if (!e.ok() || !(e.report->fo_value < incumbent_fo_)) continue;
            if (!best || compare(*e.report, configs[i], *cache_.at(configs[*best]).report, configs[*best],
                                 incumbent_) < 0)
                best = i;
        }
        if (!best) return false;
        return try_move(neighbours[*best].first, neighbours[*best].second);
    }

    const NetworkCase& net_;
    SearchOptions options_;
    std::vector<std::string> names_;
    LinearModel model_;
    std::vector<Sample> samples_;
    std::map<Configuration, CandidateEvaluation> cache_;
    Configuration incumbent_;
    double incumbent_fo_ = 0.0;
    SearchTrace trace_;
};

}  // namespace

SearchResult improve(const NetworkCase& net, const ForestBuildResult& initial, const SearchOptions& options,
                     const LinearModel* prior) {
    check_options(options);
    return Search(net, options, prior).run(initial);
}

PipelineResult reconfigure(const NetworkCase& net, const SearchOptions& options, const LinearModel* prior) {
    check_options(options);
    PipelineResult out;
    out.all_closed = solve_network(net, Configuration::all_closed(net), options.solver);
    out.forest = build_spanning_forest(net, weights_from_flow(net, out.all_closed));
    out.search = improve(net, out.forest, options, prior);
    return out;
}

}  // namespace gridreconf
