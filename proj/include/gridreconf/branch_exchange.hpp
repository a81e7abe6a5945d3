#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gridreconf/case_model.hpp"
#include "gridreconf/objective.hpp"
#include "gridreconf/powerflow.hpp"
#include "gridreconf/surrogate.hpp"
#include "gridreconf/topology.hpp"

namespace gridreconf {

enum class RejectReason { WorseObjective, Infeasible, PowerFlowDiverged };

std::string to_string(RejectReason reason);

/// One exchange relative to the incumbent: close `close_branch`, open `open_branch`.
struct Move {
    int close_branch = 0;
    int open_branch = 0;
    double fo_before = 0.0;
    double fo_after = 0.0;  // NaN when the candidate produced no objective
    bool accepted = false;
    std::optional<RejectReason> rejected_reason;
};

/// A configuration whose power flow was actually computed.
struct EvaluationRecord {
    std::vector<int> open_branches;
    bool converged = false;
    bool feasible = false;
    double fo_value = 0.0;
    double total_loss_mw = 0.0;
};

struct SearchTrace {
    std::vector<Move> moves;
    std::size_t evaluations = 0;     // full power-flow evaluations (cache misses)
    std::size_t surrogate_hits = 0;  // candidates whose visiting order the surrogate changed
    std::size_t pruned = 0;          // candidates skipped in Prune mode
    int passes = 0;
    bool local_optimum = false;      // stopped because no 1-exchange neighbour improves
    std::vector<EvaluationRecord> evaluated;

    std::size_t accepted_moves() const;
};

enum class SurrogateMode { RankOnly, Prune };

struct SearchOptions {
    int max_passes = 20;
    bool use_surrogate = true;
    SurrogateMode surrogate_mode = SurrogateMode::RankOnly;
    // Prune mode skips candidates predicted worse than the incumbent by more than this (MWh).
    double prune_threshold = 0.0;
    SolverOptions solver;
};

/// Throws std::invalid_argument when max_passes < 1.
void check_options(const SearchOptions& options);

struct CandidateEvaluation {
    std::optional<RejectReason> rejection;
    std::string detail;
    std::optional<ObjectiveReport> report;
    std::optional<PowerFlowSolution> solution;

    bool ok() const noexcept { return !rejection.has_value(); }
};

/// Radiality, power flow and objective for one configuration. Problems come
/// back as a rejection, never as an exception.
CandidateEvaluation evaluate_candidate(const NetworkCase& net, const Configuration& config,
                                       const SolverOptions& options = {});

struct SearchResult {
    Configuration config;
    SearchTrace trace;
    ObjectiveReport objective;
    PowerFlowSolution solution;
    double initial_fo = 0.0;
    LinearModel model;
};

/// Branch-exchange local search from `initial` down to a 1-exchange local optimum.
/// `prior` seeds the surrogate before any online samples exist.
/// Throws InitialInfeasible.
SearchResult improve(const NetworkCase& net, const ForestBuildResult& initial, const SearchOptions& options = {},
                     const LinearModel* prior = nullptr);

struct PipelineResult {
    PowerFlowSolution all_closed;  // meshed flow that supplies the forest weights
    ForestBuildResult forest;
    SearchResult search;
};

/// All-closed power flow, greedy forest on its flow magnitudes, then `improve`.
/// Throws NotConverged when the meshed flow fails, InitialInfeasible when the
/// forest is rejected.
PipelineResult reconfigure(const NetworkCase& net, const SearchOptions& options = {},
                           const LinearModel* prior = nullptr);

}  // namespace gridreconf
