#pragma once

// Shared setup for the island solvers. Private to the library.

#include <functional>
#include <limits>
#include <vector>

#include "gridreconf/powerflow.hpp"

namespace gridreconf::detail {

struct IslandProblem {
    AdmittanceMatrix admittance;
    BusRoles roles;
    Eigen::VectorXcd s_spec;  // per-unit scheduled injection
    Eigen::VectorXcd v;       // current iterate
    Eigen::VectorXd q_load;   // per-unit, to recover unit output from injections
    Eigen::VectorXd q_gen_min;
    Eigen::VectorXd q_gen_max;
    std::vector<int> limited_buses;
};

IslandProblem make_problem(const NetworkCase& net, const Island& island, const SolverOptions& options);

struct InnerResult {
    bool converged = false;
    int iterations = 0;
    double max_mismatch = std::numeric_limits<double>::infinity();
};

/// One inner solve over fixed bus roles, updating problem.v in place.
using InnerSolver = std::function<InnerResult(IslandProblem&, double tolerance, int max_iterations)>;

/// Runs the inner solver, then moves PV buses that violate their reactive limits to
/// PQ at the violated limit and re-solves until no violation remains.
PowerFlowSolution solve_with_limits(const NetworkCase& net, const Island& island,
                                    const SolverOptions& options, const InnerSolver& inner);

InnerResult newton_inner(IslandProblem& problem, double tolerance, int max_iterations);
InnerResult gauss_seidel_inner(IslandProblem& problem, double tolerance, int max_iterations);

/// Flows over the given branches with sending ends resolved from `root`.
std::map<int, BranchFlow> component_flows(const NetworkCase& net, int root, const std::set<int>& buses,
                                          const std::set<int>& branch_ids,
                                          const std::map<int, Complex>& voltages);

}  // namespace gridreconf::detail
