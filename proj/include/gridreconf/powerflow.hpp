#pragma once

#include <complex>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "gridreconf/case_model.hpp"

namespace gridreconf {

using Complex = std::complex<double>;

enum class SolverMethod { NewtonRaphson, GaussSeidel };

struct SolverOptions {
    SolverMethod method = SolverMethod::NewtonRaphson;
    double tolerance = 1e-8;  // per-unit power mismatch
    // Unset means 30 for Newton-Raphson and 5000 for Gauss-Seidel.
    std::optional<int> max_iterations;
    bool flat_start = true;
    // Starting phasors used when flat_start is false; missing buses start flat.
    std::map<int, Complex> initial_voltages;

    int iteration_limit() const {
        return max_iterations.value_or(method == SolverMethod::NewtonRaphson ? 30 : 5000);
    }
};

/// Throws std::invalid_argument on a non-positive tolerance or iteration limit.
void check_options(const SolverOptions& options);

struct AdmittanceMatrix {
    std::vector<int> bus_ids;                  // matrix row/column order
    std::unordered_map<int, Eigen::Index> position;
    Eigen::SparseMatrix<Complex> y;

    Eigen::Index index_of(int bus_id) const { return position.at(bus_id); }
};

/// Nodal admittance over the island's buses and closed branches. Throws SingularBranch.
AdmittanceMatrix build_admittance(const NetworkCase& net, const Island& island);

struct BusState {
    double v_mag = 1.0;
    double v_angle = 0.0;      // radians
    double p_injection = 0.0;  // MW, generation minus load
    double q_injection = 0.0;  // MVAr

    bool operator==(const BusState&) const = default;
};

/// Terminal flows in MW / MVAr, both measured from the terminal into the branch.
struct BranchFlow {
    int sending_bus = 0;
    int receiving_bus = 0;
    double p_send = 0.0;
    double q_send = 0.0;
    double p_recv = 0.0;
    double q_recv = 0.0;
    double current_mag = 0.0;  // per-unit, at the sending terminal

    double loss_mw() const { return p_send + p_recv; }
    bool operator==(const BranchFlow&) const = default;
};

struct IslandSummary {
    int root = 0;
    std::vector<int> buses;
    double loss_mw = 0.0;
    bool converged = false;
    int iterations = 0;
    double max_mismatch = 0.0;
    // PV buses that hit a reactive limit and were held at it.
    std::vector<int> limited_buses;

    bool operator==(const IslandSummary&) const = default;
};

struct PowerFlowSolution {
    std::map<int, BusState> buses;
    std::map<int, BranchFlow> branches;  // closed branches only
    double total_loss_mw = 0.0;
    bool converged = false;
    int iterations = 0;          // summed over islands
    double max_mismatch = 0.0;   // per-unit, worst island
    std::vector<IslandSummary> islands;

    Complex voltage(int bus_id) const {
        const auto& b = buses.at(bus_id);
        return std::polar(b.v_mag, b.v_angle);
    }
};

/// Solves one island with its root as slack. Non-convergence is reported through
/// `converged`; SingularJacobian and SingularBranch are thrown.
PowerFlowSolution solve_newton_raphson(const NetworkCase& net, const Island& island,
                                       const SolverOptions& options = {});
PowerFlowSolution solve_gauss_seidel(const NetworkCase& net, const Island& island,
                                     const SolverOptions& options = {});
PowerFlowSolution solve_island(const NetworkCase& net, const Island& island,
                               const SolverOptions& options = {});

/// Terminal flows for every closed branch whose endpoints both have voltages.
/// In a tree the sending end is the terminal nearer the root; in a meshed
/// component it is the terminal where active power enters the branch.
std::map<int, BranchFlow> branch_flows(const NetworkCase& net, const Configuration& config,
                                       const std::map<int, Complex>& voltages);

/// Every island of a radial configuration solved independently and merged.
/// Throws NotRadial.
PowerFlowSolution solve_all_islands(const NetworkCase& net, const Configuration& config,
                                    const SolverOptions& options = {});

/// Any configuration: each connected component is solved with its first listed
/// root as slack; further roots act as PV units. Throws Unreachable if a
/// component has no root.
PowerFlowSolution solve_network(const NetworkCase& net, const Configuration& config,
                                const SolverOptions& options = {});

namespace detail {

/// Bus roles inside one island, in admittance order.
struct BusRoles {
    Eigen::Index slack = 0;
    std::vector<Eigen::Index> pv;
    std::vector<Eigen::Index> pq;
};

/// Complex power injection S = V .* conj(Y V), per-unit.
Eigen::VectorXcd power_injection(const Eigen::SparseMatrix<Complex>& y, const Eigen::VectorXcd& v);

/// Mismatch ordering: [P at pv+pq, Q at pq]; the state vector is [angle at pv+pq, |V| at pq].
Eigen::VectorXd power_mismatch(const Eigen::SparseMatrix<Complex>& y, const Eigen::VectorXcd& v,
                               const Eigen::VectorXcd& s_spec, const BusRoles& roles);

/// Analytic derivative of the calculated injections with respect to the state vector,
/// rows ordered as in power_mismatch.
Eigen::SparseMatrix<double> newton_jacobian(const Eigen::SparseMatrix<Complex>& y,
                                            const Eigen::VectorXcd& v, const BusRoles& roles);

}  // namespace detail

}  // namespace gridreconf
