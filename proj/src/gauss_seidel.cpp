#include <algorithm>
#include <cmath>

#include "island_problem.hpp"

namespace gridreconf {
namespace detail {

InnerResult gauss_seidel_inner(IslandProblem& problem, double tolerance, int max_iterations) {
    const Eigen::SparseMatrix<Complex, Eigen::RowMajor> y = problem.admittance.y;
    const auto& roles = problem.roles;
    auto& v = problem.v;
    InnerResult result;

    std::vector<Eigen::Index> order;
    order.insert(order.end(), roles.pv.begin(), roles.pv.end());
    order.insert(order.end(), roles.pq.begin(), roles.pq.end());
    std::sort(order.begin(), order.end());
    std::vector<bool> is_pv(static_cast<std::size_t>(v.size()), false);
    for (auto i : roles.pv) is_pv[static_cast<std::size_t>(i)] = true;

    while (result.iterations < max_iterations) {
        const Eigen::VectorXd mismatch = power_mismatch(problem.admittance.y, v, problem.s_spec, roles);
        ++result.iterations;
        result.max_mismatch = mismatch.size() == 0 ? 0.0 : mismatch.cwiseAbs().maxCoeff();
        if (!std::isfinite(result.max_mismatch)) break;
        if (result.max_mismatch <= tolerance) {
            result.converged = true;
            break;
        }
        if (result.iterations == max_iterations) break;

        for (auto i : order) {
            Complex y_ii(0.0, 0.0);
            Complex others(0.0, 0.0);
            for (Eigen::SparseMatrix<Complex, Eigen::RowMajor>::InnerIterator it(y, i); it; ++it) {
                if (it.col() == i) {
                    y_ii = it.value();
                } else {
                    others += it.value() * v(it.col());
                }
            }
            Complex s_i = problem.s_spec(i);
            if (is_pv[static_cast<std::size_t>(i)]) {
                // Reactive output implied by the present iterate.
                const double q = std::imag(v(i) * std::conj(others + y_ii * v(i)));
                s_i = Complex(s_i.real(), q);
            }
            Complex updated = (std::conj(s_i) / std::conj(v(i)) - others) / y_ii;
            if (is_pv[static_cast<std::size_t>(i)]) updated = std::abs(v(i)) * updated / std::abs(updated);
            v(i) = updated;
        }
    }
    return result;
}

}  // namespace detail

PowerFlowSolution solve_gauss_seidel(const NetworkCase& net, const Island& island, const SolverOptions& options) {
    return detail::solve_with_limits(net, island, options, detail::gauss_seidel_inner);
}

}  // namespace gridreconf
