#include <cmath>

#include <Eigen/SparseLU>

#include "island_problem.hpp"

namespace gridreconf {
namespace detail {

Eigen::VectorXcd power_injection(const Eigen::SparseMatrix<Complex>& y, const Eigen::VectorXcd& v) {
    const Eigen::VectorXcd current = y * v;
    return v.cwiseProduct(current.conjugate());
}

Eigen::VectorXd power_mismatch(const Eigen::SparseMatrix<Complex>& y, const Eigen::VectorXcd& v,
                               const Eigen::VectorXcd& s_spec, const BusRoles& roles) {
    const Eigen::VectorXcd s = power_injection(y, v);
    const auto n_angle = static_cast<Eigen::Index>(roles.pv.size() + roles.pq.size());
    Eigen::VectorXd out(n_angle + static_cast<Eigen::Index>(roles.pq.size()));
    Eigen::Index row = 0;
    for (auto i : roles.pv) out(row++) = (s_spec(i) - s(i)).real();
    for (auto i : roles.pq) out(row++) = (s_spec(i) - s(i)).real();
    for (auto i : roles.pq) out(row++) = (s_spec(i) - s(i)).imag();
    return out;
}

Eigen::SparseMatrix<double> newton_jacobian(const Eigen::SparseMatrix<Complex>& y,
                                            const Eigen::VectorXcd& v, const BusRoles& roles) {
    const Eigen::Index n = v.size();
    // State / equation slots per bus; -1 when the bus has none.
    std::vector<Eigen::Index> angle_slot(n, -1), mag_slot(n, -1);
    Eigen::Index k = 0;
    for (auto i : roles.pv) angle_slot[i] = k++;
    for (auto i : roles.pq) angle_slot[i] = k++;
    for (auto i : roles.pq) mag_slot[i] = k++;
    const Eigen::Index dim = k;

    const Eigen::VectorXcd current = y * v;
    Eigen::VectorXcd v_unit(n);
    for (Eigen::Index i = 0; i < n; ++i) v_unit(i) = v(i) / std::abs(v(i));

    // dS_i/dtheta_k = j V_i (delta_ik conj(I_i) - conj(Y_ik V_k))
    // dS_i/d|V_k|   = V_i conj(Y_ik V_k/|V_k|) + delta_ik conj(I_i) V_i/|V_i|
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(y.nonZeros()) * 4 + static_cast<std::size_t>(n) * 4);
    auto emit = [&](Eigen::Index bus_row, Eigen::Index bus_col, Complex ds_dangle, Complex ds_dmag) {
        const Eigen::Index p_row = angle_slot[bus_row];
        const Eigen::Index q_row = mag_slot[bus_row];
        const Eigen::Index a_col = angle_slot[bus_col];
        const Eigen::Index m_col = mag_slot[bus_col];
        if (p_row >= 0) {
            if (a_col >= 0) triplets.emplace_back(p_row, a_col, ds_dangle.real());
            if (m_col >= 0) triplets.emplace_back(p_row, m_col, ds_dmag.real());
        }
        if (q_row >= 0) {
            if (a_col >= 0) triplets.emplace_back(q_row, a_col, ds_dangle.imag());
            if (m_col >= 0) triplets.emplace_back(q_row, m_col, ds_dmag.imag());
        }
    };

    const Complex j(0.0, 1.0);
    for (Eigen::Index col = 0; col < y.outerSize(); ++col) {
        for (Eigen::SparseMatrix<Complex>::InnerIterator it(y, col); it; ++it) {
            const Eigen::Index i = it.row();
            const Eigen::Index kk = it.col();
            const Complex yik = it.value();
            emit(i, kk, -j * v(i) * std::conj(yik * v(kk)), v(i) * std::conj(yik * v_unit(kk)));
        }
    }
    for (Eigen::Index i = 0; i < n; ++i)
        emit(i, i, j * v(i) * std::conj(current(i)), std::conj(current(i)) * v_unit(i));

    Eigen::SparseMatrix<double> jac(dim, dim);
    jac.setFromTriplets(triplets.begin(), triplets.end());
    return jac;
}

InnerResult newton_inner(IslandProblem& problem, double tolerance, int max_iterations) {
    const auto& y = problem.admittance.y;
    const auto& roles = problem.roles;
    InnerResult result;

    Eigen::VectorXd angle(problem.v.size()), mag(problem.v.size());
    for (Eigen::Index i = 0; i < problem.v.size(); ++i) {
        angle(i) = std::arg(problem.v(i));
        mag(i) = std::abs(problem.v(i));
    }

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    bool pattern_ready = false;
    while (result.iterations < max_iterations) {
        const Eigen::VectorXd mismatch = power_mismatch(y, problem.v, problem.s_spec, roles);
        ++result.iterations;
        result.max_mismatch = mismatch.size() == 0 ? 0.0 : mismatch.cwiseAbs().maxCoeff();
        if (!std::isfinite(result.max_mismatch)) break;
        if (result.max_mismatch <= tolerance) {
            result.converged = true;
            break;
        }
        if (result.iterations == max_iterations) break;

        const Eigen::SparseMatrix<double> jac = newton_jacobian(y, problem.v, roles);
        if (!pattern_ready) {
            lu.analyzePattern(jac);
            pattern_ready = true;
        }
        lu.factorize(jac);
        if (lu.info() != Eigen::Success) throw SingularJacobian("Newton-Raphson Jacobian is singular");
        const Eigen::VectorXd step = lu.solve(mismatch);
        if (lu.info() != Eigen::Success) throw SingularJacobian("Newton-Raphson step solve failed");

        Eigen::Index k = 0;
        for (auto i : roles.pv) angle(i) += step(k++);
        for (auto i : roles.pq) angle(i) += step(k++);
        for (auto i : roles.pq) mag(i) += step(k++);
        if ((mag.array() <= 0.0).any() || !step.allFinite()) break;  // collapsed voltage
        for (Eigen::Index i = 0; i < problem.v.size(); ++i) problem.v(i) = std::polar(mag(i), angle(i));
    }
    return result;
}

}  // namespace detail

PowerFlowSolution solve_newton_raphson(const NetworkCase& net, const Island& island,
                                       const SolverOptions& options) {
    return detail::solve_with_limits(net, island, options, detail::newton_inner);
}

}  // namespace gridreconf
