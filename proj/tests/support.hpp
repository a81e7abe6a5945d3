#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <deque>
#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gridreconf/branch_exchange.hpp"
#include "gridreconf/case_io.hpp"

namespace support {

using namespace gridreconf;

inline std::string data_path(const std::string& name) { return std::string(GRIDRECONF_TEST_DATA) + "/" + name; }

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline NetworkCase load(const std::string& name, std::vector<int> roots = {}) {
    ParseOptions options;
    options.roots = std::move(roots);
    const auto format = detect_format(name).value();
    return parse_case(slurp(data_path(name)), format, options);
}

inline NetworkCase ieee14() { return load("ieee14.cdf", {1, 2}); }

inline Bus feeder(int id, double v = 1.0) {
    Bus b;
    b.id = id;
    b.kind = BusKind::Feeder;
    b.v_setpoint = v;
    return b;
}

inline Bus load_bus(int id, double p_mw = 0.0, double q_mvar = 0.0) {
    Bus b;
    b.id = id;
    b.p_load = p_mw;
    b.q_load = q_mvar;
    return b;
}

inline Branch line(int id, int from, int to, double r = 0.01, double x = 0.02) {
    Branch br;
    br.id = id;
    br.from_bus = from;
    br.to_bus = to;
    br.r = r;
    br.x = x;
    return br;
}

inline NetworkCase triangle() {
    return NetworkCase(100.0, {feeder(1), load_bus(2, 10, 2), load_bus(3, 10, 2)},
                       {line(1, 1, 2), line(2, 2, 3), line(3, 1, 3)}, {1});
}

// Radial iff closed count = buses - roots, every bus reachable from a root,
// and no root reaches another root.
inline bool radial_oracle(const NetworkCase& net, const Configuration& config) {
    std::size_t closed = 0;
    std::map<int, std::vector<int>> adj;
    for (const auto& br : net.branches()) {
        if (config.state(br.id) != SwitchState::Closed) continue;
        ++closed;
        adj[br.from_bus].push_back(br.to_bus);
        adj[br.to_bus].push_back(br.from_bus);
    }
    if (closed + net.roots().size() != net.buses().size()) return false;
    std::map<int, int> owner;
    for (int root : net.roots()) {
        if (owner.contains(root)) return false;
        owner[root] = root;
        std::deque<int> queue{root};
        while (!queue.empty()) {
            const int u = queue.front();
            queue.pop_front();
            for (int v : adj[u]) {
                auto it = owner.find(v);
                if (it == owner.end()) {
                    owner[v] = root;
                    queue.push_back(v);
                } else if (it->second != root) {
                    return false;
                }
            }
        }
    }
    return owner.size() == net.buses().size();
}

// Every configuration of the switchable branches, non-switchable at their default.
inline std::vector<Configuration> all_configs(const NetworkCase& net) {
    std::vector<int> sw;
    for (const auto& br : net.branches())
        if (br.switchable) sw.push_back(br.id);
    std::vector<Configuration> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << sw.size()); ++mask) {
        Configuration c = Configuration::defaults(net);
        for (std::size_t i = 0; i < sw.size(); ++i)
            c.set(sw[i], (mask >> i) & 1U ? SwitchState::Open : SwitchState::Closed);
        out.push_back(std::move(c));
    }
    return out;
}

inline std::vector<Configuration> radial_configs(const NetworkCase& net) {
    std::vector<int> sw;
    std::size_t pinned_closed = 0;
    for (const auto& br : net.branches()) {
        if (br.switchable) sw.push_back(br.id);
        else if (br.default_state == SwitchState::Closed) ++pinned_closed;
    }
    const std::size_t want_closed = net.buses().size() - net.roots().size() - pinned_closed;
    std::vector<Configuration> out;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << sw.size()); ++mask) {
        if (static_cast<std::size_t>(std::popcount(mask)) != want_closed) continue;
        Configuration c = Configuration::defaults(net);
        for (std::size_t i = 0; i < sw.size(); ++i)
            c.set(sw[i], (mask >> i) & 1U ? SwitchState::Closed : SwitchState::Open);
        if (radial_oracle(net, c)) out.push_back(std::move(c));
    }
    return out;
}

// Receiving-end magnitude of slack v1 feeding load p+jq (pu) through r+jx:
// u^2 + (2(rp+xq) - v1^2) u + (r^2+x^2)(p^2+q^2) = 0 with u = |V2|^2, upper root by bisection.
struct TwoBusSolution {
    double v2 = 0.0;
    double loss_pu = 0.0;
};

inline TwoBusSolution two_bus_oracle(double v1, double r, double x, double p, double q) {
    const double b = 2.0 * (r * p + x * q) - v1 * v1;
    const double c = (r * r + x * x) * (p * p + q * q);
    auto f = [&](double u) { return u * u + b * u + c; };
    double lo = -b / 2.0, hi = v1 * v1;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) < 0.0 ? lo : hi) = mid;
    }
    const double u = 0.5 * (lo + hi);
    return {std::sqrt(u), r * (p * p + q * q) / u};
}

// Evaluations of every candidate configuration, keyed by configuration.
inline std::map<Configuration, CandidateEvaluation> evaluate_all(const NetworkCase& net,
                                                                 const std::vector<Configuration>& configs) {
    std::map<Configuration, CandidateEvaluation> out;
    for (const auto& c : configs) out.emplace(c, evaluate_candidate(net, c));
    return out;
}

// Single exchanges from `config` that stay radial, found without the topology module.
inline std::vector<Configuration> exchange_neighbours(const NetworkCase& net, const Configuration& config) {
    std::vector<Configuration> out;
    for (const auto& s : net.branches()) {
        if (!s.switchable || config.is_closed(s.id)) continue;
        for (const auto& t : net.branches()) {
            if (!t.switchable || !config.is_closed(t.id)) continue;
            Configuration c = config;
            c.set(s.id, SwitchState::Closed);
            c.set(t.id, SwitchState::Open);
            if (radial_oracle(net, c)) out.push_back(std::move(c));
        }
    }
    return out;
}

// Largest gap between the analytic Newton Jacobian and central differences of the
// mismatch function, relative to the largest analytic entry, on a random 4-bus
// meshed system. Bus 0 is the slack; bus 1 is PV when `with_pv`.
inline double jacobian_fd_gap(std::mt19937& rng, bool with_pv) {
    std::uniform_real_distribution<double> r_dist(0.005, 0.05), x_dist(0.01, 0.2), v_dist(0.92, 1.08),
        a_dist(-0.2, 0.2);
    std::uniform_int_distribution<int> pick(0, 3);
    std::vector<std::pair<int, int>> edges{{0, 1}, {1, 2}, {2, 3}};
    const int a = pick(rng);
    const int b = (a + 2) % 4;
    edges.emplace_back(std::min(a, b), std::max(a, b));
    Eigen::MatrixXcd dense = Eigen::MatrixXcd::Zero(4, 4);
    for (auto [i, j] : edges) {
        const Complex y = 1.0 / Complex(r_dist(rng), x_dist(rng));
        dense(i, i) += y;
        dense(j, j) += y;
        dense(i, j) -= y;
        dense(j, i) -= y;
    }
    const Eigen::SparseMatrix<Complex> y = dense.sparseView();
    detail::BusRoles roles;
    roles.slack = 0;
    if (with_pv) {
        roles.pv = {1};
        roles.pq = {2, 3};
    } else {
        roles.pq = {1, 2, 3};
    }
    Eigen::VectorXcd v(4);
    for (int i = 0; i < 4; ++i) v(i) = std::polar(v_dist(rng), i == 0 ? 0.0 : a_dist(rng));
    const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(4);

    std::vector<std::pair<Eigen::Index, bool>> state;  // (bus, is magnitude)
    for (auto i : roles.pv) state.emplace_back(i, false);
    for (auto i : roles.pq) state.emplace_back(i, false);
    for (auto i : roles.pq) state.emplace_back(i, true);

    const Eigen::MatrixXd analytic(detail::newton_jacobian(y, v, roles));
    if (analytic.cols() != static_cast<Eigen::Index>(state.size())) return std::numeric_limits<double>::infinity();
    Eigen::MatrixXd numeric(analytic.rows(), analytic.cols());
    const double h = 1e-6;
    for (std::size_t k = 0; k < state.size(); ++k) {
        auto perturbed = [&](double step) {
            Eigen::VectorXcd w = v;
            auto [bus, mag] = state[k];
            double m = std::abs(w(bus)), ang = std::arg(w(bus));
            (mag ? m : ang) += step;
            w(bus) = std::polar(m, ang);
            // mismatch is spec minus calculated
            return Eigen::VectorXd(-detail::power_mismatch(y, w, zero, roles));
        };
        numeric.col(static_cast<Eigen::Index>(k)) = (perturbed(h) - perturbed(-h)) / (2 * h);
    }
    return (analytic - numeric).cwiseAbs().maxCoeff() / std::max(1.0, analytic.cwiseAbs().maxCoeff());
}

}  // namespace support
