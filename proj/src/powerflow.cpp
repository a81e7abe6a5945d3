#include "gridreconf/powerflow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "island_problem.hpp"

namespace gridreconf {

void check_options(const SolverOptions& options) {
    if (!(options.tolerance > 0.0)) throw std::invalid_argument("solver tolerance must be positive");
    if (options.iteration_limit() < 1) throw std::invalid_argument("solver iteration limit must be at least 1");
}

namespace detail {

IslandProblem make_problem(const NetworkCase& net, const Island& island, const SolverOptions& options) {
    IslandProblem p;
    p.admittance = build_admittance(net, island);
    const auto n = static_cast<Eigen::Index>(p.admittance.bus_ids.size());
    const double base = net.base_mva();
    constexpr double inf = std::numeric_limits<double>::infinity();

    p.s_spec.resize(n);
    p.v.resize(n);
    p.q_load.resize(n);
    p.q_gen_min.resize(n);
    p.q_gen_max.resize(n);

    for (Eigen::Index i = 0; i < n; ++i) {
        const int id = p.admittance.bus_ids[static_cast<std::size_t>(i)];
        const Bus& bus = net.bus(id);
        p.s_spec(i) = Complex(bus.p_gen - bus.p_load, bus.q_gen - bus.q_load) / base;
        p.q_load(i) = bus.q_load / base;
        p.q_gen_min(i) = bus.q_min ? *bus.q_min / base : -inf;
        p.q_gen_max(i) = bus.q_max ? *bus.q_max / base : inf;

        double magnitude = 1.0;
        if (id == island.root) {
            p.roles.slack = i;
            magnitude = bus.v_setpoint.value_or(1.0);
        } else if (bus.kind != BusKind::Load && bus.v_setpoint) {
            p.roles.pv.push_back(i);
            magnitude = *bus.v_setpoint;
        } else {
            p.roles.pq.push_back(i);
        }

        Complex start = std::polar(magnitude, 0.0);
        if (!options.flat_start) {
            if (auto it = options.initial_voltages.find(id); it != options.initial_voltages.end()) {
                start = it->second;
                const bool regulated = id == island.root || (bus.kind != BusKind::Load && bus.v_setpoint);
                if (regulated) start = std::polar(magnitude, std::arg(start));
            }
        }
        p.v(i) = start;
    }
    return p;
}

PowerFlowSolution solve_with_limits(const NetworkCase& net, const Island& island,
                                    const SolverOptions& options, const InnerSolver& inner) {
    check_options(options);
    if (!island.buses.contains(island.root)) throw std::invalid_argument("island does not contain its root");
    IslandProblem problem = make_problem(net, island, options);
    const int limit = options.iteration_limit();

    InnerResult last;
    int used = 0;
    while (true) {
        last = inner(problem, options.tolerance, limit - used);
        used += last.iterations;
        if (!last.converged) break;

        const Eigen::VectorXcd s = power_injection(problem.admittance.y, problem.v);
        std::vector<Eigen::Index> still_pv;
        bool switched = false;
        for (auto i : problem.roles.pv) {
            const double q_gen = s(i).imag() + problem.q_load(i);
            double held = q_gen;
            if (q_gen > problem.q_gen_max(i) + options.tolerance) held = problem.q_gen_max(i);
            if (q_gen < problem.q_gen_min(i) - options.tolerance) held = problem.q_gen_min(i);
            if (held == q_gen) {
                still_pv.push_back(i);
                continue;
            }
            problem.s_spec(i) = Complex(problem.s_spec(i).real(), held - problem.q_load(i));
            problem.roles.pq.push_back(i);
            problem.limited_buses.push_back(problem.admittance.bus_ids[static_cast<std::size_t>(i)]);
            switched = true;
        }
        if (!switched) break;
        problem.roles.pv = std::move(still_pv);
        std::sort(problem.roles.pq.begin(), problem.roles.pq.end());
        if (used >= limit) {
            last.converged = false;
            break;
        }
    }

    PowerFlowSolution sol;
    const double base = net.base_mva();
    const Eigen::VectorXcd s = power_injection(problem.admittance.y, problem.v);
    std::map<int, Complex> voltages;
    for (std::size_t i = 0; i < problem.admittance.bus_ids.size(); ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const int id = problem.admittance.bus_ids[i];
        voltages[id] = problem.v(k);
        sol.buses[id] = BusState{std::abs(problem.v(k)), std::arg(problem.v(k)), s(k).real() * base,
                                 s(k).imag() * base};
    }
    sol.branches = component_flows(net, island.root, island.buses, island.branches, voltages);
    for (const auto& [id, flow] : sol.branches) sol.total_loss_mw += flow.loss_mw();
    sol.converged = last.converged;
    sol.iterations = used;
    sol.max_mismatch = last.max_mismatch;

    IslandSummary summary;
    summary.root = island.root;
    summary.buses.assign(island.buses.begin(), island.buses.end());
    summary.loss_mw = sol.total_loss_mw;
    summary.converged = sol.converged;
    summary.iterations = used;
    summary.max_mismatch = last.max_mismatch;
    summary.limited_buses = problem.limited_buses;
    std::sort(summary.limited_buses.begin(), summary.limited_buses.end());
    sol.islands.push_back(std::move(summary));
    return sol;
}

std::map<int, BranchFlow> component_flows(const NetworkCase& net, int root, const std::set<int>& buses,
                                          const std::set<int>& branch_ids,
                                          const std::map<int, Complex>& voltages) {
    const double base = net.base_mva();
    const bool tree = branch_ids.size() + 1 == buses.size();

    std::map<int, int> depth;
    if (tree) {
        std::map<int, std::vector<int>> adjacent;
        for (int id : branch_ids) {
            const Branch& br = net.branch(id);
            adjacent[br.from_bus].push_back(br.to_bus);
            adjacent[br.to_bus].push_back(br.from_bus);
        }
        std::deque<int> queue{root};
        depth[root] = 0;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (int w : adjacent[u]) {
                if (depth.try_emplace(w, depth[u] + 1).second) queue.push_back(w);
            }
        }
    }

    std::map<int, BranchFlow> out;
    for (int id : branch_ids) {
        const Branch& br = net.branch(id);
        auto vf_it = voltages.find(br.from_bus);
        auto vt_it = voltages.find(br.to_bus);
        if (vf_it == voltages.end() || vt_it == voltages.end()) continue;
        const Complex vf = vf_it->second;
        const Complex vt = vt_it->second;

        const Complex y_series = 1.0 / Complex(br.r, br.x);
        const Complex y_charge(0.0, br.b_shunt / 2.0);
        const Complex i_from = (y_series + y_charge) / (br.tap * br.tap) * vf - y_series / br.tap * vt;
        const Complex i_to = -y_series / br.tap * vf + (y_series + y_charge) * vt;
        const Complex s_from = vf * std::conj(i_from);
        const Complex s_to = vt * std::conj(i_to);

        bool from_sends = s_from.real() >= s_to.real();
        if (tree && depth.contains(br.from_bus) && depth.contains(br.to_bus))
            from_sends = depth[br.from_bus] < depth[br.to_bus];

        BranchFlow flow;
        const Complex s_send = from_sends ? s_from : s_to;
        const Complex s_recv = from_sends ? s_to : s_from;
        flow.sending_bus = from_sends ? br.from_bus : br.to_bus;
        flow.receiving_bus = from_sends ? br.to_bus : br.from_bus;
        flow.p_send = s_send.real() * base;
        flow.q_send = s_send.imag() * base;
        flow.p_recv = s_recv.real() * base;
        flow.q_recv = s_recv.imag() * base;
        flow.current_mag = std::abs(from_sends ? i_from : i_to);
        out.emplace(id, flow);
    }
    return out;
}

}  // namespace detail

PowerFlowSolution solve_island(const NetworkCase& net, const Island& island, const SolverOptions& options) {
    return options.method == SolverMethod::NewtonRaphson ? solve_newton_raphson(net, island, options)
                                                         : solve_gauss_seidel(net, island, options);
}

std::map<int, BranchFlow> branch_flows(const NetworkCase& net, const Configuration& config,
                                       const std::map<int, Complex>& voltages) {
    std::map<int, BranchFlow> out;
    for (const auto& comp : connected_components(net, config)) {
        int root = *comp.begin();
        for (int r : net.roots()) {
            if (comp.contains(r)) {
                root = r;
                break;
            }
        }
        std::set<int> ids;
        for (const auto& br : net.branches())
            if (config.is_closed(br.id) && comp.contains(br.from_bus)) ids.insert(br.id);
        auto part = detail::component_flows(net, root, comp, ids, voltages);
        out.merge(part);
    }
    return out;
}

namespace {

PowerFlowSolution merge(std::vector<PowerFlowSolution> parts) {
    PowerFlowSolution out;
    out.converged = true;
    for (auto& part : parts) {
        out.buses.merge(part.buses);
        out.branches.merge(part.branches);
        out.total_loss_mw += part.total_loss_mw;
        out.converged = out.converged && part.converged;
        out.iterations += part.iterations;
        out.max_mismatch = std::max(out.max_mismatch, part.max_mismatch);
        for (auto& s : part.islands) out.islands.push_back(std::move(s));
    }
    return out;
}

}  // namespace

PowerFlowSolution solve_all_islands(const NetworkCase& net, const Configuration& config,
                                    const SolverOptions& options) {
    std::vector<PowerFlowSolution> parts;
    for (const auto& island : islands(net, config)) parts.push_back(solve_island(net, island, options));
    return merge(std::move(parts));
}

PowerFlowSolution solve_network(const NetworkCase& net, const Configuration& config,
                                const SolverOptions& options) {
    std::vector<PowerFlowSolution> parts;
    std::vector<int> rootless;
    for (const auto& comp : connected_components(net, config)) {
        Island island;
        island.root = 0;
        for (int r : net.roots()) {
            if (comp.contains(r)) {
                island.root = r;
                break;
            }
        }
        if (island.root == 0) {
            rootless.insert(rootless.end(), comp.begin(), comp.end());
            continue;
        }
        island.buses = comp;
        for (const auto& br : net.branches())
            if (config.is_closed(br.id) && comp.contains(br.from_bus)) island.branches.insert(br.id);
        parts.push_back(solve_island(net, island, options));
    }
    if (!rootless.empty()) throw Unreachable(std::move(rootless));
    return merge(std::move(parts));
}

}  // namespace gridreconf
