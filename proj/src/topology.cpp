#include "gridreconf/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <stdexcept>

namespace gridreconf {

ForestBuildResult build_spanning_forest(const NetworkCase& net, const std::map<int, double>& weights) {
    for (const auto& br : net.branches()) {
        auto it = weights.find(br.id);
        if (it == weights.end()) throw std::invalid_argument("no weight for branch " + std::to_string(br.id));
        if (!(it->second >= 0.0)) throw std::invalid_argument("negative weight for branch " + std::to_string(br.id));
    }

    std::set<int> covered(net.roots().begin(), net.roots().end());
    std::set<int> closed;
    ForestBuildResult result;

    while (covered.size() < net.buses().size()) {
        const Branch* best = nullptr;
        auto better = [&](const Branch& cand) {
            if (!best) return true;
            const bool pinned_c = !cand.switchable, pinned_b = !best->switchable;
            if (pinned_c != pinned_b) return pinned_c;
            const double wc = weights.at(cand.id), wb = weights.at(best->id);
            if (wc != wb) return wc > wb;
            return cand.id < best->id;
        };
        for (const auto& br : net.branches()) {
            if (closed.contains(br.id)) continue;
            if (!br.switchable && br.default_state == SwitchState::Open) continue;
            if (covered.contains(br.from_bus) == covered.contains(br.to_bus)) continue;
            if (better(br)) best = &br;
        }
        if (!best) {
            std::vector<int> missing;
            for (const auto& bus : net.buses())
                if (!covered.contains(bus.id)) missing.push_back(bus.id);
            throw Unreachable(std::move(missing));
        }
        closed.insert(best->id);
        covered.insert(best->from_bus);
        covered.insert(best->to_bus);
        result.insertion_order.emplace_back(best->id, weights.at(best->id));
    }

    std::map<int, SwitchState> states;
    for (const auto& br : net.branches()) {
        const bool is_closed = closed.contains(br.id);
        if (!br.switchable && br.default_state == SwitchState::Closed && !is_closed)
            throw NotRadial("non-switchable branch " + std::to_string(br.id) + " closes a loop");
        states[br.id] = is_closed ? SwitchState::Closed : SwitchState::Open;
        if (!is_closed) result.open_list.push_back(br.id);
    }
    std::sort(result.open_list.begin(), result.open_list.end());
    result.config = Configuration(std::move(states));
    return result;
}

std::map<int, double> weights_from_flow(const NetworkCase& net, const PowerFlowSolution& all_closed) {
    if (!all_closed.converged) throw NotConverged(net.roots().empty() ? 0 : net.roots().front(),
                                                  "weights need a converged power flow");
    std::map<int, double> weights;
    for (const auto& br : net.branches()) {
        auto it = all_closed.branches.find(br.id);
        weights[br.id] = it == all_closed.branches.end() ? 0.0 : std::hypot(it->second.p_send, it->second.q_send);
    }
    return weights;
}

namespace {

struct RootedForest {
    std::map<int, int> parent_bus;
    std::map<int, int> parent_branch;
    std::map<int, int> depth;
    std::map<int, int> root_of;
};

RootedForest root_forest(const NetworkCase& net, const Configuration& config) {
    RootedForest f;
    for (const auto& island : islands(net, config)) {
        std::map<int, std::vector<std::pair<int, int>>> adjacent;
        for (int id : island.branches) {
            const Branch& br = net.branch(id);
            adjacent[br.from_bus].emplace_back(br.to_bus, id);
            adjacent[br.to_bus].emplace_back(br.from_bus, id);
        }
        std::deque<int> queue{island.root};
        f.depth[island.root] = 0;
        f.root_of[island.root] = island.root;
        while (!queue.empty()) {
            int u = queue.front();
            queue.pop_front();
            for (auto [w, id] : adjacent[u]) {
                if (f.depth.contains(w)) continue;
                f.depth[w] = f.depth[u] + 1;
                f.parent_bus[w] = u;
                f.parent_branch[w] = id;
                f.root_of[w] = island.root;
                queue.push_back(w);
            }
        }
    }
    return f;
}

}  // namespace

FundamentalLoop fundamental_loop(const NetworkCase& net, const Configuration& config, int open_branch) {
    if (!is_radial(net, config)) throw NotRadial("fundamental loop needs a radial configuration");
    if (config.is_closed(open_branch))
        throw std::invalid_argument("branch " + std::to_string(open_branch) + " is not open");

    const RootedForest f = root_forest(net, config);
    const Branch& br = net.branch(open_branch);
    int u = br.from_bus, v = br.to_bus;

    FundamentalLoop loop;
    loop.open_branch = open_branch;
    loop.inter_feeder = f.root_of.at(u) != f.root_of.at(v);

    std::vector<int> from_side, to_side;
    if (loop.inter_feeder) {
        for (int b = u; f.parent_bus.contains(b); b = f.parent_bus.at(b)) from_side.push_back(f.parent_branch.at(b));
        for (int b = v; f.parent_bus.contains(b); b = f.parent_bus.at(b)) to_side.push_back(f.parent_branch.at(b));
    } else {
        while (u != v) {
            if (f.depth.at(u) >= f.depth.at(v)) {
                from_side.push_back(f.parent_branch.at(u));
                u = f.parent_bus.at(u);
            } else {
                to_side.push_back(f.parent_branch.at(v));
                v = f.parent_bus.at(v);
            }
        }
    }
    loop.path = std::move(from_side);
    loop.path.insert(loop.path.end(), to_side.rbegin(), to_side.rend());
    return loop;
}

std::vector<int> adjacent_switches(const NetworkCase& net, const Configuration& config, int reference) {
    const auto loop = fundamental_loop(net, config, reference);
    const auto m = loop.path.size();
    std::vector<std::pair<std::size_t, int>> ranked;
    for (std::size_t k = 0; k < m; ++k) {
        const int id = loop.path[k];
        if (!net.branch(id).switchable) continue;
        ranked.emplace_back(std::min(k, m - 1 - k), id);
    }
    std::sort(ranked.begin(), ranked.end());
    std::vector<int> out;
    out.reserve(ranked.size());
    for (const auto& [d, id] : ranked) out.push_back(id);
    return out;
}

}  // namespace gridreconf
