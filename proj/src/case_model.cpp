#include "gridreconf/case_model.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>

namespace gridreconf {

Unreachable::Unreachable(std::vector<int> bus_ids)
    : Error([&] {
          std::ostringstream os;
          os << "buses not connectable to any root:";
          for (int id : bus_ids) os << ' ' << id;
          return os.str();
      }()),
      bus_ids_(std::move(bus_ids)) {}

std::string to_string(BusKind kind) {
    switch (kind) {
        case BusKind::Feeder: return "Feeder";
        case BusKind::Generator: return "Generator";
        case BusKind::Load: return "Load";
        case BusKind::SynchronousCondenser: return "SynchronousCondenser";
    }
    return "Load";
}

std::optional<BusKind> bus_kind_from_string(const std::string& text) {
    if (text == "Feeder") return BusKind::Feeder;
    if (text == "Generator") return BusKind::Generator;
    if (text == "Load") return BusKind::Load;
    if (text == "SynchronousCondenser") return BusKind::SynchronousCondenser;
    return std::nullopt;
}

NetworkCase::NetworkCase(double base_mva, std::vector<Bus> buses, std::vector<Branch> branches,
                         std::vector<int> roots, double delta_t_hours)
    : base_mva_(base_mva),
      delta_t_hours_(delta_t_hours),
      buses_(std::move(buses)),
      branches_(std::move(branches)),
      roots_(std::move(roots)) {
    // Duplicates keep their first position; validate_case reports them.
    for (std::size_t i = 0; i < buses_.size(); ++i) bus_index_.try_emplace(buses_[i].id, i);
    for (std::size_t i = 0; i < branches_.size(); ++i) branch_index_.try_emplace(branches_[i].id, i);
}

const Bus& NetworkCase::bus(int id) const { return buses_[bus_position(id)]; }
const Branch& NetworkCase::branch(int id) const { return branches_[branch_position(id)]; }

std::size_t NetworkCase::bus_position(int id) const {
    auto it = bus_index_.find(id);
    if (it == bus_index_.end()) throw std::out_of_range("unknown bus " + std::to_string(id));
    return it->second;
}

std::size_t NetworkCase::branch_position(int id) const {
    auto it = branch_index_.find(id);
    if (it == branch_index_.end()) throw std::out_of_range("unknown branch " + std::to_string(id));
    return it->second;
}

bool NetworkCase::is_root(int bus_id) const {
    return std::find(roots_.begin(), roots_.end(), bus_id) != roots_.end();
}

NetworkCase NetworkCase::with_delta_t(double hours) const {
    NetworkCase copy = *this;
    copy.delta_t_hours_ = hours;
    return copy;
}

bool NetworkCase::operator==(const NetworkCase& other) const {
    return base_mva_ == other.base_mva_ && delta_t_hours_ == other.delta_t_hours_ &&
           buses_ == other.buses_ && branches_ == other.branches_ && roots_ == other.roots_;
}

Configuration Configuration::all_closed(const NetworkCase& net) {
    std::map<int, SwitchState> states;
    for (const auto& br : net.branches()) states[br.id] = SwitchState::Closed;
    return Configuration(std::move(states));
}

Configuration Configuration::defaults(const NetworkCase& net) {
    std::map<int, SwitchState> states;
    for (const auto& br : net.branches()) states[br.id] = br.default_state;
    return Configuration(std::move(states));
}

Configuration Configuration::with_open(const NetworkCase& net, const std::vector<int>& open_ids) {
    std::map<int, SwitchState> states;
    for (const auto& br : net.branches()) {
        if (!br.switchable) {
            states[br.id] = br.default_state;
        } else {
            bool open = std::find(open_ids.begin(), open_ids.end(), br.id) != open_ids.end();
            states[br.id] = open ? SwitchState::Open : SwitchState::Closed;
        }
    }
    return Configuration(std::move(states));
}

SwitchState Configuration::state(int branch_id) const {
    auto it = states_.find(branch_id);
    if (it == states_.end()) throw std::out_of_range("configuration has no branch " + std::to_string(branch_id));
    return it->second;
}

std::vector<int> Configuration::closed_branches() const {
    std::vector<int> ids;
    for (const auto& [id, s] : states_)
        if (s == SwitchState::Closed) ids.push_back(id);
    return ids;
}

std::vector<int> Configuration::open_branches() const {
    std::vector<int> ids;
    for (const auto& [id, s] : states_)
        if (s == SwitchState::Open) ids.push_back(id);
    return ids;
}

std::size_t Configuration::distance(const Configuration& other) const {
    std::size_t n = 0;
    for (const auto& [id, s] : states_) {
        auto it = other.states_.find(id);
        if (it == other.states_.end() || it->second != s) ++n;
    }
    for (const auto& [id, s] : other.states_)
        if (!states_.contains(id)) ++n;
    return n;
}

bool Configuration::covers(const NetworkCase& net) const {
    if (states_.size() != net.branches().size()) return false;
    for (const auto& br : net.branches()) {
        auto it = states_.find(br.id);
        if (it == states_.end()) return false;
        if (!br.switchable && it->second != br.default_state) return false;
    }
    return true;
}

ValidationError::ValidationError(ValidationReport report)
    : Error("case validation failed:\n" + format_report(report)), report_(std::move(report)) {}

std::string format_report(const ValidationReport& report) {
    std::ostringstream os;
    for (const auto& v : report) {
        switch (v.subject) {
            case Violation::Subject::Case: os << "case"; break;
            case Violation::Subject::Bus: os << "bus " << v.id; break;
            case Violation::Subject::Branch: os << "branch " << v.id; break;
        }
        os << ": " << v.message << '\n';
    }
    return os.str();
}

namespace {

struct Adjacency {
    // bus position -> (neighbour position, branch id)
    std::vector<std::vector<std::pair<std::size_t, int>>> edges;
};

Adjacency closed_adjacency(const NetworkCase& net, const Configuration& config) {
    Adjacency adj;
    adj.edges.resize(net.buses().size());
    for (const auto& br : net.branches()) {
        if (!net.has_bus(br.from_bus) || !net.has_bus(br.to_bus)) continue;
        auto it = config.states().find(br.id);
        if (it == config.states().end() || it->second != SwitchState::Closed) continue;
        std::size_t f = net.bus_position(br.from_bus);
        std::size_t t = net.bus_position(br.to_bus);
        adj.edges[f].emplace_back(t, br.id);
        adj.edges[t].emplace_back(f, br.id);
    }
    return adj;
}

std::string join_ids(const std::set<int>& ids) {
    std::ostringstream os;
    bool first = true;
    for (int id : ids) {
        if (!first) os << ", ";
        os << id;
        first = false;
    }
    return os.str();
}

}  // namespace

std::vector<std::set<int>> connected_components(const NetworkCase& net, const Configuration& config) {
    const auto adj = closed_adjacency(net, config);
    std::vector<bool> seen(net.buses().size(), false);
    std::vector<std::set<int>> comps;
    for (std::size_t start = 0; start < net.buses().size(); ++start) {
        if (seen[start]) continue;
        std::set<int> comp;
        std::deque<std::size_t> queue{start};
        seen[start] = true;
        while (!queue.empty()) {
            std::size_t u = queue.front();
            queue.pop_front();
            comp.insert(net.buses()[u].id);
            for (auto [v, _] : adj.edges[u]) {
                if (!seen[v]) {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        comps.push_back(std::move(comp));
    }
    std::sort(comps.begin(), comps.end(),
              [](const auto& a, const auto& b) { return *a.begin() < *b.begin(); });
    return comps;
}

ValidationReport validate_case(const NetworkCase& net) {
    using S = Violation::Subject;
    ValidationReport out;
    auto add = [&](S subject, int id, std::string msg) { out.push_back({subject, id, std::move(msg)}); };

    if (!(net.base_mva() > 0.0)) add(S::Case, 0, "base_mva must be positive");
    if (!(net.delta_t_hours() > 0.0)) add(S::Case, 0, "delta_t_hours must be positive");

    std::set<int> bus_ids;
    for (const auto& bus : net.buses()) {
        if (bus.id <= 0) add(S::Bus, bus.id, "bus id must be a positive integer");
        if (!bus_ids.insert(bus.id).second) add(S::Bus, bus.id, "duplicate bus id");
        if (!(bus.v_min > 0.0)) add(S::Bus, bus.id, "v_min must be positive");
        if (!(bus.v_min < bus.v_max)) add(S::Bus, bus.id, "v_min must be below v_max");
        if (bus.kind == BusKind::Load && bus.v_setpoint)
            add(S::Bus, bus.id, "load bus must not carry a voltage setpoint");
        if (bus.kind != BusKind::Load && !bus.v_setpoint)
            add(S::Bus, bus.id, "voltage-controlled bus needs a voltage setpoint");
        if (bus.q_min && bus.q_max && *bus.q_min > *bus.q_max)
            add(S::Bus, bus.id, "q_min exceeds q_max");
    }

    std::set<int> branch_ids;
    for (const auto& br : net.branches()) {
        if (br.id <= 0) add(S::Branch, br.id, "branch id must be a positive integer");
        if (!branch_ids.insert(br.id).second) add(S::Branch, br.id, "duplicate branch id");
        if (br.from_bus == br.to_bus) add(S::Branch, br.id, "from_bus equals to_bus");
        if (!net.has_bus(br.from_bus))
            add(S::Branch, br.id, "from_bus refers to missing bus " + std::to_string(br.from_bus));
        if (!net.has_bus(br.to_bus))
            add(S::Branch, br.id, "to_bus refers to missing bus " + std::to_string(br.to_bus));
        if (br.r < 0.0) add(S::Branch, br.id, "negative resistance");
        if (br.r == 0.0 && br.x == 0.0) add(S::Branch, br.id, "r and x are both zero");
        if (br.mva_limit && !(*br.mva_limit > 0.0)) add(S::Branch, br.id, "mva_limit must be positive");
        if (!(br.tap > 0.0)) add(S::Branch, br.id, "tap ratio must be positive");
    }

    if (net.roots().empty()) add(S::Case, 0, "no feeder roots declared");
    std::set<int> root_set;
    for (int root : net.roots()) {
        if (!root_set.insert(root).second) add(S::Bus, root, "root listed twice");
        if (!net.has_bus(root)) {
            add(S::Bus, root, "root refers to missing bus");
        } else if (net.bus(root).kind != BusKind::Feeder) {
            add(S::Bus, root, "root bus is not of Feeder kind");
        }
    }

    if (!net.buses().empty()) {
        auto comps = connected_components(net, Configuration::all_closed(net));
        if (comps.size() > 1) {
            auto main = std::max_element(comps.begin(), comps.end(), [](const auto& a, const auto& b) {
                return a.size() < b.size();
            });
            for (auto it = comps.begin(); it != comps.end(); ++it) {
                if (it == main) continue;
                add(S::Case, 0, "network disconnected with all branches closed; isolated buses: " + join_ids(*it));
            }
        }
    }
    return out;
}

bool is_radial(const NetworkCase& net, const Configuration& config) {
    if (!config.covers(net) || net.roots().empty()) return false;
    const std::size_t n = net.buses().size();

    std::size_t closed = 0;
    for (const auto& [id, s] : config.states())
        if (s == SwitchState::Closed) ++closed;
    if (closed + net.roots().size() != n) return false;

    // Union-find cycle check over closed branches.
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& br : net.branches()) {
        if (!config.is_closed(br.id)) continue;
        if (!net.has_bus(br.from_bus) || !net.has_bus(br.to_bus)) return false;
        std::size_t a = find(net.bus_position(br.from_bus));
        std::size_t b = find(net.bus_position(br.to_bus));
        if (a == b) return false;
        parent[a] = b;
    }

    // Each component holds exactly one root and every bus sits in one of them.
    std::vector<int> roots_in(n, 0);
    for (int root : net.roots()) {
        if (!net.has_bus(root)) return false;
        if (++roots_in[find(net.bus_position(root))] > 1) return false;
    }
    for (std::size_t i = 0; i < n; ++i)
        if (roots_in[find(i)] != 1) return false;
    return true;
}

std::vector<Island> islands(const NetworkCase& net, const Configuration& config) {
    if (!is_radial(net, config)) throw NotRadial("configuration is not radial");
    const auto adj = closed_adjacency(net, config);
    std::vector<Island> out;
    for (int root : net.roots()) {
        Island island;
        island.root = root;
        std::deque<std::size_t> queue{net.bus_position(root)};
        island.buses.insert(root);
        while (!queue.empty()) {
            std::size_t u = queue.front();
            queue.pop_front();
            for (auto [v, branch_id] : adj.edges[u]) {
                island.branches.insert(branch_id);
                if (island.buses.insert(net.buses()[v].id).second) queue.push_back(v);
            }
        }
        out.push_back(std::move(island));
    }
    return out;
}

}  // namespace gridreconf
