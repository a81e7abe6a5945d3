#include "gridreconf/objective.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gridreconf {

const ConstraintCheck* ObjectiveReport::constraint(const std::string& name) const {
    for (const auto& c : constraints)
        if (c.name == name) return &c;
    return nullptr;
}

std::vector<BranchTerm> loss_terms(const NetworkCase& net, const Configuration& config,
                                   const PowerFlowSolution& solution) {
    const double base = net.base_mva();
    std::vector<BranchTerm> terms;
    for (const auto& br : net.branches()) {
        if (!config.is_closed(br.id)) continue;
        auto it = solution.branches.find(br.id);
        if (it == solution.branches.end()) continue;
        const BranchFlow& flow = it->second;
        const double p = flow.p_send / base;
        const double q = flow.q_send / base;
        const double v = solution.buses.at(flow.sending_bus).v_mag;
        const double term_pu = br.r * (p * p + q * q) / (v * v);
        terms.push_back({br.id, term_pu * base * net.delta_t_hours()});
    }
    return terms;
}

namespace {

ConstraintCheck check_voltages(const NetworkCase& net, const PowerFlowSolution& solution) {
    ConstraintCheck check{constraint_names::voltage_limits, true, {}};
    std::ostringstream os;
    for (const auto& [id, state] : solution.buses) {
        const Bus& bus = net.bus(id);
        if (state.v_mag < bus.v_min || state.v_mag > bus.v_max) {
            check.passed = false;
            os << "bus " << id << " at " << state.v_mag << " pu outside [" << bus.v_min << ", " << bus.v_max
               << "]; ";
        }
    }
    check.detail = check.passed ? "all bus voltages within limits" : os.str();
    return check;
}

ConstraintCheck check_branch_ratings(const NetworkCase& net, const PowerFlowSolution& solution) {
    ConstraintCheck check{constraint_names::current_limits, true, {}};
    std::ostringstream os;
    for (const auto& [id, flow] : solution.branches) {
        const Branch& br = net.branch(id);
        if (!br.mva_limit) continue;
        const double s = std::max(std::hypot(flow.p_send, flow.q_send), std::hypot(flow.p_recv, flow.q_recv));
        if (s > *br.mva_limit) {
            check.passed = false;
            os << "branch " << id << " carries " << s << " MVA over rating " << *br.mva_limit << "; ";
        }
    }
    check.detail = check.passed ? "all branch flows within ratings" : os.str();
    return check;
}

ConstraintCheck check_feeders(const NetworkCase& net, const PowerFlowSolution& solution) {
    ConstraintCheck check{constraint_names::feeder_overload, true, {}};
    std::ostringstream os;
    for (const auto& island : solution.islands) {
        const Bus& root = net.bus(island.root);
        const BusState& state = solution.buses.at(island.root);
        const double p_out = state.p_injection + root.p_load;
        const double q_out = state.q_injection + root.q_load;
        if (root.p_max && p_out > *root.p_max) {
            check.passed = false;
            os << "feeder " << root.id << " supplies " << p_out << " MW over " << *root.p_max << "; ";
        }
        if (root.q_max && q_out > *root.q_max) {
            check.passed = false;
            os << "feeder " << root.id << " supplies " << q_out << " MVAr over " << *root.q_max << "; ";
        }
        if (root.q_min && q_out < *root.q_min) {
            check.passed = false;
            os << "feeder " << root.id << " absorbs " << q_out << " MVAr below " << *root.q_min << "; ";
        }
    }
    check.detail = check.passed ? "all feeders within capacity" : os.str();
    return check;
}

}  // namespace

ObjectiveReport evaluate_fo(const NetworkCase& net, const Configuration& config, const PowerFlowSolution& solution) {
    if (!is_radial(net, config)) throw NotRadial("objective requires a radial configuration");
    if (!solution.converged) {
        int root = 0;
        for (const auto& s : solution.islands)
            if (!s.converged) root = s.root;
        throw NotConverged(root, "objective requires a converged power flow");
    }

    ObjectiveReport report;
    report.per_branch_terms = loss_terms(net, config, solution);
    for (const auto& t : report.per_branch_terms) report.fo_value += t.value;

    report.constraints.push_back({constraint_names::radiality, true, "closed branches form one tree per feeder"});
    report.constraints.push_back(check_feeders(net, solution));
    report.constraints.push_back(check_voltages(net, solution));
    report.constraints.push_back(check_branch_ratings(net, solution));
    report.feasible = std::all_of(report.constraints.begin(), report.constraints.end(),
                                  [](const ConstraintCheck& c) { return c.passed; });
    return report;
}

std::weak_ordering compare(const ObjectiveReport& a, const Configuration& config_a,
                           const ObjectiveReport& b, const Configuration& config_b,
                           const Configuration& incumbent) {
    if (a.feasible != b.feasible) return a.feasible ? std::weak_ordering::less : std::weak_ordering::greater;
    if (a.fo_value < b.fo_value) return std::weak_ordering::less;
    if (b.fo_value < a.fo_value) return std::weak_ordering::greater;
    const auto changes_a = config_a.distance(incumbent);
    const auto changes_b = config_b.distance(incumbent);
    if (changes_a != changes_b) return changes_a <=> changes_b;
    const auto open_a = config_a.open_branches();
    const auto open_b = config_b.open_branches();
    if (open_a < open_b) return std::weak_ordering::less;
    if (open_b < open_a) return std::weak_ordering::greater;
    return std::weak_ordering::equivalent;
}

}  // namespace gridreconf
