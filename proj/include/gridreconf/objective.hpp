#pragma once

#include <compare>
#include <string>
#include <vector>

#include "gridreconf/case_model.hpp"
#include "gridreconf/powerflow.hpp"

namespace gridreconf {

namespace constraint_names {
inline constexpr const char* radiality = "radiality";
inline constexpr const char* feeder_overload = "feeder_overload";
inline constexpr const char* voltage_limits = "voltage_limits";
inline constexpr const char* current_limits = "current_limits";
}  // namespace constraint_names

struct ConstraintCheck {
    std::string name;
    bool passed = true;
    std::string detail;

    bool operator==(const ConstraintCheck&) const = default;
};

struct BranchTerm {
    int branch_id = 0;
    double value = 0.0;  // MWh

    bool operator==(const BranchTerm&) const = default;
};

struct ObjectiveReport {
    double fo_value = 0.0;  // MWh over delta_t
    std::vector<BranchTerm> per_branch_terms;
    std::vector<ConstraintCheck> constraints;
    bool feasible = false;

    const ConstraintCheck* constraint(const std::string& name) const;
    bool operator==(const ObjectiveReport&) const = default;
};

/// Switched loss terms r (P^2 + Q^2) / v^2 * dt over the closed branches, using
/// sending-end quantities from `solution`. No radiality requirement.
std::vector<BranchTerm> loss_terms(const NetworkCase& net, const Configuration& config,
                                   const PowerFlowSolution& solution);

/// Objective value plus the operating constraints. Throws NotRadial and NotConverged.
ObjectiveReport evaluate_fo(const NetworkCase& net, const Configuration& config,
                            const PowerFlowSolution& solution);

/// Orders candidates: feasible first, then lower objective, then fewer switch
/// changes from `incumbent`, then lexicographically smaller open-branch list.
std::weak_ordering compare(const ObjectiveReport& a, const Configuration& config_a,
                           const ObjectiveReport& b, const Configuration& config_b,
                           const Configuration& incumbent);

}  // namespace gridreconf
