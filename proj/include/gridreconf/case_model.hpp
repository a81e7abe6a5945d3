#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "gridreconf/error.hpp"

namespace gridreconf {

enum class BusKind {
    Feeder,                // slack of its island
    Generator,             // PV
    Load,                  // PQ
    SynchronousCondenser,  // PV with zero active output
};

std::string to_string(BusKind kind);
std::optional<BusKind> bus_kind_from_string(const std::string& text);

/// Bus powers are held in MW / MVAr. Voltages are per-unit.
struct Bus {
    int id = 0;
    BusKind kind = BusKind::Load;
    double p_load = 0.0;
    double q_load = 0.0;
    double p_gen = 0.0;
    double q_gen = 0.0;
    std::optional<double> v_setpoint;
    double v_min = 0.9;
    double v_max = 1.1;
    // Reactive limits of the unit at this bus; absent means unlimited.
    std::optional<double> q_min;
    std::optional<double> q_max;
    // Active-power capacity of a feeder; absent means unlimited.
    std::optional<double> p_max;
    // Shunt admittance to ground, per-unit.
    double g_shunt = 0.0;
    double b_shunt = 0.0;

    bool operator==(const Bus&) const = default;
};

enum class SwitchState : std::uint8_t { Open = 0, Closed = 1 };

/// Series impedance and line charging in per-unit on the case base.
struct Branch {
    int id = 0;
    int from_bus = 0;
    int to_bus = 0;
    double r = 0.0;
    double x = 0.0;
    double b_shunt = 0.0;
    // Off-nominal turns ratio on the from side; 1.0 for lines.
    double tap = 1.0;
    std::optional<double> mva_limit;
    bool switchable = true;
    SwitchState default_state = SwitchState::Closed;

    bool operator==(const Branch&) const = default;
};

/// Immutable bus/branch description of a grid.
class NetworkCase {
public:
    NetworkCase() = default;
    NetworkCase(double base_mva, std::vector<Bus> buses, std::vector<Branch> branches,
                std::vector<int> roots, double delta_t_hours = 1.0);

    double base_mva() const noexcept { return base_mva_; }
    double delta_t_hours() const noexcept { return delta_t_hours_; }
    const std::vector<Bus>& buses() const noexcept { return buses_; }
    const std::vector<Branch>& branches() const noexcept { return branches_; }
    const std::vector<int>& roots() const noexcept { return roots_; }

    bool has_bus(int id) const { return bus_index_.contains(id); }
    bool has_branch(int id) const { return branch_index_.contains(id); }
    /// Throws std::out_of_range for unknown ids.
    const Bus& bus(int id) const;
    const Branch& branch(int id) const;
    std::size_t bus_position(int id) const;
    std::size_t branch_position(int id) const;
    bool is_root(int bus_id) const;

    /// Copy with a different interval length; everything else shared.
    NetworkCase with_delta_t(double hours) const;

    bool operator==(const NetworkCase& other) const;

private:
    double base_mva_ = 100.0;
    double delta_t_hours_ = 1.0;
    std::vector<Bus> buses_;
    std::vector<Branch> branches_;
    std::vector<int> roots_;
    std::unordered_map<int, std::size_t> bus_index_;
    std::unordered_map<int, std::size_t> branch_index_;
};

/// Switch-state vector keyed by branch id.
class Configuration {
public:
    Configuration() = default;
    explicit Configuration(std::map<int, SwitchState> states) : states_(std::move(states)) {}

    /// Every branch closed, including non-switchable ones.
    static Configuration all_closed(const NetworkCase& net);
    /// Each branch at its default state.
    static Configuration defaults(const NetworkCase& net);
    /// Everything closed except `open_ids`; non-switchable branches stay at their default.
    static Configuration with_open(const NetworkCase& net, const std::vector<int>& open_ids);

    SwitchState state(int branch_id) const;
    bool is_closed(int branch_id) const { return state(branch_id) == SwitchState::Closed; }
    void set(int branch_id, SwitchState s) { states_[branch_id] = s; }

    const std::map<int, SwitchState>& states() const noexcept { return states_; }
    std::vector<int> closed_branches() const;
    std::vector<int> open_branches() const;
    /// Number of branches whose state differs.
    std::size_t distance(const Configuration& other) const;

    bool covers(const NetworkCase& net) const;

    auto operator<=>(const Configuration&) const = default;

private:
    std::map<int, SwitchState> states_;
};

struct Violation {
    enum class Subject { Case, Bus, Branch };
    Subject subject = Subject::Case;
    int id = 0;
    std::string message;

    bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

std::string format_report(const ValidationReport& report);

class ValidationError : public Error {
public:
    explicit ValidationError(ValidationReport report);
    const ValidationReport& report() const noexcept { return report_; }

private:
    ValidationReport report_;
};

ValidationReport validate_case(const NetworkCase& net);

/// Closed branches form a spanning forest with exactly one root per tree.
bool is_radial(const NetworkCase& net, const Configuration& config);

struct Island {
    int root = 0;
    std::set<int> buses;
    std::set<int> branches;  // closed branches inside the island

    bool operator==(const Island&) const = default;
};

/// One island per root, in the case's root order. Throws NotRadial.
std::vector<Island> islands(const NetworkCase& net, const Configuration& config);

/// Connected components of the closed-branch graph, sorted by smallest bus id.
std::vector<std::set<int>> connected_components(const NetworkCase& net, const Configuration& config);

}  // namespace gridreconf
