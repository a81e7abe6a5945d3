#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gridreconf/case_model.hpp"

namespace gridreconf {

struct ObjectiveReport;
struct PowerFlowSolution;
struct SearchTrace;

enum class CaseFormat { IeeeCdf, NativeJson };

/// .cdf / .txt map to IEEE CDF, .json to the native format.
std::optional<CaseFormat> detect_format(std::string_view path);
std::optional<CaseFormat> format_from_name(std::string_view name);

struct ParseOptions {
    // Feeder buses. Empty keeps what the file declares (CDF: swing buses).
    std::vector<int> roots;
    std::optional<double> delta_t_hours;
    // Voltage band given to buses when the file has none.
    double default_v_min = 0.85;
    double default_v_max = 1.15;
};

/// Parses and validates a case. Declared roots become Feeder buses.
/// Throws ParseError on malformed text and ValidationError on invariant violations.
NetworkCase parse_case(std::string_view text, CaseFormat format, const ParseOptions& options = {});

std::string write_native(const NetworkCase& net);

/// Everything needed for a run report. `initial_fo` is the objective of the
/// starting configuration when known.
struct ReportInput {
    const NetworkCase& net;
    const Configuration& config;
    const PowerFlowSolution& solution;
    const ObjectiveReport& objective;
    const SearchTrace& trace;
    std::optional<double> initial_fo;
    // ISO-8601 timestamp; omitted from the output when empty.
    std::string generated_at;
};

/// Deterministic JSON report (2-space indent, keys in fixed order).
std::string write_report(const ReportInput& input);

/// Switch states recorded in a report produced by write_report.
Configuration read_report_states(std::string_view report_json);

std::string write_trace(const SearchTrace& trace);

}  // namespace gridreconf
