#include "gridreconf/case_io.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include <json.hpp>

#include "gridreconf/branch_exchange.hpp"
#include "gridreconf/objective.hpp"
#include "gridreconf/powerflow.hpp"

namespace gridreconf {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string line(text.substr(start, end - start));
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(std::move(line));
        start = end + 1;
    }
    return lines;
}

std::vector<std::string> tokens(std::string_view s) {
    std::istringstream is{std::string(s)};
    std::vector<std::string> out;
    for (std::string t; is >> t;) out.push_back(t);
    return out;
}

double to_double(const std::string& text, int line, const char* field) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE || !std::isfinite(v))
        throw ParseError(line, field, "expected a number, got '" + text + "'");
    return v;
}

int to_int(const std::string& text, int line, const char* field) {
    errno = 0;
    char* end = nullptr;
    const long v = std::strtol(text.c_str(), &end, 10);
    if (text.empty() || end != text.c_str() + text.size() || errno == ERANGE)
        throw ParseError(line, field, "expected an integer, got '" + text + "'");
    return static_cast<int>(v);
}

bool starts_with_terminator(const std::string& line) {
    const std::string t = trim(line);
    return t.rfind("-999", 0) == 0 || t.rfind("-99", 0) == 0 || t.rfind("-9", 0) == 0;
}

struct CdfBus {
    Bus bus;
    int cdf_type = 0;
};

// Bus card: number in columns 1-4, name in 6-17, remaining fields whitespace separated
// from column 19 on: area, zone, type, V, angle, load MW, load MVAr, gen MW, gen MVAr,
// base kV, desired V, max, min, shunt G, shunt B [, remote bus].
CdfBus parse_cdf_bus(const std::string& line, int line_no, const ParseOptions& options) {
    static const char* fields[] = {"area",   "zone",   "type",   "final_voltage", "final_angle",
                                   "load_mw", "load_mvar", "gen_mw", "gen_mvar", "base_kv",
                                   "desired_voltage", "max_limit", "min_limit", "shunt_g", "shunt_b"};
    CdfBus out;
    out.bus.id = to_int(trim(line.substr(0, std::min<std::size_t>(4, line.size()))), line_no, "bus_number");
    if (line.size() <= 18) throw ParseError(line_no, "area", "bus card too short");
    const auto t = tokens(std::string_view(line).substr(18));
    if (t.size() < 15) throw ParseError(line_no, fields[t.size() < 15 ? t.size() : 14], "missing bus field");

    out.cdf_type = to_int(t[2], line_no, fields[2]);
    const double load_mw = to_double(t[5], line_no, fields[5]);
    const double load_mvar = to_double(t[6], line_no, fields[6]);
    const double gen_mw = to_double(t[7], line_no, fields[7]);
    const double gen_mvar = to_double(t[8], line_no, fields[8]);
    const double desired = to_double(t[10], line_no, fields[10]);
    const double max_limit = to_double(t[11], line_no, fields[11]);
    const double min_limit = to_double(t[12], line_no, fields[12]);
    Bus& bus = out.bus;
    bus.p_load = load_mw;
    bus.q_load = load_mvar;
    bus.p_gen = gen_mw;
    bus.q_gen = gen_mvar;
    bus.g_shunt = to_double(t[13], line_no, fields[13]);
    bus.b_shunt = to_double(t[14], line_no, fields[14]);
    bus.v_min = options.default_v_min;
    bus.v_max = options.default_v_max;

    switch (out.cdf_type) {
        case 3: bus.kind = BusKind::Feeder; break;
        case 2: bus.kind = gen_mw == 0.0 ? BusKind::SynchronousCondenser : BusKind::Generator; break;
        case 0:
        case 1: bus.kind = BusKind::Load; break;
        default: throw ParseError(line_no, fields[2], "unknown bus type " + t[2]);
    }
    if (bus.kind != BusKind::Load) {
        bus.v_setpoint = desired > 0.0 ? desired : to_double(t[3], line_no, fields[3]);
        // A 0/0 pair means no reactive limits were given.
        if (!(max_limit == 0.0 && min_limit == 0.0) && max_limit >= min_limit) {
            bus.q_max = max_limit;
            bus.q_min = min_limit;
        }
    }
    return out;
}

// Branch card, whitespace separated: tap bus, Z bus, area, zone, circuit, type, R, X, B,
// rating 1-3, control bus, side, turns ratio, ...
Branch parse_cdf_branch(const std::string& line, int line_no, int id) {
    static const char* fields[] = {"tap_bus", "z_bus",    "area",     "zone",     "circuit",
                                   "type",    "r",        "x",        "b",        "rating_1",
                                   "rating_2", "rating_3", "control_bus", "side", "turns_ratio"};
    const auto t = tokens(line);
    if (t.size() < 9) throw ParseError(line_no, fields[t.size()], "missing branch field");
    Branch br;
    br.id = id;
    br.from_bus = to_int(t[0], line_no, fields[0]);
    br.to_bus = to_int(t[1], line_no, fields[1]);
    br.r = to_double(t[6], line_no, fields[6]);
    br.x = to_double(t[7], line_no, fields[7]);
    br.b_shunt = to_double(t[8], line_no, fields[8]);
    if (t.size() > 9) {
        const double rating = to_double(t[9], line_no, fields[9]);
        if (rating > 0.0) br.mva_limit = rating;
    }
    if (t.size() > 14) {
        const double ratio = to_double(t[14], line_no, fields[14]);
        if (ratio > 0.0) br.tap = ratio;
    }
    return br;
}

NetworkCase parse_cdf(std::string_view text, const ParseOptions& options) {
    const auto lines = split_lines(text);
    if (trim(text).empty()) throw ParseError(1, "header", "empty input");

    const std::string& header = lines.front();
    double base_mva = 100.0;
    if (header.size() >= 37) {
        base_mva = to_double(trim(header.substr(31, 6)), 1, "base_mva");
    } else {
        throw ParseError(1, "base_mva", "title card too short to hold the MVA base");
    }

    std::vector<CdfBus> cdf_buses;
    std::vector<Branch> branches;
    enum class Section { None, Bus, Branch } section = Section::None;
    bool saw_bus = false, saw_branch = false;

    for (std::size_t i = 1; i < lines.size(); ++i) {
        const int line_no = static_cast<int>(i) + 1;
        const std::string& line = lines[i];
        const std::string upper_line = trim(line);
        if (section == Section::None) {
            if (upper_line.rfind("BUS DATA FOLLOWS", 0) == 0) {
                section = Section::Bus;
                saw_bus = true;
            } else if (upper_line.rfind("BRANCH DATA FOLLOWS", 0) == 0) {
                section = Section::Branch;
                saw_branch = true;
            } else if (upper_line.rfind("END OF DATA", 0) == 0) {
                break;
            }
            continue;
        }
        if (upper_line.empty()) continue;
        if (starts_with_terminator(line)) {
            section = Section::None;
            continue;
        }
        if (section == Section::Bus) {
            cdf_buses.push_back(parse_cdf_bus(line, line_no, options));
        } else {
            branches.push_back(parse_cdf_branch(line, line_no, static_cast<int>(branches.size()) + 1));
        }
    }
    if (!saw_bus) throw ParseError(static_cast<int>(lines.size()), "BUS DATA FOLLOWS", "section missing");
    if (!saw_branch) throw ParseError(static_cast<int>(lines.size()), "BRANCH DATA FOLLOWS", "section missing");

    std::vector<int> roots = options.roots;
    if (roots.empty())
        for (const auto& b : cdf_buses)
            if (b.cdf_type == 3) roots.push_back(b.bus.id);

    std::vector<Bus> buses;
    for (auto& b : cdf_buses) {
        // A swing bus that is not declared a root keeps regulating as a generator.
        if (b.bus.kind == BusKind::Feeder && std::find(roots.begin(), roots.end(), b.bus.id) == roots.end())
            b.bus.kind = b.bus.p_gen == 0.0 ? BusKind::SynchronousCondenser : BusKind::Generator;
        buses.push_back(b.bus);
    }
    return NetworkCase(base_mva, std::move(buses), std::move(branches), std::move(roots),
                       options.delta_t_hours.value_or(1.0));
}

template <typename T>
std::optional<T> optional_field(const nlohmann::json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

template <typename T>
T field_or(const nlohmann::json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    return it->get<T>();
}

int line_of_offset(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

NetworkCase parse_native(std::string_view text, const ParseOptions& options) {
    if (trim(text).empty()) throw ParseError(1, "document", "empty input");
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(line_of_offset(text, e.byte), "document", e.what());
    }

    std::string where = "base_mva";
    try {
        const double base_mva = j.at("base_mva").get<double>();
        where = "delta_t_hours";
        double delta_t = field_or(j, "delta_t_hours", 1.0);
        if (options.delta_t_hours) delta_t = *options.delta_t_hours;
        where = "roots";
        std::vector<int> roots = j.at("roots").get<std::vector<int>>();
        if (!options.roots.empty()) roots = options.roots;

        std::vector<Bus> buses;
        const auto& jb = j.at("buses");
        for (std::size_t i = 0; i < jb.size(); ++i) {
            where = "buses[" + std::to_string(i) + "]";
            const auto& b = jb.at(i);
            Bus bus;
            bus.id = b.at("id").get<int>();
            const auto kind_text = field_or<std::string>(b, "kind", "Load");
            auto kind = bus_kind_from_string(kind_text);
            if (!kind) throw ParseError(1, where + ".kind", "unknown bus kind '" + kind_text + "'");
            bus.kind = *kind;
            bus.p_load = field_or(b, "p_load", 0.0);
            bus.q_load = field_or(b, "q_load", 0.0);
            bus.p_gen = field_or(b, "p_gen", 0.0);
            bus.q_gen = field_or(b, "q_gen", 0.0);
            bus.v_setpoint = optional_field<double>(b, "v_setpoint");
            bus.v_min = field_or(b, "v_min", options.default_v_min);
            bus.v_max = field_or(b, "v_max", options.default_v_max);
            bus.q_min = optional_field<double>(b, "q_min");
            bus.q_max = optional_field<double>(b, "q_max");
            bus.p_max = optional_field<double>(b, "p_max");
            bus.g_shunt = field_or(b, "g_shunt", 0.0);
            bus.b_shunt = field_or(b, "b_shunt", 0.0);
            buses.push_back(bus);
        }

        std::vector<Branch> branches;
        const auto& jr = j.at("branches");
        for (std::size_t i = 0; i < jr.size(); ++i) {
            where = "branches[" + std::to_string(i) + "]";
            const auto& b = jr.at(i);
            Branch br;
            br.id = b.at("id").get<int>();
            br.from_bus = b.at("from_bus").get<int>();
            br.to_bus = b.at("to_bus").get<int>();
            br.r = field_or(b, "r", 0.0);
            br.x = field_or(b, "x", 0.0);
            br.b_shunt = field_or(b, "b_shunt", 0.0);
            br.tap = field_or(b, "tap", 1.0);
            br.mva_limit = optional_field<double>(b, "mva_limit");
            br.switchable = field_or(b, "switchable", true);
            const auto state = field_or<std::string>(b, "default_state", "Closed");
            if (state == "Closed") {
                br.default_state = SwitchState::Closed;
            } else if (state == "Open") {
                br.default_state = SwitchState::Open;
            } else {
                throw ParseError(1, where + ".default_state", "expected Closed or Open");
            }
            branches.push_back(br);
        }
        return NetworkCase(base_mva, std::move(buses), std::move(branches), std::move(roots), delta_t);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(1, where, e.what());
    }
}

void promote_roots(std::vector<Bus>& buses, const std::vector<int>& roots) {
    for (auto& bus : buses) {
        if (std::find(roots.begin(), roots.end(), bus.id) == roots.end()) continue;
        bus.kind = BusKind::Feeder;
        if (!bus.v_setpoint) bus.v_setpoint = 1.0;
    }
}

ordered_json nullable(std::optional<double> v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

}  // namespace

std::optional<CaseFormat> format_from_name(std::string_view name) {
    const auto n = lower(name);
    if (n == "cdf" || n == "ieee" || n == "ieee-cdf") return CaseFormat::IeeeCdf;
    if (n == "json" || n == "native") return CaseFormat::NativeJson;
    return std::nullopt;
}

std::optional<CaseFormat> detect_format(std::string_view path) {
    const auto dot = path.rfind('.');
    if (dot == std::string_view::npos) return std::nullopt;
    const auto ext = lower(path.substr(dot + 1));
    if (ext == "cdf" || ext == "txt") return CaseFormat::IeeeCdf;
    if (ext == "json") return CaseFormat::NativeJson;
    return std::nullopt;
}

NetworkCase parse_case(std::string_view text, CaseFormat format, const ParseOptions& options) {
    NetworkCase parsed = format == CaseFormat::IeeeCdf ? parse_cdf(text, options) : parse_native(text, options);
    std::vector<Bus> buses = parsed.buses();
    promote_roots(buses, parsed.roots());
    NetworkCase net(parsed.base_mva(), std::move(buses), parsed.branches(), parsed.roots(), parsed.delta_t_hours());
    auto report = validate_case(net);
    if (!report.empty()) throw ValidationError(std::move(report));
    return net;
}

std::string write_native(const NetworkCase& net) {
    ordered_json j;
    j["base_mva"] = net.base_mva();
    j["delta_t_hours"] = net.delta_t_hours();
    j["roots"] = net.roots();
    ordered_json buses = ordered_json::array();
    for (const auto& b : net.buses()) {
        ordered_json jb;
        jb["id"] = b.id;
        jb["kind"] = to_string(b.kind);
        jb["p_load"] = b.p_load;
        jb["q_load"] = b.q_load;
        jb["p_gen"] = b.p_gen;
        jb["q_gen"] = b.q_gen;
        jb["v_setpoint"] = nullable(b.v_setpoint);
        jb["v_min"] = b.v_min;
        jb["v_max"] = b.v_max;
        jb["q_min"] = nullable(b.q_min);
        jb["q_max"] = nullable(b.q_max);
        jb["p_max"] = nullable(b.p_max);
        jb["g_shunt"] = b.g_shunt;
        jb["b_shunt"] = b.b_shunt;
        buses.push_back(std::move(jb));
    }
    j["buses"] = std::move(buses);
    ordered_json branches = ordered_json::array();
    for (const auto& br : net.branches()) {
        ordered_json jb;
        jb["id"] = br.id;
        jb["from_bus"] = br.from_bus;
        jb["to_bus"] = br.to_bus;
        jb["r"] = br.r;
        jb["x"] = br.x;
        jb["b_shunt"] = br.b_shunt;
        jb["tap"] = br.tap;
        jb["mva_limit"] = nullable(br.mva_limit);
        jb["switchable"] = br.switchable;
        jb["default_state"] = br.default_state == SwitchState::Closed ? "Closed" : "Open";
        branches.push_back(std::move(jb));
    }
    j["branches"] = std::move(branches);
    return j.dump(2) + "\n";
}

namespace {

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json trace_json(const SearchTrace& trace) {
    ordered_json moves = ordered_json::array();
    for (const auto& m : trace.moves) {
        ordered_json jm;
        jm["close_branch"] = m.close_branch;
        jm["open_branch"] = m.open_branch;
        jm["fo_before"] = number_or_null(m.fo_before);
        jm["fo_after"] = number_or_null(m.fo_after);
        jm["accepted"] = m.accepted;
        jm["rejected_reason"] = m.rejected_reason ? ordered_json(to_string(*m.rejected_reason)) : ordered_json(nullptr);
        moves.push_back(std::move(jm));
    }
    ordered_json j;
    j["evaluations"] = trace.evaluations;
    j["surrogate_hits"] = trace.surrogate_hits;
    j["pruned"] = trace.pruned;
    j["passes"] = trace.passes;
    j["local_optimum"] = trace.local_optimum;
    j["moves"] = std::move(moves);
    ordered_json evaluated = ordered_json::array();
    for (const auto& e : trace.evaluated) {
        ordered_json je;
        je["open_branches"] = e.open_branches;
        je["converged"] = e.converged;
        je["feasible"] = e.feasible;
        je["fo_value"] = number_or_null(e.fo_value);
        je["total_loss_mw"] = number_or_null(e.total_loss_mw);
        evaluated.push_back(std::move(je));
    }
    j["evaluated"] = std::move(evaluated);
    return j;
}

}  // namespace

std::string write_report(const ReportInput& in) {
    ordered_json j;
    ordered_json meta_case;
    meta_case["base_mva"] = in.net.base_mva();
    meta_case["delta_t_hours"] = in.net.delta_t_hours();
    meta_case["bus_count"] = in.net.buses().size();
    meta_case["branch_count"] = in.net.branches().size();
    meta_case["roots"] = in.net.roots();
    j["case"] = std::move(meta_case);

    ordered_json states = ordered_json::object();
    for (const auto& [id, s] : in.config.states()) states[std::to_string(id)] = s == SwitchState::Closed ? "closed" : "open";
    j["switch_states"] = std::move(states);
    j["open_switches"] = in.config.open_branches();

    ordered_json islands = ordered_json::array();
    for (const auto& s : in.solution.islands) {
        ordered_json ji;
        ji["root"] = s.root;
        ji["buses"] = s.buses;
        ji["loss_mw"] = s.loss_mw;
        ji["converged"] = s.converged;
        ji["iterations"] = s.iterations;
        ji["limited_buses"] = s.limited_buses;
        islands.push_back(std::move(ji));
    }
    j["islands"] = std::move(islands);
    j["total_loss_mw"] = in.solution.total_loss_mw;

    ordered_json objective;
    objective["fo_value_mwh"] = in.objective.fo_value;
    if (in.initial_fo) objective["initial_fo_value_mwh"] = *in.initial_fo;
    objective["feasible"] = in.objective.feasible;
    ordered_json constraints = ordered_json::array();
    for (const auto& c : in.objective.constraints) {
        ordered_json jc;
        jc["name"] = c.name;
        jc["passed"] = c.passed;
        jc["detail"] = c.detail;
        constraints.push_back(std::move(jc));
    }
    objective["constraints"] = std::move(constraints);
    j["objective"] = std::move(objective);

    ordered_json search;
    search["moves"] = in.trace.moves.size();
    search["accepted_moves"] = in.trace.accepted_moves();
    search["evaluations"] = in.trace.evaluations;
    search["surrogate_hits"] = in.trace.surrogate_hits;
    search["passes"] = in.trace.passes;
    search["local_optimum"] = in.trace.local_optimum;
    j["search"] = std::move(search);

    ordered_json pf;
    pf["converged"] = in.solution.converged;
    pf["iterations"] = in.solution.iterations;
    ordered_json per_island = ordered_json::array();
    for (const auto& s : in.solution.islands) per_island.push_back(s.iterations);
    pf["island_iterations"] = std::move(per_island);
    pf["max_mismatch_pu"] = in.solution.max_mismatch;
    j["power_flow"] = std::move(pf);

    if (!in.generated_at.empty()) j["metadata"] = {{"generated_at", in.generated_at}};
    return j.dump(2) + "\n";
}

Configuration read_report_states(std::string_view report_json) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(report_json);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(line_of_offset(report_json, e.byte), "document", e.what());
    }
    auto it = j.find("switch_states");
    if (it == j.end() || !it->is_object()) throw ParseError(1, "switch_states", "missing switch_states object");
    std::map<int, SwitchState> states;
    for (const auto& [key, value] : it->items()) {
        const int id = to_int(key, 1, "switch_states");
        const auto text = value.get<std::string>();
        if (text != "closed" && text != "open") throw ParseError(1, "switch_states." + key, "expected open or closed");
        states[id] = text == "closed" ? SwitchState::Closed : SwitchState::Open;
    }
    return Configuration(std::move(states));
}

std::string write_trace(const SearchTrace& trace) { return trace_json(trace).dump(2) + "\n"; }

}  // namespace gridreconf
