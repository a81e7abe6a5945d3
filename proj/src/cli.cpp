#include "gridreconf/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "gridreconf/branch_exchange.hpp"
#include "gridreconf/case_io.hpp"

namespace gridreconf::cli {

namespace {

struct CaseArgs {
    std::string path;
    std::string format;
    std::vector<int> roots;
    std::optional<double> v_min;
    std::optional<double> v_max;
};

struct SolverArgs {
    std::string solver = "nr";
    std::optional<double> tolerance;
    std::optional<int> max_iter;
};

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void add_case_args(CLI::App* cmd, CaseArgs& args) {
    cmd->add_option("case", args.path, "Case file (.cdf/.txt for IEEE CDF, .json for native)")->required();
    cmd->add_option("--format", args.format, "Override format detection: cdf | json");
    cmd->add_option("--roots", args.roots, "Feeder bus ids, comma separated")->delimiter(',');
    cmd->add_option("--v-min", args.v_min, "Lower voltage bound (pu) for buses the file leaves unbounded");
    cmd->add_option("--v-max", args.v_max, "Upper voltage bound (pu) for buses the file leaves unbounded");
}

void add_solver_args(CLI::App* cmd, SolverArgs& args) {
    cmd->add_option("--solver", args.solver, "Power-flow method: nr | gs")
        ->check(CLI::IsMember({"nr", "gs"}));
    cmd->add_option("--tolerance", args.tolerance, "Per-unit mismatch tolerance");
    cmd->add_option("--max-iter", args.max_iter, "Power-flow iteration limit");
}

SolverOptions solver_options(const SolverArgs& args) {
    SolverOptions options;
    options.method = args.solver == "gs" ? SolverMethod::GaussSeidel : SolverMethod::NewtonRaphson;
    if (args.tolerance) options.tolerance = *args.tolerance;
    options.max_iterations = args.max_iter;
    try {
        check_options(options);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    return options;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path);
    out << text;
}

NetworkCase load_case(const CaseArgs& args, std::optional<double> delta_t = std::nullopt) {
    std::optional<CaseFormat> format =
        args.format.empty() ? detect_format(args.path) : format_from_name(args.format);
    if (!format) throw UsageError("cannot determine case format of " + args.path + "; use --format");
    ParseOptions options;
    options.roots = args.roots;
    options.delta_t_hours = delta_t;
    if (args.v_min) options.default_v_min = *args.v_min;
    if (args.v_max) options.default_v_max = *args.v_max;
    return parse_case(read_file(args.path), *format, options);
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

int cmd_validate(const CaseArgs& args, std::ostream& out) {
    try {
        load_case(args);
    } catch (const ValidationError& e) {
        out << format_report(e.report());
        return exit_failed;
    }
    out << "valid\n";
    return exit_ok;
}

int cmd_powerflow(const CaseArgs& args, const SolverArgs& solver_args, const std::vector<int>& open_ids,
                  std::ostream& out, std::ostream& err) {
    const NetworkCase net = load_case(args);
    const SolverOptions options = solver_options(solver_args);
    for (int id : open_ids)
        if (!net.has_branch(id)) throw UsageError("--open names unknown branch " + std::to_string(id));
    const Configuration config = Configuration::with_open(net, open_ids);
    const PowerFlowSolution sol = is_radial(net, config) ? solve_all_islands(net, config, options)
                                                          : solve_network(net, config, options);

    out << std::fixed;
    out << "bus      |V| pu   angle deg      P MW    Q MVAr\n";
    for (const auto& [id, b] : sol.buses) {
        out << std::setw(3) << id << "  " << std::setw(10) << std::setprecision(5) << b.v_mag << std::setw(12)
            << std::setprecision(4) << b.v_angle * 180.0 / 3.14159265358979323846 << std::setw(10)
            << std::setprecision(3) << b.p_injection << std::setw(10) << b.q_injection << '\n';
    }
    out << "\nbranch  send  recv    P send    Q send    P recv    Q recv   loss MW\n";
    for (const auto& [id, f] : sol.branches) {
        out << std::setw(6) << id << std::setw(6) << f.sending_bus << std::setw(6) << f.receiving_bus
            << std::setprecision(3) << std::setw(10) << f.p_send << std::setw(10) << f.q_send << std::setw(10)
            << f.p_recv << std::setw(10) << f.q_recv << std::setw(10) << std::setprecision(4) << f.loss_mw()
            << '\n';
    }
    out << "\nislands: " << sol.islands.size() << "  iterations: " << sol.iterations
        << "  converged: " << (sol.converged ? "yes" : "no") << '\n';
    out << "total loss MW: " << std::setprecision(4) << sol.total_loss_mw << '\n';
    if (!sol.converged) {
        err << "power flow did not converge (max mismatch " << sol.max_mismatch << " pu)\n";
        return exit_failed;
    }
    return exit_ok;
}

struct ReconfigureArgs {
    std::optional<double> delta_t;
    bool no_surrogate = false;
    std::optional<double> prune;
    int max_passes = 20;
    std::string out_path;
    std::string trace_path;
    std::string model_in;
    std::string model_out;
    bool stable = false;
};

int cmd_reconfigure(const CaseArgs& args, const SolverArgs& solver_args, const ReconfigureArgs& rc,
                    std::ostream& out, std::ostream& err) {
    if (rc.delta_t && !(*rc.delta_t > 0.0)) throw UsageError("--delta-t must be positive");
    const NetworkCase net = load_case(args, rc.delta_t);

    SearchOptions options;
    options.solver = solver_options(solver_args);
    options.max_passes = rc.max_passes;
    options.use_surrogate = !rc.no_surrogate;
    if (rc.prune) {
        options.surrogate_mode = SurrogateMode::Prune;
        options.prune_threshold = *rc.prune;
    }
    try {
        check_options(options);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }

    std::optional<LinearModel> prior;
    if (!rc.model_in.empty()) prior = model_from_json(read_file(rc.model_in));

    PipelineResult result;
    try {
        result = reconfigure(net, options, prior ? &*prior : nullptr);
    } catch (const NotConverged& e) {
        err << "power flow failed: " << e.what() << '\n';
        return exit_failed;
    } catch (const InitialInfeasible& e) {
        err << e.what() << '\n';
        return exit_failed;
    }

    const auto& search = result.search;
    ReportInput input{net, search.config, search.solution, search.objective, search.trace, search.initial_fo,
                      rc.stable ? std::string{} : utc_timestamp()};
    const std::string report = write_report(input);
    if (rc.out_path.empty()) {
        out << report;
    } else {
        write_file(rc.out_path, report);
    }
    if (!rc.trace_path.empty()) write_file(rc.trace_path, write_trace(search.trace));
    if (!rc.model_out.empty()) write_file(rc.model_out, model_to_json(search.model));

    if (!search.objective.feasible) {
        err << "final configuration violates operating constraints\n";
        return exit_failed;
    }
    return exit_ok;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Radial distribution network reconfiguration for loss minimisation", "gridreconf"};
    app.require_subcommand(1);

    CaseArgs validate_args, pf_args, rc_args;
    SolverArgs pf_solver, rc_solver;
    std::vector<int> open_ids;
    ReconfigureArgs rc;

    auto* validate = app.add_subcommand("validate", "Check a case file and list every violation");
    add_case_args(validate, validate_args);

    auto* powerflow = app.add_subcommand("powerflow", "Solve the power flow and print a loss table");
    add_case_args(powerflow, pf_args);
    add_solver_args(powerflow, pf_solver);
    powerflow->add_option("--open", open_ids, "Branch ids to open (default: all closed)")->delimiter(',');

    auto* reconf = app.add_subcommand("reconfigure", "Build a radial plan and improve it by branch exchange");
    add_case_args(reconf, rc_args);
    add_solver_args(reconf, rc_solver);
    reconf->add_option("--delta-t", rc.delta_t, "Interval length in hours (default 1)");
    reconf->add_flag("--no-surrogate", rc.no_surrogate, "Disable the regression surrogate");
    reconf->add_option("--surrogate-prune", rc.prune, "Skip candidates predicted worse than the incumbent by this many MWh");
    reconf->add_option("--max-passes", rc.max_passes, "Search pass limit");
    reconf->add_option("--out", rc.out_path, "Write the JSON report here instead of stdout");
    reconf->add_option("--trace", rc.trace_path, "Write the move trace as JSON");
    reconf->add_option("--model-in", rc.model_in, "Seed the surrogate from a model JSON file");
    reconf->add_option("--model-out", rc.model_out, "Save the fitted surrogate as JSON");
    reconf->add_flag("--stable", rc.stable, "Omit the timestamp so repeated runs are byte-identical");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n\n" << app.help();
        return exit_usage;
    }

    try {
        if (*validate) return cmd_validate(validate_args, out);
        if (*powerflow) return cmd_powerflow(pf_args, pf_solver, open_ids, out, err);
        return cmd_reconfigure(rc_args, rc_solver, rc, out, err);
    } catch (const ValidationError& e) {
        err << e.what();
        return exit_failed;
    } catch (const ParseError& e) {
        err << "parse error: " << e.what() << '\n';
        return exit_usage;
    } catch (const UsageError& e) {
        err << e.what() << '\n';
        return exit_usage;
    } catch (const Error& e) {
        err << e.what() << '\n';
        return exit_failed;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("gridreconf");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace gridreconf::cli
