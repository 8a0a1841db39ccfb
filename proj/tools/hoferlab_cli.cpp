// Command line front end: run scenario files or built-in suites and emit
// one report record per experiment.
//
// Exit codes: 0 all records ok, 1 at least one fail/error record,
// 2 unusable input (parse error, unknown suite, bad flags).

#include "hoferlab/suites.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <string>
#include <vector>

namespace {

struct OutputConfig {
    std::string out_path;
    std::string format = "jsonl";
    std::string timings = "real";
};

void add_run_options(CLI::App* cmd, hoferlab::RunOptions* opts, OutputConfig* out) {
    cmd->add_option("--seed", opts->seed, "Base seed for sampled checks");
    cmd->add_option("--grid", opts->grid_resolution, "Spatial grid resolution override");
    cmd->add_option("--nodes", opts->simpson_nodes, "Time quadrature node override (odd)");
    cmd->add_option("--tol", opts->tol, "Tolerance override for pass/fail checks");
    cmd->add_option("--jobs", opts->jobs, "Worker thread count (0: hardware default)");
    cmd->add_option("--out", out->out_path, "Report file path (default: stdout)");
    cmd->add_option("--format", out->format, "Report format")
        ->check(CLI::IsMember({"jsonl", "csv", "both"}));
    cmd->add_option("--timings", out->timings, "Report timings as measured or zeroed")
        ->check(CLI::IsMember({"real", "zero"}));
}

int emit(const std::vector<hoferlab::ReportRecord>& records, const OutputConfig& out) {
    hoferlab::ReportFormat format = out.format == "csv"    ? hoferlab::ReportFormat::Csv
                                    : out.format == "both" ? hoferlab::ReportFormat::Both
                                                           : hoferlab::ReportFormat::Jsonl;
    hoferlab::TimingsMode timings =
        out.timings == "zero" ? hoferlab::TimingsMode::Zero : hoferlab::TimingsMode::Real;
    hoferlab::write_reports(records, out.out_path, format, timings);
    for (const auto& r : records)
        if (r.status != "ok") return 1;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hoferlab: Hofer geometry experiments on Poisson manifolds"};
    app.require_subcommand(1);

    hoferlab::RunOptions opts;
    OutputConfig out;

    std::string scenario_path;
    CLI::App* run = app.add_subcommand("run", "Run a scenario file");
    run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    add_run_options(run, &opts, &out);

    std::string suite_name;
    CLI::App* suite = app.add_subcommand("suite", "Run a built-in experiment suite");
    suite->add_option("name", suite_name, "Suite name: axioms, flows, groupoid or energy")
        ->required();
    add_run_options(suite, &opts, &out);

    CLI::App* list_structures =
        app.add_subcommand("list-structures", "List built-in Poisson structures");
    CLI::App* list_families =
        app.add_subcommand("list-families", "List Hamiltonian families and parameters");

    std::string describe_path;
    CLI::App* describe = app.add_subcommand("describe", "Summarize a scenario file");
    describe->add_option("scenario", describe_path, "Scenario JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return emit(hoferlab::run_scenario_file(scenario_path, opts), out);
        if (suite->parsed()) return emit(hoferlab::run_suite(suite_name, opts), out);
        if (list_structures->parsed()) {
            for (const auto& label : hoferlab::builtin_structure_labels())
                std::printf("%s\n", label.c_str());
            std::printf("custom: {dim, entries: [{i, j, expr}], casimirs?, chart?}\n");
            return 0;
        }
        if (list_families->parsed()) {
            for (const auto& name : hoferlab::hamiltonian_family_names())
                std::printf("%s\n", hoferlab::family_signature(name).c_str());
            return 0;
        }
        if (describe->parsed()) {
            std::printf("%s", hoferlab::describe_scenario_file(describe_path).c_str());
            return 0;
        }
    } catch (const hoferlab::ScenarioParseError& e) {
        std::fprintf(stderr, "parse error (line %d, column %d): %s\n", e.line, e.column,
                     e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
