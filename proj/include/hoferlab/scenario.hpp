#pragma once

#include "hoferlab/groupoid.hpp"
#include "hoferlab/report.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hoferlab {

struct RunOptions {
    uint64_t seed = 0;
    int grid_resolution = 0;  // 0: per-op default
    int simpson_nodes = 0;    // 0: per-op default
    double tol = 0.0;         // 0: per-op default
    int jobs = 0;             // 0: default_jobs()
    TimingsMode timings = TimingsMode::Real;
};

// Scenario files that do not parse raise this (CLI exit code 2); the line and
// column point at the offending byte.
struct ScenarioParseError : std::runtime_error {
    int line = 0, column = 0;
    ScenarioParseError(const std::string& msg, int l, int c)
        : std::runtime_error(msg), line(l), column(c) {}
};

// Runs every experiment of a scenario file in file order, one record each.
// Experiment failures land in the records as status "fail" / "error"; only
// unusable input throws.
std::vector<ReportRecord> run_scenario_file(const std::string& path, const RunOptions& opts);

// Same contract, scenario given as JSON text.  `origin` labels parse errors.
std::vector<ReportRecord> run_scenario_text(const std::string& text, const RunOptions& opts,
                                            const std::string& origin = "<inline>");

// Parses and summarizes a scenario without running it.
std::string describe_scenario_file(const std::string& path);

// Registry listings for the CLI.
std::vector<std::string> builtin_structure_labels();
std::vector<std::string> hamiltonian_family_names();
std::string family_signature(const std::string& name);
std::vector<std::string> scenario_op_names();

}  // namespace hoferlab
