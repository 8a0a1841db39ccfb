#pragma once

#include "hoferlab/scenario.hpp"

namespace hoferlab {

// Curated experiment batteries, one per module boundary.  Each suite is a
// fixed scenario evaluated through the same dispatcher as user files, so a
// suite run is reproducible from its name and the run options alone.
std::vector<std::string> suite_names();

std::vector<ReportRecord> run_suite(const std::string& name, const RunOptions& opts);

}  // namespace hoferlab
