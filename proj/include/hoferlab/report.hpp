#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hoferlab {

// One experiment, one record.  `status` is "ok" when the computation ran and
// any asserted property held, "fail" when a property was violated, and
// "error" when the computation threw; diagnostics carries the details.
struct ReportRecord {
    int schema_version = 1;
    std::string scenario_id;
    std::string op;
    std::string status = "ok";
    std::optional<double> value;
    std::optional<double> lower;
    std::optional<double> upper;
    std::vector<double> witness_params;
    std::optional<double> margin;
    std::string grid;  // resolution / node / tolerance summary
    double runtime_ms = 0.0;
    std::string diagnostics;
};

enum class TimingsMode { Real, Zero };
enum class ReportFormat { Jsonl, Csv, Both };

// One JSON object per line, keys sorted; non-finite numbers are encoded as
// the strings "inf", "-inf", "nan" so reruns stay byte-comparable.
std::string to_jsonl(const ReportRecord& r, TimingsMode timings);

std::string csv_header();
std::string to_csv_row(const ReportRecord& r, TimingsMode timings);

// Writes to `out_path`; for Both the second file swaps the extension.  An
// empty path prints JSONL to stdout.
void write_reports(const std::vector<ReportRecord>& records, const std::string& out_path,
                   ReportFormat format, TimingsMode timings);

}  // namespace hoferlab
