#include "hoferlab/report.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace hoferlab {

namespace {

using nlohmann::json;

json encode_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string swap_extension(const std::string& path, const std::string& ext) {
    auto slash = path.find_last_of('/');
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return path + ext;
    return path.substr(0, dot) + ext;
}

}  // namespace

std::string to_jsonl(const ReportRecord& r, TimingsMode timings) {
    json j;  // nlohmann objects keep keys sorted, which pins the byte layout
    j["schema_version"] = r.schema_version;
    j["scenario_id"] = r.scenario_id;
    j["op"] = r.op;
    j["status"] = r.status;
    j["value"] = r.value ? encode_number(*r.value) : json(nullptr);
    j["lower"] = r.lower ? encode_number(*r.lower) : json(nullptr);
    j["upper"] = r.upper ? encode_number(*r.upper) : json(nullptr);
    json params = json::array();
    for (double p : r.witness_params) params.push_back(encode_number(p));
    j["witness_params"] = params;
    j["margin"] = r.margin ? encode_number(*r.margin) : json(nullptr);
    j["grid"] = r.grid;
    j["runtime_ms"] = timings == TimingsMode::Zero ? 0.0 : r.runtime_ms;
    j["diagnostics"] = r.diagnostics;
    return j.dump();
}

std::string csv_header() {
    return "schema_version,scenario_id,op,status,value,lower,upper,witness_params,margin,grid,"
           "runtime_ms,diagnostics";
}

std::string to_csv_row(const ReportRecord& r, TimingsMode timings) {
    std::string row;
    row += std::to_string(r.schema_version);
    row += ',' + csv_escape(r.scenario_id);
    row += ',' + csv_escape(r.op);
    row += ',' + csv_escape(r.status);
    row += ',' + (r.value ? format_number(*r.value) : std::string());
    row += ',' + (r.lower ? format_number(*r.lower) : std::string());
    row += ',' + (r.upper ? format_number(*r.upper) : std::string());
    std::string params;
    for (size_t i = 0; i < r.witness_params.size(); ++i) {
        if (i) params += ';';
        params += format_number(r.witness_params[i]);
    }
    row += ',' + csv_escape(params);
    row += ',' + (r.margin ? format_number(*r.margin) : std::string());
    row += ',' + csv_escape(r.grid);
    row += ',' + format_number(timings == TimingsMode::Zero ? 0.0 : r.runtime_ms);
    row += ',' + csv_escape(r.diagnostics);
    return row;
}

void write_reports(const std::vector<ReportRecord>& records, const std::string& out_path,
                   ReportFormat format, TimingsMode timings) {
    if (out_path.empty()) {
        for (const auto& r : records) std::cout << to_jsonl(r, timings) << '\n';
        return;
    }
    auto write_file = [&](const std::string& path, bool csv) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open output file: " + path);
        if (csv) {
            out << csv_header() << '\n';
            for (const auto& r : records) out << to_csv_row(r, timings) << '\n';
        } else {
            for (const auto& r : records) out << to_jsonl(r, timings) << '\n';
        }
    };
    switch (format) {
        case ReportFormat::Jsonl:
            write_file(out_path, false);
            break;
        case ReportFormat::Csv:
            write_file(out_path, true);
            break;
        case ReportFormat::Both:
            write_file(swap_extension(out_path, ".jsonl"), false);
            write_file(swap_extension(out_path, ".csv"), true);
            break;
    }
}

}  // namespace hoferlab
