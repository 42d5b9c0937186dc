#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "bench/suite.hpp"

namespace chatvis::bench {

enum class ReportFormat { Markdown, Csv, Json };

std::string render_report(const BenchReport& report, ReportFormat format);

// Inverse of the json rendering.
BenchReport report_from_json(std::string_view json_text);

// Writes report.md, report.csv and report.json into dir.
void write_reports(const BenchReport& report, const std::filesystem::path& dir);

}  // namespace chatvis::bench
