#include "bench/report.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "common/error.hpp"
#include "common/text.hpp"

using nlohmann::json;

namespace chatvis::bench {

namespace {

std::string cell_or_na(const std::optional<double>& v, int decimals) {
    if (!v) return "n/a";
    if (std::isinf(*v)) return "inf";
    return text::fixed(*v, decimals);
}

std::string csv_number(const std::optional<double>& v) {
    if (!v) return "";
    if (std::isinf(*v)) return "inf";
    return text::fixed(*v, 6);
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string markdown_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out += ' ';
        else out += c;
    }
    return out;
}

json number_json(const std::optional<double>& v) {
    if (!v) return nullptr;
    if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
    return *v;
}

std::optional<double> number_from(const json& j) {
    if (j.is_null()) return std::nullopt;
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw Error(Errc::InvalidArgument, "unexpected number text '" + s + "'");
    }
    return j.get<double>();
}

json cell_json(const Cell& c) {
    return {{"mode", orchestrator::mode_name(c.mode)}, {"variant", variant_name(c.variant)}};
}

Cell cell_from(const json& j) {
    auto mode = orchestrator::parse_mode(j.at("mode").get<std::string>());
    auto variant = parse_variant(j.at("variant").get<std::string>());
    if (!mode || !variant) throw Error(Errc::InvalidArgument, "unknown mode or variant in report");
    return Cell{*mode, *variant};
}

std::string render_markdown(const BenchReport& r) {
    std::string out = "# Benchmark report\n\n";
    out += "Model: " + r.config.model + ". Tasks: " + std::to_string(r.config.task_count) +
           ". Max iterations: " + std::to_string(r.config.max_iterations) + ".\n";
    out += "Started " + r.started_at + ", finished " + r.finished_at + ".\n\n";
    out += "PSNR is shown with one decimal place; infinite per-task PSNR counts as 100 dB in means.\n\n";

    out += "## Summary\n\n";
    out += "| mode | variant | pass@1 ↑ | SSIM ↑ | PSNR ↑ | LPIPS ↓ |\n";
    out += "|---|---|---:|---:|---:|---:|\n";
    for (const auto& c : r.cells) {
        const auto& s = c.scores;
        out += "| " + std::string(orchestrator::mode_name(c.cell.mode)) + " | " +
               std::string(variant_name(c.cell.variant)) + " | " + text::fixed(s.pass_at_1, 1) + " | " +
               cell_or_na(s.mean_ssim, 2) + " | " + cell_or_na(s.mean_psnr, 1) + " | " +
               cell_or_na(s.mean_lpips, 2) + " |\n";
    }

    out += "\n## Scaled\n\n";
    out += "| mode | variant | scaled PSNR ↑ | scaled SSIM ↑ | scaled LPIPS ↓ |\n";
    out += "|---|---|---:|---:|---:|\n";
    for (const auto& c : r.cells) {
        const auto& s = c.scores;
        out += "| " + std::string(orchestrator::mode_name(c.cell.mode)) + " | " +
               std::string(variant_name(c.cell.variant)) + " | " + cell_or_na(s.scaled_psnr, 3) + " | " +
               cell_or_na(s.scaled_ssim, 3) + " | " + cell_or_na(s.scaled_lpips, 3) + " |\n";
    }

    out += "\n## Tasks\n\n";
    out += "| mode | variant | task | category | status | attempts | SSIM | PSNR | LPIPS | notes |\n";
    out += "|---|---|---|---|---|---:|---:|---:|---:|---|\n";
    for (const auto& row : r.rows) {
        out += "| " + std::string(orchestrator::mode_name(row.cell.mode)) + " | " +
               std::string(variant_name(row.cell.variant)) + " | " + markdown_escape(row.task_id) + " | " +
               std::string(category_name(row.category)) + " | " + row.status + " | " +
               std::to_string(row.attempts) + " | " + cell_or_na(row.score.ssim, 4) + " | " +
               cell_or_na(row.score.psnr, 1) + " | " + cell_or_na(row.score.lpips, 4) + " | " +
               markdown_escape(text::join(row.notes, "; ")) + " |\n";
    }
    return out;
}

std::string render_csv(const BenchReport& r) {
    std::string out =
        "kind,mode,variant,task_id,category,status,attempts,pass_at_1,ssim,psnr,lpips,"
        "scaled_psnr,scaled_ssim,scaled_lpips\n";
    for (const auto& c : r.cells) {
        const auto& s = c.scores;
        out += "cell," + std::string(orchestrator::mode_name(c.cell.mode)) + "," +
               std::string(variant_name(c.cell.variant)) + ",,,," + std::to_string(s.tasks) + "," +
               text::fixed(s.pass_at_1, 6) + "," + csv_number(s.mean_ssim) + "," + csv_number(s.mean_psnr) + "," +
               csv_number(s.mean_lpips) + "," + csv_number(s.scaled_psnr) + "," + csv_number(s.scaled_ssim) + "," +
               csv_number(s.scaled_lpips) + "\n";
    }
    for (const auto& row : r.rows) {
        out += "task," + std::string(orchestrator::mode_name(row.cell.mode)) + "," +
               std::string(variant_name(row.cell.variant)) + "," + csv_field(row.task_id) + "," +
               std::string(category_name(row.category)) + "," + row.status + "," + std::to_string(row.attempts) +
               "," + (row.score.passed ? "100.000000" : "0.000000") + "," + csv_number(row.score.ssim) + "," +
               csv_number(row.score.psnr) + "," + csv_number(row.score.lpips) + ",,,\n";
    }
    return out;
}

json render_json(const BenchReport& r) {
    json j;
    j["config"] = {{"modes", r.config.modes},
                   {"variants", r.config.variants},
                   {"max_iterations", r.config.max_iterations},
                   {"model", r.config.model},
                   {"task_count", r.config.task_count}};
    json cells = json::array();
    for (const auto& c : r.cells) {
        const auto& s = c.scores;
        cells.push_back({{"cell", cell_json(c.cell)},
                         {"pass_at_1", s.pass_at_1},
                         {"tasks", s.tasks},
                         {"passed", s.passed},
                         {"mean_ssim", number_json(s.mean_ssim)},
                         {"mean_psnr", number_json(s.mean_psnr)},
                         {"mean_lpips", number_json(s.mean_lpips)},
                         {"scaled_psnr", number_json(s.scaled_psnr)},
                         {"scaled_ssim", number_json(s.scaled_ssim)},
                         {"scaled_lpips", number_json(s.scaled_lpips)}});
    }
    j["cells"] = std::move(cells);
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"cell", cell_json(row.cell)},
                        {"task_id", row.task_id},
                        {"category", category_name(row.category)},
                        {"status", row.status},
                        {"attempts", row.attempts},
                        {"passed", row.score.passed},
                        {"ssim", number_json(row.score.ssim)},
                        {"psnr", number_json(row.score.psnr)},
                        {"lpips", number_json(row.score.lpips)},
                        {"notes", row.notes}});
    }
    j["rows"] = std::move(rows);
    j["timestamps"] = {{"started_at", r.started_at}, {"finished_at", r.finished_at}};
    return j;
}

}  // namespace

std::string render_report(const BenchReport& report, ReportFormat format) {
    switch (format) {
        case ReportFormat::Markdown: return render_markdown(report);
        case ReportFormat::Csv: return render_csv(report);
        case ReportFormat::Json: return render_json(report).dump(2) + "\n";
    }
    return {};
}

BenchReport report_from_json(std::string_view json_text) {
    try {
        const auto j = json::parse(json_text);
        BenchReport r;
        const auto& c = j.at("config");
        r.config.modes = c.at("modes").get<std::vector<std::string>>();
        r.config.variants = c.at("variants").get<std::vector<std::string>>();
        r.config.max_iterations = c.at("max_iterations").get<int>();
        r.config.model = c.at("model").get<std::string>();
        r.config.task_count = c.at("task_count").get<std::size_t>();
        for (const auto& cj : j.at("cells")) {
            CellSummary cs;
            cs.cell = cell_from(cj.at("cell"));
            auto& s = cs.scores;
            s.pass_at_1 = cj.at("pass_at_1").get<double>();
            s.tasks = cj.at("tasks").get<std::size_t>();
            s.passed = cj.at("passed").get<std::size_t>();
            s.mean_ssim = number_from(cj.at("mean_ssim"));
            s.mean_psnr = number_from(cj.at("mean_psnr"));
            s.mean_lpips = number_from(cj.at("mean_lpips"));
            s.scaled_psnr = number_from(cj.at("scaled_psnr"));
            s.scaled_ssim = number_from(cj.at("scaled_ssim"));
            s.scaled_lpips = number_from(cj.at("scaled_lpips"));
            r.cells.push_back(std::move(cs));
        }
        for (const auto& rj : j.at("rows")) {
            TaskRow row;
            row.cell = cell_from(rj.at("cell"));
            row.task_id = rj.at("task_id").get<std::string>();
            auto cat = parse_category(rj.at("category").get<std::string>());
            if (!cat) throw Error(Errc::InvalidArgument, "unknown category in report");
            row.category = *cat;
            row.status = rj.at("status").get<std::string>();
            row.attempts = rj.at("attempts").get<int>();
            row.score.task_id = row.task_id;
            row.score.passed = rj.at("passed").get<bool>();
            row.score.ssim = number_from(rj.at("ssim"));
            row.score.psnr = number_from(rj.at("psnr"));
            row.score.lpips = number_from(rj.at("lpips"));
            row.notes = rj.at("notes").get<std::vector<std::string>>();
            r.rows.push_back(std::move(row));
        }
        r.started_at = j.at("timestamps").at("started_at").get<std::string>();
        r.finished_at = j.at("timestamps").at("finished_at").get<std::string>();
        return r;
    } catch (const json::exception& e) {
        throw Error(Errc::InvalidArgument, std::string("malformed report json: ") + e.what());
    }
}

void write_reports(const BenchReport& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    text::write_file(dir / "report.md", render_report(report, ReportFormat::Markdown));
    text::write_file(dir / "report.csv", render_report(report, ReportFormat::Csv));
    text::write_file(dir / "report.json", render_report(report, ReportFormat::Json));
}

}  // namespace chatvis::bench
