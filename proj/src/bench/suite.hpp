#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "metrics/metrics.hpp"
#include "orchestrator/session.hpp"

namespace chatvis::bench {

enum class Category { Canonical, Regression, Science };
enum class Variant { Full, Quick };

std::string_view category_name(Category c) noexcept;
std::optional<Category> parse_category(std::string_view name) noexcept;
std::string_view variant_name(Variant v) noexcept;
std::optional<Variant> parse_variant(std::string_view name) noexcept;

inline constexpr const char* kManifestFile = "manifest.toml";

// One task directory. Paths are absolute (resolved against the task dir).
struct BenchmarkTask {
    std::string id;
    Category category = Category::Canonical;
    std::filesystem::path dir;
    std::filesystem::path full_prompt;
    std::filesystem::path quick_prompt;
    std::filesystem::path reference_script;
    std::filesystem::path ground_truth_image;
    std::string expected_output;
    std::vector<std::filesystem::path> data_files;

    const std::filesystem::path& prompt_path(Variant v) const { return v == Variant::Full ? full_prompt : quick_prompt; }
};

// Manifest keys: id, category, full_prompt, quick_prompt, reference,
// ground_truth, expected_output, data (list, optional). Relative paths are
// resolved against the task directory.
BenchmarkTask parse_manifest(const std::filesystem::path& task_dir);

// Every subdirectory holding a manifest, sorted by id. Warnings (such as an
// empty suite) are appended to `warnings` when given.
std::vector<BenchmarkTask> load_suite(const std::filesystem::path& dir, std::vector<std::string>* warnings = nullptr);

std::map<Category, std::size_t> count_categories(const std::vector<BenchmarkTask>& tasks);

// "<task>.<mode>.<variant>", the stem of per-session transcript files.
std::string session_key(const std::string& task_id, orchestrator::Mode mode, Variant variant);

struct Cell {
    orchestrator::Mode mode = orchestrator::Mode::Rag;
    Variant variant = Variant::Full;
    friend auto operator<=>(const Cell&, const Cell&) = default;
};

std::string cell_name(const Cell& cell);

struct TaskRow {
    Cell cell;
    std::string task_id;
    Category category = Category::Canonical;
    std::string status;  // session status name, or "Error" when the session could not run
    int attempts = 0;
    metrics::TaskScore score;
    std::vector<std::string> notes;  // scoring and failure diagnostics
    friend bool operator==(const TaskRow&, const TaskRow&) = default;
};

struct CellSummary {
    Cell cell;
    metrics::AggregateScores scores;
    friend bool operator==(const CellSummary&, const CellSummary&) = default;
};

struct RunSummary {
    std::vector<std::string> modes;
    std::vector<std::string> variants;
    int max_iterations = 0;
    std::string model;
    std::size_t task_count = 0;
    friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

struct BenchReport {
    RunSummary config;
    std::vector<TaskRow> rows;        // ordered by cell, then task id
    std::vector<CellSummary> cells;   // empty when the suite is empty
    std::string started_at;           // UTC, ISO 8601; excluded from csv
    std::string finished_at;
    friend bool operator==(const BenchReport&, const BenchReport&) = default;
};

using GatewayFactory =
    std::function<std::shared_ptr<llm::Gateway>(const BenchmarkTask&, orchestrator::Mode, Variant)>;

struct BenchConfig {
    std::vector<orchestrator::Mode> modes{orchestrator::Mode::Rag, orchestrator::Mode::FewShot};
    std::vector<Variant> variants{Variant::Full};
    std::filesystem::path out_dir = "out";
    int jobs = 1;
    orchestrator::SessionConfig session;  // mode, work_dir and expected_artifact are set per task
    std::optional<std::string> lpips_plugin;
    bool resize = false;
};

struct BenchServices {
    GatewayFactory gateway;
    const PromptLibrary* prompts = nullptr;
    const vecindex::VectorIndex* index = nullptr;
    const corpus::Corpus* corpus = nullptr;
    vecindex::Embedder* embedder = nullptr;
};

// Work directory of one session: out_dir/runs/<mode>-<variant>/<task_id>.
std::filesystem::path session_dir(const std::filesystem::path& out_dir, const Cell& cell, const std::string& task_id);

// Runs every (cell, task) session. Cells run in order; tasks inside a cell
// use up to `jobs` workers. A failing task never aborts the suite.
BenchReport run_suite(const std::vector<BenchmarkTask>& tasks, const BenchConfig& config,
                      const BenchServices& services);

// Scores an output image against the ground truth. Problems become notes.
metrics::TaskScore score_output(const std::string& task_id, const std::filesystem::path& output,
                                const std::filesystem::path& ground_truth, const BenchConfig& config,
                                std::vector<std::string>& notes);

}  // namespace chatvis::bench
