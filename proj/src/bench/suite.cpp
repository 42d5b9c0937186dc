#include "bench/suite.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <mutex>
#include <set>
#include <thread>

#include "common/error.hpp"
#include "common/keyvalue.hpp"
#include "common/text.hpp"

namespace fs = std::filesystem;

namespace chatvis::bench {

std::string_view category_name(Category c) noexcept {
    switch (c) {
        case Category::Canonical: return "canonical";
        case Category::Regression: return "regression";
        case Category::Science: return "science";
    }
    return "canonical";
}

std::optional<Category> parse_category(std::string_view name) noexcept {
    if (name == "canonical") return Category::Canonical;
    if (name == "regression") return Category::Regression;
    if (name == "science") return Category::Science;
    return std::nullopt;
}

std::string_view variant_name(Variant v) noexcept { return v == Variant::Full ? "full" : "quick"; }

std::optional<Variant> parse_variant(std::string_view name) noexcept {
    if (name == "full") return Variant::Full;
    if (name == "quick") return Variant::Quick;
    return std::nullopt;
}

namespace {

[[noreturn]] void invalid(const std::string& task, const std::string& field, const std::string& why) {
    throw Error(Errc::ManifestInvalid, "task '" + task + "', field '" + field + "': " + why);
}

fs::path asset(const fs::path& task_dir, const std::string& task, const std::string& field, const std::string& rel) {
    if (text::is_blank(rel)) invalid(task, field, "empty path");
    fs::path p = fs::path(rel).is_absolute() ? fs::path(rel) : task_dir / rel;
    std::error_code ec;
    if (!fs::is_regular_file(p, ec)) throw Error(Errc::MissingAsset, p.string());
    return p;
}

std::string required_string(const KeyValueFile& kv, const std::string& task, const std::string& key) {
    if (!kv.contains(key)) invalid(task, key, "missing");
    auto v = kv.get_string(key);
    if (!v) invalid(task, key, "expected a string");
    if (text::is_blank(*v)) invalid(task, key, "empty");
    return *v;
}

std::string utc_now() {
    auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void copy_data(const fs::path& from, const fs::path& work_dir) {
    const auto target = work_dir / from.filename();
    if (fs::is_directory(from))
        fs::copy(from, target, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    else
        fs::copy_file(from, target, fs::copy_options::overwrite_existing);
}

}  // namespace

BenchmarkTask parse_manifest(const fs::path& task_dir) {
    const auto manifest = task_dir / kManifestFile;
    std::error_code ec;
    if (!fs::is_regular_file(manifest, ec)) throw Error(Errc::MissingAsset, manifest.string());

    const std::string dir_name = task_dir.filename().string();
    KeyValueFile kv;
    try {
        kv = KeyValueFile::load(manifest);
    } catch (const Error& e) {
        invalid(dir_name, "manifest", e.what());
    }

    BenchmarkTask t;
    t.dir = task_dir;
    t.id = required_string(kv, dir_name, "id");
    const auto& id = t.id;

    auto cat = parse_category(required_string(kv, id, "category"));
    if (!cat) invalid(id, "category", "expected canonical, regression or science");
    t.category = *cat;

    t.full_prompt = asset(task_dir, id, "full_prompt", required_string(kv, id, "full_prompt"));
    t.quick_prompt = asset(task_dir, id, "quick_prompt", required_string(kv, id, "quick_prompt"));
    if (text::is_blank(text::read_file(t.full_prompt))) invalid(id, "full_prompt", "prompt file is empty");
    if (text::is_blank(text::read_file(t.quick_prompt))) invalid(id, "quick_prompt", "prompt file is empty");
    t.reference_script = asset(task_dir, id, "reference", required_string(kv, id, "reference"));
    t.ground_truth_image = asset(task_dir, id, "ground_truth", required_string(kv, id, "ground_truth"));
    try {
        (void)metrics::read_png(t.ground_truth_image);
    } catch (const Error& e) {
        invalid(id, "ground_truth", std::string("does not decode: ") + e.what());
    }

    t.expected_output = required_string(kv, id, "expected_output");
    if (fs::path(t.expected_output).has_parent_path() || t.expected_output == "." || t.expected_output == "..")
        invalid(id, "expected_output", "must be a plain file name");

    if (kv.contains("data")) {
        auto list = kv.get_list("data");
        if (!list) invalid(id, "data", "expected a list of paths");
        for (const auto& rel : *list) {
            if (text::is_blank(rel)) invalid(id, "data", "empty path");
            fs::path p = fs::path(rel).is_absolute() ? fs::path(rel) : task_dir / rel;
            if (!fs::exists(p, ec)) throw Error(Errc::MissingAsset, p.string());
            t.data_files.push_back(p);
        }
    }
    return t;
}

std::vector<BenchmarkTask> load_suite(const fs::path& dir, std::vector<std::string>* warnings) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw Error(Errc::RootNotFound, dir.string());
    std::vector<BenchmarkTask> tasks;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_directory()) continue;
        if (entry.path().filename().string().starts_with(".")) continue;
        if (!fs::exists(entry.path() / kManifestFile)) {
            if (warnings) warnings->push_back("skipping " + entry.path().string() + ": no " + kManifestFile);
            continue;
        }
        tasks.push_back(parse_manifest(entry.path()));
    }
    std::sort(tasks.begin(), tasks.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < tasks.size(); ++i)
        if (tasks[i].id == tasks[i - 1].id) invalid(tasks[i].id, "id", "duplicate task id");
    if (tasks.empty() && warnings) warnings->push_back("suite " + dir.string() + " contains no tasks");
    return tasks;
}

std::map<Category, std::size_t> count_categories(const std::vector<BenchmarkTask>& tasks) {
    std::map<Category, std::size_t> counts;
    for (const auto& t : tasks) ++counts[t.category];
    return counts;
}

std::string session_key(const std::string& task_id, orchestrator::Mode mode, Variant variant) {
    return task_id + "." + std::string(orchestrator::mode_name(mode)) + "." + std::string(variant_name(variant));
}

std::string cell_name(const Cell& cell) {
    return std::string(orchestrator::mode_name(cell.mode)) + "-" + std::string(variant_name(cell.variant));
}

fs::path session_dir(const fs::path& out_dir, const Cell& cell, const std::string& task_id) {
    return out_dir / "runs" / cell_name(cell) / task_id;
}

metrics::TaskScore score_output(const std::string& task_id, const fs::path& output, const fs::path& ground_truth,
                                const BenchConfig& config, std::vector<std::string>& notes) {
    metrics::TaskScore score;
    score.task_id = task_id;
    score.passed = true;
    try {
        auto [a, b] = metrics::conform(metrics::read_png(output), metrics::read_png(ground_truth), config.resize);
        score.psnr = metrics::psnr(a, b);
        try {
            score.ssim = metrics::ssim(a, b);
        } catch (const Error& e) {
            notes.push_back(std::string("ssim unavailable: ") + e.what());
        }
    } catch (const Error& e) {
        notes.push_back(std::string("image scoring failed: ") + e.what());
        return score;
    }
    if (config.lpips_plugin) {
        try {
            score.lpips = metrics::lpips(output, ground_truth, *config.lpips_plugin);
        } catch (const Error& e) {
            notes.push_back(std::string("lpips unavailable: ") + e.what());
        }
    }
    return score;
}

namespace {

TaskRow run_one(const BenchmarkTask& task, const Cell& cell, const BenchConfig& config,
                const BenchServices& services) {
    TaskRow row;
    row.cell = cell;
    row.task_id = task.id;
    row.category = task.category;
    row.score.task_id = task.id;
    try {
        const auto work = session_dir(config.out_dir, cell, task.id);
        fs::remove_all(work);
        fs::create_directories(work);
        for (const auto& d : task.data_files) copy_data(d, work);

        auto gateway = services.gateway(task, cell.mode, cell.variant);
        if (!gateway) throw Error(Errc::ProviderUnavailable, "no gateway for " + task.id);

        orchestrator::SessionConfig sc = config.session;
        sc.mode = cell.mode;
        sc.exec.work_dir = work;
        sc.exec.expected_artifact = task.expected_output;

        orchestrator::Services s;
        s.gateway = gateway.get();
        s.prompts = services.prompts;
        if (cell.mode == orchestrator::Mode::Rag) {
            s.index = services.index;
            s.corpus = services.corpus;
            s.embedder = services.embedder;
        }

        auto session = orchestrator::run_session(text::read_file(task.prompt_path(cell.variant)), sc, s);
        row.status = std::string(orchestrator::status_name(session.status));
        row.attempts = static_cast<int>(session.attempts.size());
        if (session.failure) row.notes.push_back(*session.failure);
        if (session.succeeded())
            row.score = score_output(task.id, work / task.expected_output, task.ground_truth_image, config, row.notes);
    } catch (const Error& e) {
        // Gateway construction problems count as gateway failures; anything else is a harness error.
        switch (e.code()) {
            case Errc::TranscriptMiss:
            case Errc::ProviderUnavailable:
            case Errc::EndpointUnreachable:
            case Errc::AuthFailure:
            case Errc::RateLimited:
            case Errc::MalformedProviderResponse:
                row.status = std::string(orchestrator::status_name(orchestrator::SessionStatus::GatewayFailure));
                break;
            default:
                row.status = "Error";
        }
        row.notes.push_back(e.what());
    } catch (const std::exception& e) {
        row.status = "Error";
        row.notes.push_back(e.what());
    }
    return row;
}

}  // namespace

BenchReport run_suite(const std::vector<BenchmarkTask>& tasks, const BenchConfig& config,
                      const BenchServices& services) {
    if (config.modes.empty() || config.variants.empty())
        throw Error(Errc::InvalidArgument, "bench needs at least one mode and one variant");
    if (!services.gateway || !services.prompts) throw Error(Errc::InvalidArgument, "bench needs a gateway and prompts");
    const bool wants_rag =
        std::find(config.modes.begin(), config.modes.end(), orchestrator::Mode::Rag) != config.modes.end();
    if (wants_rag && (!services.index || !services.corpus || !services.embedder))
        throw Error(Errc::InvalidArgument, "rag mode needs a built index");

    BenchReport report;
    report.started_at = utc_now();
    std::set<Cell> cells;
    for (auto m : config.modes)
        for (auto v : config.variants) cells.insert(Cell{m, v});
    for (auto m : config.modes) {
        auto name = std::string(orchestrator::mode_name(m));
        if (std::find(report.config.modes.begin(), report.config.modes.end(), name) == report.config.modes.end())
            report.config.modes.push_back(name);
    }
    for (auto v : config.variants) {
        auto name = std::string(variant_name(v));
        if (std::find(report.config.variants.begin(), report.config.variants.end(), name) ==
            report.config.variants.end())
            report.config.variants.push_back(name);
    }
    report.config.max_iterations = config.session.max_iterations;
    report.config.model = config.session.model;
    report.config.task_count = tasks.size();

    const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(config.jobs, 1)), 1,
                                                        std::max<std::size_t>(tasks.size(), 1));
    for (const auto& cell : cells) {
        std::vector<TaskRow> rows(tasks.size());
        std::atomic<std::size_t> next{0};
        auto worker = [&] {
            for (std::size_t i = next++; i < tasks.size(); i = next++) rows[i] = run_one(tasks[i], cell, config, services);
        };
        if (workers == 1) {
            worker();
        } else {
            std::vector<std::jthread> pool;
            for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        }
        if (!tasks.empty()) {
            std::vector<metrics::TaskScore> scores;
            for (const auto& r : rows) scores.push_back(r.score);
            report.cells.push_back(CellSummary{cell, metrics::aggregate(scores)});
        }
        for (auto& r : rows) report.rows.push_back(std::move(r));
    }
    report.finished_at = utc_now();
    return report;
}

}  // namespace chatvis::bench
