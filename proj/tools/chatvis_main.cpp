// chatvis command-line tool. Talks to the library through the C API only.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "chatvis/chatvis.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Thrown for problems that are the caller's fault; mapped to exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OwnedText {
    char* ptr = nullptr;
    ~OwnedText() { cv_free(ptr); }
    std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

struct Context {
    cv_context* ctx = nullptr;
    ~Context() { cv_context_destroy(ctx); }
};

struct Index {
    cv_index* idx = nullptr;
    ~Index() { cv_index_close(idx); }
};

struct Failure : std::runtime_error {
    cv_status status;
    Failure(cv_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(cv_status s) {
    if (s != CV_OK) throw Failure(s, cv_last_error());
}

// Shortest round-trip text for a double, always with a decimal point.
std::string shortest(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, end);
    if (s.find_first_of(".e") == std::string::npos) s += ".0";
    return s;
}

void set_if(std::vector<std::pair<std::string, std::string>>& out, const char* key,
            const std::optional<std::string>& value) {
    if (value) out.emplace_back(key, *value);
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Failure(CV_E_UNREADABLE_FILE, "cannot read " + path);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

// Help for the subcommand being used, or the top-level help.
std::string active_help(const CLI::App& app) {
    for (const auto* sub : app.get_subcommands()) return sub->help();
    return app.help();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate and benchmark ParaView visualization scripts from natural-language prompts"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", std::string(cv_version()));

    std::optional<std::string> config_path, model, base_url, interpreter, prompts_dir;
    std::optional<std::string> timeout, max_iterations;
    app.add_option("--config", config_path, "Settings file (default: ./chatvis.toml when present)");
    app.add_option("--model", model, "Chat model name");
    app.add_option("--base-url", base_url, "Chat-completion endpoint base URL");
    app.add_option("--interpreter", interpreter, "Interpreter command used to run scripts");
    app.add_option("--timeout", timeout, "Per-run interpreter timeout in seconds");
    app.add_option("--max-iterations", max_iterations, "Attempts per session, first generation included");
    app.add_option("--prompts-dir", prompts_dir, "Directory with prompt templates overriding the built-in ones");

    // ingest
    auto* ingest = app.add_subcommand("ingest", "Chunk and embed a documentation tree into an index");
    std::string docs_dir, ingest_index;
    std::optional<std::string> embedder, chunk_max, chunk_overlap;
    ingest->add_option("--docs", docs_dir, "Documentation root")->required();
    ingest->add_option("--index", ingest_index, "Index file to write")->required();
    ingest->add_option("--embedder", embedder, "fallback or remote:<model>");
    ingest->add_option("--chunk-max-lines", chunk_max, "Lines per code-snippet window");
    ingest->add_option("--chunk-overlap", chunk_overlap, "Overlap between code-snippet windows");

    // search
    auto* search = app.add_subcommand("search", "Query an index");
    std::string search_index, query, search_kind;
    std::size_t search_k = 5;
    search->add_option("--index", search_index, "Index file")->required();
    search->add_option("--query", query, "Query text")->required();
    search->add_option("--k", search_k, "Number of hits")->check(CLI::PositiveNumber);
    search->add_option("--kind", search_kind, "api-doc or code-snippet");

    // gen
    auto* gen = app.add_subcommand("gen", "Generate, run and repair one script");
    std::optional<std::string> prompt, prompt_file, gen_index, expect, transcript, record, k, budget, kind_filter,
        replay_mode;
    std::string gen_mode = "rag", gen_out = "out/gen";
    auto* prompt_opt = gen->add_option("--prompt", prompt, "Visualization request text");
    gen->add_option("--prompt-file", prompt_file, "File holding the visualization request")->excludes(prompt_opt);
    gen->add_option("--mode", gen_mode, "rag or fewshot")->check(CLI::IsMember({"rag", "fewshot"}));
    gen->add_option("--index", gen_index, "Index file (rag mode)");
    gen->add_option("--out", gen_out, "Output directory for scripts, artifacts and session.json");
    gen->add_option("--expect", expect, "File name the script must produce");
    gen->add_option("--transcript", transcript, "Replay chat replies from this transcript");
    gen->add_option("--replay-mode", replay_mode, "ordered or digest")->check(CLI::IsMember({"ordered", "digest"}));
    gen->add_option("--record", record, "Append live chat replies to this transcript");
    gen->add_option("--k", k, "Chunks retrieved per operation");
    gen->add_option("--context-budget", budget, "Character budget for retrieved context");
    gen->add_option("--kind-filter", kind_filter, "Restrict retrieval to api-doc or code-snippet");

    // bench
    auto* bench = app.add_subcommand("bench", "Run a benchmark suite and write reports");
    std::string suite_dir, modes = "rag,fewshot", variants = "full", bench_out = "out/bench";
    std::optional<std::string> bench_index, transcripts_dir, record_dir, jobs, lpips_plugin, bench_replay_mode;
    bool bench_resize = false;
    bench->add_option("--suite", suite_dir, "Suite directory")->required();
    bench->add_option("--modes", modes, "Comma-separated subset of rag,fewshot");
    bench->add_option("--variants", variants, "Comma-separated subset of full,quick");
    bench->add_option("--index", bench_index, "Index file (needed for rag)");
    bench->add_option("--out", bench_out, "Output directory for reports and run directories");
    bench->add_option("--transcripts", transcripts_dir, "Replay per-session transcripts from this directory");
    bench->add_option("--replay-mode", bench_replay_mode, "ordered or digest")
        ->check(CLI::IsMember({"ordered", "digest"}));
    bench->add_option("--record-dir", record_dir, "Record per-session transcripts into this directory");
    bench->add_option("--jobs", jobs, "Concurrent sessions per cell");
    bench->add_option("--lpips-plugin", lpips_plugin, "LPIPS scorer command with {A} and {B} placeholders");
    bench->add_flag("--resize", bench_resize, "Resize outputs to the ground-truth size before scoring");

    // score
    auto* score = app.add_subcommand("score", "Compare two PNG images");
    std::string image_a, image_b;
    std::optional<std::string> score_lpips;
    bool score_resize = false;
    score->add_option("image_a", image_a, "First image")->required();
    score->add_option("image_b", image_b, "Second image")->required();
    score->add_option("--lpips-plugin", score_lpips, "LPIPS scorer command with {A} and {B} placeholders");
    score->add_flag("--resize", score_resize, "Resize the larger image to the smaller one");

    // extract-errors
    auto* extract = app.add_subcommand("extract-errors", "Parse interpreter output into traceback records");
    std::string log_path;
    extract->add_option("log", log_path, "Log file, or - for stdin")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << active_help(app);
        return kExitUsage;
    }

    try {
        if (extract->parsed()) {
            std::string log;
            if (log_path == "-") log.assign(std::istreambuf_iterator<char>(std::cin), {});
            else log = read_text(log_path);
            OwnedText out;
            check(cv_extract_errors(log.c_str(), &out.ptr));
            std::cout << out.str() << "\n";
            return kExitOk;
        }

        Context context;
        check(cv_context_create(&context.ctx));
        if (config_path) {
            check(cv_context_load_config(context.ctx, config_path->c_str()));
        } else if (fs::is_regular_file("chatvis.toml")) {
            check(cv_context_load_config(context.ctx, "chatvis.toml"));
        }
        check(cv_context_load_env(context.ctx));

        std::vector<std::pair<std::string, std::string>> settings;
        set_if(settings, "model", model);
        set_if(settings, "base_url", base_url);
        set_if(settings, "interpreter", interpreter);
        set_if(settings, "timeout", timeout);
        set_if(settings, "max_iterations", max_iterations);
        set_if(settings, "prompts_dir", prompts_dir);
        set_if(settings, "embedder", embedder);
        set_if(settings, "chunk_max_lines", chunk_max);
        set_if(settings, "chunk_overlap", chunk_overlap);
        set_if(settings, "transcript", transcript);
        set_if(settings, "record", record);
        set_if(settings, "k", k);
        set_if(settings, "context_budget", budget);
        set_if(settings, "kind_filter", kind_filter);
        set_if(settings, "replay_mode", replay_mode ? replay_mode : bench_replay_mode);
        set_if(settings, "transcripts_dir", transcripts_dir);
        set_if(settings, "record_dir", record_dir);
        set_if(settings, "jobs", jobs);
        set_if(settings, "lpips_plugin", lpips_plugin ? lpips_plugin : score_lpips);
        if (bench_resize || score_resize) settings.emplace_back("resize", "true");
        for (const auto& [key, value] : settings) {
            if (cv_context_set(context.ctx, key.c_str(), value.c_str()) != CV_OK)
                throw UsageError(cv_last_error());
        }

        if (ingest->parsed()) {
            OwnedText out;
            check(cv_ingest(context.ctx, docs_dir.c_str(), ingest_index.c_str(), &out.ptr));
            std::cout << out.str() << "\n";
            return kExitOk;
        }

        auto open_index = [&](const std::optional<std::string>& path, Index& index) {
            if (!path) throw UsageError("rag mode needs --index");
            if (!fs::is_regular_file(*path)) throw UsageError("index file not found: " + *path);
            check(cv_index_open(context.ctx, path->c_str(), &index.idx));
        };

        if (search->parsed()) {
            Index index;
            open_index(search_index, index);
            OwnedText out;
            check(cv_index_search(index.idx, query.c_str(), search_k, search_kind.empty() ? nullptr : search_kind.c_str(),
                                  &out.ptr));
            std::cout << out.str() << "\n";
            return kExitOk;
        }

        if (gen->parsed()) {
            if (!prompt && !prompt_file) throw UsageError("gen needs --prompt or --prompt-file");
            std::string text = prompt ? *prompt : read_text(*prompt_file);
            Index index;
            if (gen_mode == "rag") open_index(gen_index, index);
            OwnedText out;
            check(cv_generate(context.ctx, text.c_str(), gen_mode.c_str(), index.idx, gen_out.c_str(),
                              expect ? expect->c_str() : nullptr, &out.ptr));
            auto session = json::parse(out.str());
            const auto status = session.at("status").get<std::string>();
            json summary = {{"status", status},
                            {"attempts", session.at("attempts").size()},
                            {"out", gen_out},
                            {"script", (fs::path(gen_out) / "generated.py").string()},
                            {"session", (fs::path(gen_out) / "session.json").string()}};
            if (!session.at("attempts").empty()) summary["artifacts"] = session.at("attempts").back().at("artifacts");
            if (!session.at("failure").is_null()) summary["failure"] = session.at("failure");
            std::cout << summary.dump(2) << "\n";
            if (status != "Success") std::cerr << "session ended with status " << status << "\n";
            return status == "Success" ? kExitOk : kExitFailure;
        }

        if (bench->parsed()) {
            Index index;
            bool wants_rag = false;
            std::stringstream list(modes);
            for (std::string item; std::getline(list, item, ',');)
                if (item == "rag") wants_rag = true;
            if (wants_rag) open_index(bench_index, index);
            else if (bench_index && fs::is_regular_file(*bench_index)) open_index(bench_index, index);
            OwnedText out;
            check(cv_bench(context.ctx, suite_dir.c_str(), modes.c_str(), variants.c_str(), index.idx,
                           bench_out.c_str(), &out.ptr));
            auto report = json::parse(out.str());
            for (const auto& w : report.value("warnings", json::array())) std::cerr << "warning: " << w.get<std::string>() << "\n";
            std::cout << read_text((fs::path(bench_out) / "report.csv").string());
            std::cerr << "reports written to " << bench_out << "\n";
            return kExitOk;
        }

        if (score->parsed()) {
            OwnedText out;
            check(cv_score(context.ctx, image_a.c_str(), image_b.c_str(), &out.ptr));
            auto j = json::parse(out.str());
            auto number = [&](const json& v) { return v.is_string() ? v.get<std::string>() : shortest(v.get<double>()); };
            std::cout << "ssim=" << number(j.at("ssim")) << "\n";
            std::cout << "psnr=" << number(j.at("psnr")) << "\n";
            std::cout << "lpips=" << (j.at("lpips").is_null() ? std::string("n/a") : number(j.at("lpips"))) << "\n";
            if (j.contains("lpips_error")) std::cerr << j.at("lpips_error").get<std::string>() << "\n";
            return kExitOk;
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << active_help(app);
        return kExitUsage;
    } catch (const Failure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.status == CV_E_INVALID_ARGUMENT ? kExitUsage : kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitUsage;
}
