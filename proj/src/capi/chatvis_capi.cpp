#include "chatvis/chatvis.h"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <mutex>
#include <new>

#include <nlohmann/json.hpp>

#include "bench/report.hpp"
#include "bench/suite.hpp"
#include "common/error.hpp"
#include "common/keyvalue.hpp"
#include "common/prompts.hpp"
#include "common/text.hpp"
#include "corpus/corpus.hpp"
#include "executor/traceback.hpp"
#include "llm/gateway.hpp"
#include "metrics/metrics.hpp"
#include "orchestrator/session.hpp"
#include "vecindex/embedder.hpp"
#include "vecindex/index.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace chatvis;

namespace {

thread_local std::string g_last_error;

struct Settings {
    std::string model = "gpt-4o";
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::vector<std::string> interpreter{"pvpython"};
    double timeout = 300.0;
    int max_iterations = 5;
    std::optional<fs::path> prompts_dir;
    std::string embedder = "fallback";
    std::size_t k = 5;
    std::size_t context_budget = 24000;
    std::optional<corpus::ChunkKind> kind_filter;
    int chunk_max_lines = 60;
    int chunk_overlap = 10;
    std::optional<fs::path> transcript;
    llm::ReplayMode replay_mode = llm::ReplayMode::Ordered;
    std::optional<fs::path> record;
    std::optional<fs::path> transcripts_dir;
    std::optional<fs::path> record_dir;
    std::optional<std::string> lpips_plugin;
    bool resize = false;
    int jobs = 1;
    int max_in_flight = 4;
    int max_retries = 3;
};

template <typename T>
T parse_number(std::string_view key, std::string_view value, T lo, T hi) {
    T out{};
    auto v = text::trim(value);
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || out < lo || out > hi)
        throw Error(Errc::InvalidArgument, "invalid value '" + std::string(value) + "' for " + std::string(key));
    return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
    auto v = text::to_lower(text::trim(value));
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw Error(Errc::InvalidArgument, "invalid boolean '" + std::string(value) + "' for " + std::string(key));
}

std::optional<fs::path> optional_path(std::string_view value) {
    if (text::is_blank(value)) return std::nullopt;
    return fs::path(std::string(value));
}

void apply_setting(Settings& s, std::string_view key, std::string_view value) {
    if (key == "model") {
        if (text::is_blank(value)) throw Error(Errc::InvalidArgument, "model must not be empty");
        s.model = std::string(value);
    } else if (key == "base_url") {
        s.base_url = std::string(text::trim(value));
    } else if (key == "interpreter") {
        auto argv = text::split_command(value);
        if (argv.empty()) throw Error(Errc::InvalidArgument, "interpreter must not be empty");
        s.interpreter = std::move(argv);
    } else if (key == "timeout") {
        s.timeout = parse_number<double>(key, value, 0.001, 1e7);
    } else if (key == "max_iterations") {
        s.max_iterations = parse_number<int>(key, value, 1, 1000);
    } else if (key == "prompts_dir") {
        s.prompts_dir = optional_path(value);
    } else if (key == "embedder") {
        std::string v(text::trim(value));
        if (v != "fallback" && !(v.starts_with("remote:") && v.size() > 7))
            throw Error(Errc::InvalidArgument, "embedder must be 'fallback' or 'remote:<model>'");
        s.embedder = v;
    } else if (key == "k") {
        s.k = parse_number<std::size_t>(key, value, 1, 1000);
    } else if (key == "context_budget") {
        s.context_budget = parse_number<std::size_t>(key, value, 0, std::size_t{1} << 30);
    } else if (key == "kind_filter") {
        if (text::is_blank(value)) {
            s.kind_filter.reset();
        } else {
            auto kind = corpus::parse_kind(text::trim(value));
            if (!kind) throw Error(Errc::InvalidArgument, "kind_filter must be api-doc or code-snippet");
            s.kind_filter = kind;
        }
    } else if (key == "chunk_max_lines") {
        s.chunk_max_lines = parse_number<int>(key, value, 1, 1'000'000);
    } else if (key == "chunk_overlap") {
        s.chunk_overlap = parse_number<int>(key, value, 0, 1'000'000);
    } else if (key == "transcript") {
        s.transcript = optional_path(value);
    } else if (key == "replay_mode") {
        if (value == "ordered") s.replay_mode = llm::ReplayMode::Ordered;
        else if (value == "digest") s.replay_mode = llm::ReplayMode::Digest;
        else throw Error(Errc::InvalidArgument, "replay_mode must be ordered or digest");
    } else if (key == "record") {
        s.record = optional_path(value);
    } else if (key == "transcripts_dir") {
        s.transcripts_dir = optional_path(value);
    } else if (key == "record_dir") {
        s.record_dir = optional_path(value);
    } else if (key == "lpips_plugin") {
        if (text::is_blank(value)) s.lpips_plugin.reset();
        else s.lpips_plugin = std::string(value);
    } else if (key == "resize") {
        s.resize = parse_bool(key, value);
    } else if (key == "jobs") {
        s.jobs = parse_number<int>(key, value, 1, 256);
    } else if (key == "max_in_flight") {
        s.max_in_flight = parse_number<int>(key, value, 1, 64);
    } else if (key == "max_retries") {
        s.max_retries = parse_number<int>(key, value, 0, 100);
    } else if (key == "api_key") {
        throw Error(Errc::InvalidArgument, "the API key is read from LLM_API_KEY only");
    } else {
        throw Error(Errc::InvalidArgument, "unknown setting '" + std::string(key) + "'");
    }
}

cv_status to_status(Errc code) noexcept {
    switch (code) {
        case Errc::InvalidArgument: return CV_E_INVALID_ARGUMENT;
        case Errc::RootNotFound: return CV_E_ROOT_NOT_FOUND;
        case Errc::UnreadableFile: return CV_E_UNREADABLE_FILE;
        case Errc::EmptyText: return CV_E_EMPTY_TEXT;
        case Errc::ProviderUnavailable: return CV_E_PROVIDER_UNAVAILABLE;
        case Errc::DimensionMismatch: return CV_E_DIMENSION_MISMATCH;
        case Errc::IoFailure: return CV_E_IO;
        case Errc::CorruptIndex: return CV_E_CORRUPT_INDEX;
        case Errc::EmbedderMismatch: return CV_E_EMBEDDER_MISMATCH;
        case Errc::EndpointUnreachable: return CV_E_ENDPOINT_UNREACHABLE;
        case Errc::AuthFailure: return CV_E_AUTH;
        case Errc::RateLimited: return CV_E_RATE_LIMITED;
        case Errc::TranscriptMiss: return CV_E_TRANSCRIPT_MISS;
        case Errc::MalformedProviderResponse: return CV_E_MALFORMED_RESPONSE;
        case Errc::NoOperations: return CV_E_NO_OPERATIONS;
        case Errc::UnresolvedChunk: return CV_E_UNRESOLVED_CHUNK;
        case Errc::EmptyReply: return CV_E_EMPTY_REPLY;
        case Errc::InterpreterNotFound: return CV_E_INTERPRETER_NOT_FOUND;
        case Errc::WorkDirUnwritable: return CV_E_WORK_DIR_UNWRITABLE;
        case Errc::ShapeMismatch: return CV_E_SHAPE_MISMATCH;
        case Errc::TooSmall: return CV_E_TOO_SMALL;
        case Errc::PluginMissing: return CV_E_PLUGIN_MISSING;
        case Errc::PluginMalformedOutput: return CV_E_PLUGIN_MALFORMED_OUTPUT;
        case Errc::EmptyInput: return CV_E_EMPTY_INPUT;
        case Errc::ManifestInvalid: return CV_E_MANIFEST_INVALID;
        case Errc::MissingAsset: return CV_E_MISSING_ASSET;
    }
    return CV_E_INTERNAL;
}

template <typename F>
cv_status guarded(F&& body) noexcept {
    try {
        body();
        g_last_error.clear();
        return CV_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const fs::filesystem_error& e) {
        g_last_error = std::string("IoFailure: ") + e.what();
        return CV_E_IO;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return CV_E_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return CV_E_INTERNAL;
    } catch (...) {
        g_last_error = "unknown failure";
        return CV_E_INTERNAL;
    }
}

void require(bool condition, const char* what) {
    if (!condition) throw Error(Errc::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
    auto* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

void emit(char** out, const json& j) { *out = dup_string(j.dump(2)); }

json number_or_inf(double v) {
    if (std::isinf(v)) return "inf";
    return v;
}

fs::path corpus_path_for(const fs::path& index_path) { return fs::path(index_path.string() + ".chunks.jsonl"); }

}  // namespace

struct cv_context {
    Settings settings;
    std::mutex mutex;
    std::shared_ptr<llm::RemoteBackend> remote;

    std::shared_ptr<llm::RemoteBackend> remote_backend() {
        std::lock_guard lock(mutex);
        if (!remote) {
            if (settings.api_key.empty())
                throw Error(Errc::ProviderUnavailable, "no LLM endpoint credentials: set LLM_API_KEY");
            llm::RemoteConfig rc;
            rc.base_url = settings.base_url;
            rc.api_key = settings.api_key;
            rc.max_in_flight = settings.max_in_flight;
            rc.max_retries = settings.max_retries;
            remote = std::make_shared<llm::RemoteBackend>(rc);
        }
        return remote;
    }

    void reset_remote() {
        std::lock_guard lock(mutex);
        remote.reset();
    }

    std::shared_ptr<llm::Gateway> session_gateway() {
        if (settings.transcript)
            return std::make_shared<llm::ReplayBackend>(llm::Transcript::load(*settings.transcript),
                                                        settings.replay_mode);
        std::shared_ptr<llm::Gateway> upstream = remote_backend();
        if (settings.record) return std::make_shared<llm::RecordBackend>(upstream, *settings.record);
        return upstream;
    }

    orchestrator::SessionConfig session_config() const {
        orchestrator::SessionConfig sc;
        sc.max_iterations = settings.max_iterations;
        sc.model = settings.model;
        sc.exec.interpreter_cmd = settings.interpreter;
        sc.exec.timeout_seconds = settings.timeout;
        sc.retrieval.k = settings.k;
        sc.retrieval.budget_chars = settings.context_budget;
        sc.retrieval.kind_filter = settings.kind_filter;
        return sc;
    }
};

struct cv_index {
    std::unique_ptr<vecindex::VectorIndex> index;
    corpus::Corpus corpus;
    std::unique_ptr<vecindex::Embedder> embedder;
};

namespace {

std::unique_ptr<vecindex::Embedder> embedder_for_ingest(cv_context& ctx) {
    const auto& name = ctx.settings.embedder;
    if (name == "fallback") return std::make_unique<vecindex::FallbackEmbedder>();
    return std::make_unique<llm::RemoteEmbedder>(ctx.remote_backend(), name.substr(7));
}

// Rebuilds the embedder recorded in an index header.
std::unique_ptr<vecindex::Embedder> embedder_for_tag(cv_context& ctx, const std::string& tag, std::size_t dim) {
    if (tag.starts_with(vecindex::FallbackEmbedder::kTag)) {
        auto e = std::make_unique<vecindex::FallbackEmbedder>(dim);
        if (e->tag() != tag) throw Error(Errc::EmbedderMismatch, "index built with unknown embedder '" + tag + "'");
        return e;
    }
    if (tag.starts_with("remote:")) {
        auto last = tag.rfind(':');
        auto model = tag.substr(7, last - 7);
        auto e = std::make_unique<llm::RemoteEmbedder>(ctx.remote_backend(), model, dim);
        if (e->tag() != tag) throw Error(Errc::EmbedderMismatch, "index tag '" + tag + "' does not parse");
        return e;
    }
    throw Error(Errc::EmbedderMismatch, "index built with unknown embedder '" + tag + "'");
}

std::vector<std::string> split_list(const char* csv) {
    std::vector<std::string> out;
    std::string cur;
    for (const char* p = csv; ; ++p) {
        if (*p == ',' || *p == '\0') {
            auto item = std::string(text::trim(cur));
            if (!item.empty()) out.push_back(item);
            cur.clear();
            if (*p == '\0') break;
        } else {
            cur += *p;
        }
    }
    return out;
}

json traceback_json(const executor::TracebackRecord& r) {
    json locs = json::array();
    for (const auto& l : r.locations) locs.push_back({{"file", l.file}, {"line", l.line}});
    return {{"error_class", r.error_class},
            {"error_message", r.error_message},
            {"lines", r.lines},
            {"locations", std::move(locs)}};
}

}  // namespace

extern "C" {

const char* cv_version(void) { return "0.1.0"; }

const char* cv_status_name(cv_status status) {
    switch (status) {
        case CV_OK: return "OK";
        case CV_E_INTERNAL: return "Internal";
        default: break;
    }
    int code = static_cast<int>(status);
    if (code >= CV_E_INVALID_ARGUMENT && code <= CV_E_MISSING_ASSET)
        return errc_name(static_cast<Errc>(code - 1)).data();
    return "Unknown";
}

const char* cv_last_error(void) { return g_last_error.c_str(); }

void cv_free(char* text) { std::free(text); }

cv_status cv_context_create(cv_context** out) {
    return guarded([&] {
        require(out != nullptr, "out must not be null");
        *out = new cv_context();
    });
}

void cv_context_destroy(cv_context* ctx) { delete ctx; }

cv_status cv_context_set(cv_context* ctx, const char* key, const char* value) {
    return guarded([&] {
        require(ctx && key && value, "context, key and value must not be null");
        apply_setting(ctx->settings, key, value);
        ctx->reset_remote();
    });
}

cv_status cv_context_load_config(cv_context* ctx, const char* path) {
    return guarded([&] {
        require(ctx && path, "context and path must not be null");
        auto kv = KeyValueFile::load(path);
        Settings next = ctx->settings;
        for (const auto& [full_key, value] : kv.values()) {
            std::string key = full_key.starts_with("chatvis.") ? full_key.substr(8) : full_key;
            std::string text_value;
            if (const auto* list = std::get_if<std::vector<std::string>>(&value)) {
                // Lists only make sense for the interpreter command line.
                if (key != "interpreter") throw Error(Errc::InvalidArgument, key + " does not take a list");
                next.interpreter = *list;
                if (next.interpreter.empty()) throw Error(Errc::InvalidArgument, "interpreter must not be empty");
                continue;
            }
            apply_setting(next, key, *kv.get_text(full_key));
        }
        ctx->settings = std::move(next);
        ctx->reset_remote();
    });
}

cv_status cv_context_load_env(cv_context* ctx) {
    return guarded([&] {
        require(ctx != nullptr, "context must not be null");
        auto getenv_nonempty = [](const char* name) -> std::optional<std::string> {
            const char* v = std::getenv(name);
            if (!v || !*v) return std::nullopt;
            return std::string(v);
        };
        if (auto v = getenv_nonempty("LLM_BASE_URL")) apply_setting(ctx->settings, "base_url", *v);
        if (auto v = getenv_nonempty("LLM_MODEL")) apply_setting(ctx->settings, "model", *v);
        if (auto v = getenv_nonempty("CHATVIS_INTERPRETER")) apply_setting(ctx->settings, "interpreter", *v);
        if (auto v = getenv_nonempty("LLM_API_KEY")) ctx->settings.api_key = *v;
        ctx->reset_remote();
    });
}

cv_status cv_context_dump(const cv_context* ctx, char** out_json) {
    return guarded([&] {
        require(ctx && out_json, "context and out_json must not be null");
        const auto& s = ctx->settings;
        auto opt = [](const auto& o) -> json {
            if (!o) return nullptr;
            if constexpr (std::is_same_v<std::decay_t<decltype(*o)>, fs::path>) return o->string();
            else return *o;
        };
        json j = {{"model", s.model},
                  {"base_url", s.base_url},
                  {"api_key_set", !s.api_key.empty()},
                  {"interpreter", s.interpreter},
                  {"timeout", s.timeout},
                  {"max_iterations", s.max_iterations},
                  {"prompts_dir", opt(s.prompts_dir)},
                  {"embedder", s.embedder},
                  {"k", s.k},
                  {"context_budget", s.context_budget},
                  {"kind_filter", s.kind_filter ? json(corpus::kind_name(*s.kind_filter)) : json(nullptr)},
                  {"chunk_max_lines", s.chunk_max_lines},
                  {"chunk_overlap", s.chunk_overlap},
                  {"transcript", opt(s.transcript)},
                  {"replay_mode", s.replay_mode == llm::ReplayMode::Ordered ? "ordered" : "digest"},
                  {"record", opt(s.record)},
                  {"transcripts_dir", opt(s.transcripts_dir)},
                  {"record_dir", opt(s.record_dir)},
                  {"lpips_plugin", opt(s.lpips_plugin)},
                  {"resize", s.resize},
                  {"jobs", s.jobs},
                  {"max_in_flight", s.max_in_flight},
                  {"max_retries", s.max_retries}};
        emit(out_json, j);
    });
}

cv_status cv_ingest(cv_context* ctx, const char* docs_dir, const char* index_path, char** out_json) {
    return guarded([&] {
        require(ctx && docs_dir && index_path && out_json, "arguments must not be null");
        corpus::ChunkConfig cc;
        cc.max_lines = ctx->settings.chunk_max_lines;
        cc.overlap_lines = ctx->settings.chunk_overlap;
        if (cc.overlap_lines >= cc.max_lines)
            throw Error(Errc::InvalidArgument, "chunk_overlap must be smaller than chunk_max_lines");
        auto corpus = corpus::chunk_docs(docs_dir, cc);
        auto embedder = embedder_for_ingest(*ctx);

        std::optional<vecindex::VectorIndex> index;
        std::size_t kinds[2] = {0, 0};
        for (const auto& chunk : corpus.chunks()) {
            auto v = embedder->embed(chunk.text);
            if (!index) index.emplace(embedder->dimension(), embedder->tag());
            index->add(chunk.id, v);
            ++kinds[chunk.kind == corpus::ChunkKind::ApiDoc ? 0 : 1];
        }
        if (!index) index.emplace(embedder->dimension(), embedder->tag());

        const fs::path out(index_path);
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        index->persist(out);
        corpus.save(corpus_path_for(out));

        json skipped = json::array();
        for (const auto& s : corpus.skipped()) skipped.push_back({{"path", s.path}, {"reason", s.reason}});
        emit(out_json, {{"index", out.string()},
                        {"chunks_file", corpus_path_for(out).string()},
                        {"chunks", corpus.size()},
                        {"api_doc_chunks", kinds[0]},
                        {"code_snippet_chunks", kinds[1]},
                        {"embedder", index->embedder_tag()},
                        {"dimension", index->dimension()},
                        {"fingerprint", corpus.source_fingerprint()},
                        {"skipped", std::move(skipped)}});
    });
}

cv_status cv_index_open(cv_context* ctx, const char* index_path, cv_index** out) {
    return guarded([&] {
        require(ctx && index_path && out, "arguments must not be null");
        const fs::path path(index_path);
        std::error_code ec;
        if (!fs::is_regular_file(path, ec)) throw Error(Errc::InvalidArgument, "index file not found: " + path.string());
        auto handle = std::make_unique<cv_index>();
        handle->index = std::make_unique<vecindex::VectorIndex>(vecindex::VectorIndex::load(path));
        handle->corpus = corpus::Corpus::load(corpus_path_for(path));
        for (std::size_t row = 0; row < handle->index->size(); ++row) {
            if (!handle->corpus.find(handle->index->id(row)))
                throw Error(Errc::UnresolvedChunk, "index entry '" + handle->index->id(row) + "' has no chunk");
        }
        handle->embedder = embedder_for_tag(*ctx, handle->index->embedder_tag(), handle->index->dimension());
        *out = handle.release();
    });
}

void cv_index_close(cv_index* index) { delete index; }

cv_status cv_index_search(cv_index* index, const char* query, size_t k, const char* kind, char** out_json) {
    return guarded([&] {
        require(index && query && out_json, "arguments must not be null");
        std::optional<corpus::ChunkKind> filter;
        if (kind && *kind) {
            filter = corpus::parse_kind(kind);
            if (!filter) throw Error(Errc::InvalidArgument, "unknown chunk kind '" + std::string(kind) + "'");
        }
        auto q = index->embedder->embed(query);
        std::function<bool(std::string_view)> accept;
        if (filter) {
            accept = [&](std::string_view id) {
                const auto* c = index->corpus.find(id);
                return c && c->kind == *filter;
            };
        }
        json hits = json::array();
        for (const auto& hit : index->index->search(q, k, accept)) {
            const auto* c = index->corpus.find(hit.chunk_id);
            hits.push_back({{"chunk_id", hit.chunk_id},
                            {"score", hit.score},
                            {"kind", corpus::kind_name(c->kind)},
                            {"symbol", c->symbol ? json(*c->symbol) : json(nullptr)},
                            {"source_path", c->source_path}});
        }
        emit(out_json, hits);
    });
}

cv_status cv_generate(cv_context* ctx, const char* prompt, const char* mode, cv_index* index, const char* out_dir,
                      const char* expected_artifact, char** out_json) {
    return guarded([&] {
        require(ctx && prompt && mode && out_dir && out_json, "arguments must not be null");
        auto m = orchestrator::parse_mode(mode);
        if (!m) throw Error(Errc::InvalidArgument, "mode must be rag or fewshot");
        if (*m == orchestrator::Mode::Rag && !index) throw Error(Errc::InvalidArgument, "rag mode requires an index");

        auto prompts = PromptLibrary::load(ctx->settings.prompts_dir);
        auto gateway = ctx->session_gateway();
        auto sc = ctx->session_config();
        sc.mode = *m;
        sc.exec.work_dir = out_dir;
        if (expected_artifact && *expected_artifact) sc.exec.expected_artifact = std::string(expected_artifact);
        fs::create_directories(sc.exec.work_dir);

        orchestrator::Services services;
        services.gateway = gateway.get();
        services.prompts = &prompts;
        if (*m == orchestrator::Mode::Rag) {
            services.index = index->index.get();
            services.corpus = &index->corpus;
            services.embedder = index->embedder.get();
        }
        auto session = orchestrator::run_session(prompt, sc, services);
        emit(out_json, orchestrator::session_to_json(session));
    });
}

cv_status cv_bench(cv_context* ctx, const char* suite_dir, const char* modes, const char* variants, cv_index* index,
                   const char* out_dir, char** out_json) {
    return guarded([&] {
        require(ctx && suite_dir && modes && variants && out_dir && out_json, "arguments must not be null");
        bench::BenchConfig config;
        config.modes.clear();
        config.variants.clear();
        for (const auto& name : split_list(modes)) {
            auto m = orchestrator::parse_mode(name);
            if (!m) throw Error(Errc::InvalidArgument, "unknown mode '" + name + "'");
            if (std::find(config.modes.begin(), config.modes.end(), *m) == config.modes.end())
                config.modes.push_back(*m);
        }
        for (const auto& name : split_list(variants)) {
            auto v = bench::parse_variant(name);
            if (!v) throw Error(Errc::InvalidArgument, "unknown variant '" + name + "'");
            if (std::find(config.variants.begin(), config.variants.end(), *v) == config.variants.end())
                config.variants.push_back(*v);
        }
        if (config.modes.empty() || config.variants.empty())
            throw Error(Errc::InvalidArgument, "at least one mode and one variant are required");
        const bool wants_rag =
            std::find(config.modes.begin(), config.modes.end(), orchestrator::Mode::Rag) != config.modes.end();
        if (wants_rag && !index) throw Error(Errc::InvalidArgument, "rag mode requires an index");

        std::vector<std::string> warnings;
        auto tasks = bench::load_suite(suite_dir, &warnings);
        auto prompts = PromptLibrary::load(ctx->settings.prompts_dir);

        config.out_dir = out_dir;
        config.jobs = ctx->settings.jobs;
        config.session = ctx->session_config();
        config.lpips_plugin = ctx->settings.lpips_plugin;
        config.resize = ctx->settings.resize;

        bench::BenchServices services;
        services.prompts = &prompts;
        if (index) {
            services.index = index->index.get();
            services.corpus = &index->corpus;
            services.embedder = index->embedder.get();
        }
        const auto settings = ctx->settings;
        services.gateway = [ctx, settings](const bench::BenchmarkTask& task, orchestrator::Mode mode,
                                           bench::Variant variant) -> std::shared_ptr<llm::Gateway> {
            const auto key = bench::session_key(task.id, mode, variant);
            if (settings.transcripts_dir) {
                auto path = *settings.transcripts_dir / (key + ".jsonl");
                std::error_code ec;
                if (!fs::is_regular_file(path, ec)) throw Error(Errc::TranscriptMiss, "no transcript " + path.string());
                return std::make_shared<llm::ReplayBackend>(llm::Transcript::load(path), settings.replay_mode);
            }
            std::shared_ptr<llm::Gateway> upstream = ctx->remote_backend();
            if (settings.record_dir) {
                fs::create_directories(*settings.record_dir);
                return std::make_shared<llm::RecordBackend>(upstream, *settings.record_dir / (key + ".jsonl"));
            }
            return upstream;
        };

        auto report = bench::run_suite(tasks, config, services);
        bench::write_reports(report, out_dir);
        auto j = json::parse(bench::render_report(report, bench::ReportFormat::Json));
        j["warnings"] = warnings;
        emit(out_json, j);
    });
}

cv_status cv_score(cv_context* ctx, const char* image_a, const char* image_b, char** out_json) {
    return guarded([&] {
        require(ctx && image_a && image_b && out_json, "arguments must not be null");
        auto [a, b] = metrics::conform(metrics::read_png(image_a), metrics::read_png(image_b), ctx->settings.resize);
        json j;
        j["psnr"] = number_or_inf(metrics::psnr(a, b));
        j["ssim"] = metrics::ssim(a, b);
        j["lpips"] = nullptr;
        if (ctx->settings.lpips_plugin) {
            try {
                j["lpips"] = metrics::lpips(image_a, image_b, *ctx->settings.lpips_plugin);
            } catch (const Error& e) {
                if (e.code() != Errc::PluginMissing) throw;
                j["lpips_error"] = e.what();
            }
        }
        emit(out_json, j);
    });
}

cv_status cv_extract_errors(const char* log_text, char** out_json) {
    return guarded([&] {
        require(log_text && out_json, "arguments must not be null");
        json arr = json::array();
        for (const auto& r : executor::extract_tracebacks(log_text)) arr.push_back(traceback_json(r));
        emit(out_json, arr);
    });
}

}  // extern "C"
