#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "llm/gateway.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <thread>

#include <nlohmann/json.hpp>

#include "common/error.hpp"
#include "common/text.hpp"

using nlohmann::json;

namespace chatvis::llm {

std::string_view role_name(Role role) noexcept {
    switch (role) {
        case Role::System: return "system";
        case Role::User: return "user";
        case Role::Assistant: return "assistant";
    }
    return "user";
}

void ChatRequest::validate() const {
    if (messages.empty()) throw Error(Errc::InvalidArgument, "chat request has no messages");
    if (messages.front().role == Role::Assistant)
        throw Error(Errc::InvalidArgument, "first message must be system or user");
    if (!(temperature >= 0.0)) throw Error(Errc::InvalidArgument, "temperature must be >= 0");
    if (max_tokens && *max_tokens <= 0) throw Error(Errc::InvalidArgument, "max_tokens must be positive");
}

namespace {

json request_json(const ChatRequest& r) {
    json messages = json::array();
    for (const auto& m : r.messages) messages.push_back({{"role", role_name(m.role)}, {"content", m.content}});
    json j;
    j["model"] = r.model;
    j["messages"] = std::move(messages);
    j["temperature"] = r.temperature;
    if (r.max_tokens) j["max_tokens"] = *r.max_tokens;
    return j;
}

}  // namespace

std::string ChatRequest::canonical_json() const { return request_json(*this).dump(); }

std::string ChatRequest::digest() const { return text::sha256_hex(canonical_json()); }

std::string ChatRequest::text_of(Role role) const {
    std::string out;
    for (const auto& m : messages) {
        if (m.role != role) continue;
        if (!out.empty()) out += '\n';
        out += m.content;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Transcript

Transcript Transcript::parse(std::string_view content) {
    Transcript t;
    std::size_t line_no = 0;
    for (const auto& line : text::split_lines(content)) {
        ++line_no;
        if (text::is_blank(line)) continue;
        try {
            auto j = json::parse(line);
            TranscriptEntry e;
            if (j.contains("digest") && !j["digest"].is_null()) e.digest = j["digest"].get<std::string>();
            e.reply.content = j.at("content").get<std::string>();
            if (j.contains("usage") && j["usage"].is_object()) {
                e.reply.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0LL);
                e.reply.usage.completion_tokens = j["usage"].value("completion_tokens", 0LL);
            }
            e.reply.provider_id = "replay";
            t.entries_.push_back(std::move(e));
        } catch (const json::exception& ex) {
            throw Error(Errc::InvalidArgument, "transcript line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return t;
}

Transcript Transcript::load(const std::filesystem::path& path) { return parse(text::read_file(path)); }

std::string Transcript::entry_line(const TranscriptEntry& entry) {
    json j;
    j["digest"] = entry.digest ? json(*entry.digest) : json(nullptr);
    j["content"] = entry.reply.content;
    j["usage"] = {{"prompt_tokens", entry.reply.usage.prompt_tokens},
                  {"completion_tokens", entry.reply.usage.completion_tokens}};
    return j.dump();
}

std::string Transcript::to_jsonl() const {
    std::string out;
    for (const auto& e : entries_) out += entry_line(e) + '\n';
    return out;
}

// ---------------------------------------------------------------------------
// Remote

RemoteConfig RemoteConfig::from_env() {
    RemoteConfig c;
    if (const char* url = std::getenv("LLM_BASE_URL"); url && *url) c.base_url = url;
    if (const char* key = std::getenv("LLM_API_KEY"); key && *key) c.api_key = key;
    return c;
}

RemoteBackend::RemoteBackend(RemoteConfig config)
    : config_(std::move(config)), in_flight_(std::clamp(config_.max_in_flight, 1, 64)) {
    static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
    std::smatch m;
    if (!std::regex_match(config_.base_url, m, url_re))
        throw Error(Errc::InvalidArgument, "unsupported endpoint URL '" + config_.base_url + "'");
    origin_ = m[1].str();
    path_prefix_ = m[2].matched ? m[2].str() : "";
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    if (config_.max_retries < 0) throw Error(Errc::InvalidArgument, "max_retries must be >= 0");
}

RemoteBackend::~RemoteBackend() = default;

RemoteBackend::Response RemoteBackend::post(const std::string& path, const std::string& body) {
    in_flight_.acquire();
    struct Release {
        std::counting_semaphore<64>& s;
        ~Release() { s.release(); }
    } release{in_flight_};

    ++http_attempts_;
    httplib::Client client(origin_);
    client.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(config_.connect_timeout).count(),
                                  static_cast<time_t>((config_.connect_timeout.count() % 1000) * 1000));
    client.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(config_.read_timeout).count(),
                            static_cast<time_t>((config_.read_timeout.count() % 1000) * 1000));
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    auto res = client.Post(path_prefix_ + path, headers, body, "application/json");
    if (!res) {
        throw Error(Errc::EndpointUnreachable,
                    origin_ + path_prefix_ + path + ": " + httplib::to_string(res.error()));
    }
    Response out;
    out.status = res->status;
    out.body = res->body;
    if (res->has_header("Retry-After")) {
        char* end = nullptr;
        auto value = res->get_header_value("Retry-After");
        double seconds = std::strtod(value.c_str(), &end);
        if (end != value.c_str() && std::isfinite(seconds) && seconds >= 0) out.retry_after = seconds;
    }
    return out;
}

std::string RemoteBackend::post_with_retry(const std::string& path, const std::string& body) {
    for (int attempt = 0;; ++attempt) {
        auto res = post(path, body);
        if (res.status >= 200 && res.status < 300) return res.body;
        if (res.status == 401 || res.status == 403)
            throw Error(Errc::AuthFailure, "HTTP " + std::to_string(res.status));
        if (res.status == 429) {
            double backoff = std::chrono::duration<double>(config_.backoff_base).count() * std::pow(2.0, attempt);
            double wait = std::max(backoff, res.retry_after.value_or(0.0));
            if (attempt >= config_.max_retries)
                throw RateLimitedError("HTTP 429 after " + std::to_string(attempt + 1) + " attempts", wait);
            std::this_thread::sleep_for(std::chrono::duration<double>(wait));
            continue;
        }
        if (res.status >= 500)
            throw Error(Errc::EndpointUnreachable, "HTTP " + std::to_string(res.status) + ": " + res.body);
        throw Error(Errc::MalformedProviderResponse,
                    "request rejected with HTTP " + std::to_string(res.status) + ": " + res.body);
    }
}

ChatReply RemoteBackend::complete(const ChatRequest& request) {
    request.validate();
    ++calls_;
    auto body = post_with_retry("/chat/completions", request_json(request).dump());
    try {
        auto j = json::parse(body);
        const auto& message = j.at("choices").at(0).at("message");
        ChatReply reply;
        if (!message.at("content").is_string())
            throw Error(Errc::MalformedProviderResponse, "choices[0].message.content is not a string");
        reply.content = message["content"].get<std::string>();
        if (j.contains("usage") && j["usage"].is_object()) {
            reply.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0LL);
            reply.usage.completion_tokens = j["usage"].value("completion_tokens", 0LL);
        }
        reply.provider_id = "remote:" + (j.contains("model") && j["model"].is_string() ? j["model"].get<std::string>()
                                                                                      : request.model);
        return reply;
    } catch (const json::exception& e) {
        throw Error(Errc::MalformedProviderResponse, e.what());
    }
}

std::vector<double> RemoteBackend::embed_raw(const std::string& model, std::string_view text) {
    json req{{"model", model}, {"input", std::string(text)}};
    std::string body;
    try {
        body = post_with_retry("/embeddings", req.dump());
    } catch (const Error& e) {
        if (e.code() == Errc::EndpointUnreachable) throw Error(Errc::ProviderUnavailable, e.what());
        throw;
    }
    try {
        return json::parse(body).at("data").at(0).at("embedding").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw Error(Errc::MalformedProviderResponse, e.what());
    }
}

// ---------------------------------------------------------------------------
// Replay

ReplayBackend::ReplayBackend(Transcript transcript, ReplayMode mode)
    : transcript_(std::move(transcript)), mode_(mode), consumed_(transcript_.entries().size(), false) {}

ChatReply ReplayBackend::complete(const ChatRequest& request) {
    request.validate();
    ++calls_;
    const auto digest = request.digest();
    std::lock_guard lock(mutex_);
    const auto& entries = transcript_.entries();
    if (mode_ == ReplayMode::Ordered) {
        if (cursor_ >= entries.size())
            throw Error(Errc::TranscriptMiss, digest + " (transcript exhausted after " +
                                                  std::to_string(entries.size()) + " entries)");
        const auto& entry = entries[cursor_];
        if (entry.digest && *entry.digest != digest)
            throw Error(Errc::TranscriptMiss, digest + " (entry " + std::to_string(cursor_ + 1) + " expects " +
                                                  *entry.digest + ")");
        consumed_[cursor_] = true;
        return entries[cursor_++].reply;
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (!consumed_[i] && entries[i].digest && *entries[i].digest == digest) {
            consumed_[i] = true;
            return entries[i].reply;
        }
    }
    throw Error(Errc::TranscriptMiss, digest);
}

std::size_t ReplayBackend::consumed() const {
    std::lock_guard lock(mutex_);
    return static_cast<std::size_t>(std::count(consumed_.begin(), consumed_.end(), true));
}

std::size_t ReplayBackend::remaining() const {
    std::lock_guard lock(mutex_);
    return consumed_.size() - static_cast<std::size_t>(std::count(consumed_.begin(), consumed_.end(), true));
}

bool ReplayBackend::is_consumed(std::size_t entry) const {
    std::lock_guard lock(mutex_);
    return entry < consumed_.size() && consumed_[entry];
}

// ---------------------------------------------------------------------------
// Record

RecordBackend::RecordBackend(std::shared_ptr<Gateway> upstream, std::filesystem::path sink)
    : upstream_(std::move(upstream)), sink_(std::move(sink)) {
    if (!upstream_) throw Error(Errc::InvalidArgument, "record backend needs an upstream gateway");
}

ChatReply RecordBackend::complete(const ChatRequest& request) {
    ++calls_;
    auto reply = upstream_->complete(request);
    TranscriptEntry entry{request.digest(), reply};
    std::lock_guard lock(mutex_);
    std::ofstream out(sink_, std::ios::binary | std::ios::app);
    if (!out) throw Error(Errc::IoFailure, "cannot append to transcript " + sink_.string());
    out << Transcript::entry_line(entry) << '\n';
    recorded_.append(std::move(entry));
    return reply;
}

// ---------------------------------------------------------------------------
// Remote embeddings

RemoteEmbedder::RemoteEmbedder(std::shared_ptr<RemoteBackend> backend, std::string model,
                               std::optional<std::size_t> expected_dimension)
    : backend_(std::move(backend)), model_(std::move(model)), dimension_(expected_dimension) {
    if (!backend_) throw Error(Errc::InvalidArgument, "remote embedder needs a backend");
}

std::string RemoteEmbedder::make_tag(const std::string& model, std::size_t dimension) {
    return "remote:" + model + ":" + std::to_string(dimension);
}

std::string RemoteEmbedder::tag() const {
    std::lock_guard lock(mutex_);
    return make_tag(model_, dimension_.value_or(0));
}

std::size_t RemoteEmbedder::dimension() const {
    std::lock_guard lock(mutex_);
    return dimension_.value_or(0);
}

vecindex::Embedding RemoteEmbedder::embed(std::string_view text) {
    if (text::is_blank(text)) throw Error(Errc::EmptyText, "cannot embed blank text");
    auto v = backend_->embed_raw(model_, text);
    if (v.empty()) throw Error(Errc::MalformedProviderResponse, "empty embedding");
    {
        std::lock_guard lock(mutex_);
        if (!dimension_) dimension_ = v.size();
        if (*dimension_ != v.size())
            throw Error(Errc::DimensionMismatch, "provider returned " + std::to_string(v.size()) +
                                                     " values, expected " + std::to_string(*dimension_));
    }
    vecindex::normalize(v);
    return v;
}

}  // namespace chatvis::llm
