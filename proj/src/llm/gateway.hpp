#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "vecindex/embedder.hpp"

namespace chatvis::llm {

enum class Role { System, User, Assistant };

std::string_view role_name(Role role) noexcept;

struct ChatMessage {
    Role role = Role::User;
    std::string content;
    friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatRequest {
    std::string model;
    std::vector<ChatMessage> messages;
    double temperature = 0.0;
    std::optional<int> max_tokens;

    // messages non-empty, first role system|user, temperature >= 0, max_tokens > 0.
    void validate() const;

    // Field-order independent: object keys are emitted sorted.
    std::string canonical_json() const;
    std::string digest() const;

    // Concatenated content of all messages with the given role.
    std::string text_of(Role role) const;

    friend bool operator==(const ChatRequest&, const ChatRequest&) = default;
};

struct Usage {
    long long prompt_tokens = 0;
    long long completion_tokens = 0;
    friend bool operator==(const Usage&, const Usage&) = default;
};

struct ChatReply {
    std::string content;  // verbatim, untrimmed
    Usage usage;
    std::string provider_id;
    friend bool operator==(const ChatReply&, const ChatReply&) = default;
};

struct TranscriptEntry {
    std::optional<std::string> digest;  // absent: matches any request in ordered replay
    ChatReply reply;
};

// JSON-lines of {digest, content, usage}.
class Transcript {
public:
    Transcript() = default;
    explicit Transcript(std::vector<TranscriptEntry> entries) : entries_(std::move(entries)) {}

    static Transcript parse(std::string_view content);
    static Transcript load(const std::filesystem::path& path);
    static std::string entry_line(const TranscriptEntry& entry);
    std::string to_jsonl() const;

    const std::vector<TranscriptEntry>& entries() const noexcept { return entries_; }
    void append(TranscriptEntry entry) { entries_.push_back(std::move(entry)); }

private:
    std::vector<TranscriptEntry> entries_;
};

class Gateway {
public:
    virtual ~Gateway() = default;
    virtual ChatReply complete(const ChatRequest& request) = 0;
    std::size_t calls() const noexcept { return calls_.load(); }

protected:
    std::atomic<std::size_t> calls_{0};
};

struct RemoteConfig {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::chrono::milliseconds connect_timeout{10'000};
    std::chrono::milliseconds read_timeout{300'000};
    int max_retries = 3;
    std::chrono::milliseconds backoff_base{1'000};
    int max_in_flight = 4;

    // LLM_BASE_URL and LLM_API_KEY override the defaults when set.
    static RemoteConfig from_env();
};

// JSON-over-HTTP chat-completion client:
// POST {base_url}/chat/completions, reads choices[0].message.content.
class RemoteBackend final : public Gateway {
public:
    explicit RemoteBackend(RemoteConfig config);
    ~RemoteBackend() override;

    ChatReply complete(const ChatRequest& request) override;

    // POST {base_url}/embeddings with {model, input}; returns data[0].embedding as-is.
    std::vector<double> embed_raw(const std::string& model, std::string_view text);

    // Total HTTP requests sent, including retries.
    std::size_t http_attempts() const noexcept { return http_attempts_.load(); }

private:
    struct Response {
        int status = 0;
        std::string body;
        std::optional<double> retry_after;
    };
    Response post(const std::string& path, const std::string& body);
    std::string post_with_retry(const std::string& path, const std::string& body);

    RemoteConfig config_;
    std::string origin_;       // scheme://host[:port]
    std::string path_prefix_;  // e.g. "/v1"
    std::counting_semaphore<64> in_flight_;
    std::atomic<std::size_t> http_attempts_{0};
};

enum class ReplayMode { Ordered, Digest };

// Serves replies from a transcript. Never fabricates: an unmatched request
// raises TranscriptMiss.
class ReplayBackend final : public Gateway {
public:
    ReplayBackend(Transcript transcript, ReplayMode mode = ReplayMode::Ordered);

    ChatReply complete(const ChatRequest& request) override;

    std::size_t consumed() const;
    std::size_t remaining() const;
    bool is_consumed(std::size_t entry) const;

private:
    mutable std::mutex mutex_;
    Transcript transcript_;
    ReplayMode mode_;
    std::vector<bool> consumed_;
    std::size_t cursor_ = 0;
};

// Forwards to an upstream gateway and appends (digest, reply) to a sink file.
class RecordBackend final : public Gateway {
public:
    RecordBackend(std::shared_ptr<Gateway> upstream, std::filesystem::path sink);

    ChatReply complete(const ChatRequest& request) override;
    const Transcript& recorded() const noexcept { return recorded_; }

private:
    std::shared_ptr<Gateway> upstream_;
    std::filesystem::path sink_;
    std::mutex mutex_;
    Transcript recorded_;
};

// Embeddings from the remote endpoint. The dimension is taken from the
// first response and frozen into the tag "remote:<model>:<dim>".
class RemoteEmbedder final : public vecindex::Embedder {
public:
    RemoteEmbedder(std::shared_ptr<RemoteBackend> backend, std::string model,
                   std::optional<std::size_t> expected_dimension = std::nullopt);

    std::string tag() const override;
    std::size_t dimension() const override;
    vecindex::Embedding embed(std::string_view text) override;

    static std::string make_tag(const std::string& model, std::size_t dimension);

private:
    std::shared_ptr<RemoteBackend> backend_;
    std::string model_;
    mutable std::mutex mutex_;
    std::optional<std::size_t> dimension_;
};

}  // namespace chatvis::llm
