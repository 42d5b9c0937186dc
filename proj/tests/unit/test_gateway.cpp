#include "doctest.h"

#include <nlohmann/json.hpp>

#include "common/error.hpp"
#include "common/text.hpp"
#include "llm/gateway.hpp"
#include "stub_llm_server.hpp"
#include "temp_dir.hpp"

using namespace chatvis;
using namespace chatvis::llm;

namespace {

ChatRequest make_request(const std::string& user, const std::string& system = "sys") {
    ChatRequest r;
    r.model = "m";
    r.messages = {{Role::System, system}, {Role::User, user}};
    return r;
}

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return Errc::InvalidArgument;
}

RemoteConfig stub_config(const testing::StubLlmServer& server) {
    RemoteConfig cfg;
    cfg.base_url = server.base_url();
    cfg.api_key = "test-key";
    cfg.backoff_base = std::chrono::milliseconds(1);
    cfg.connect_timeout = std::chrono::milliseconds(2000);
    cfg.read_timeout = std::chrono::milliseconds(5000);
    return cfg;
}

}  // namespace

TEST_CASE("request validation") {
    ChatRequest r;
    CHECK(code_of([&] { r.validate(); }) == Errc::InvalidArgument);
    r.messages = {{Role::Assistant, "x"}};
    CHECK(code_of([&] { r.validate(); }) == Errc::InvalidArgument);
    r = make_request("u");
    r.temperature = -1;
    CHECK(code_of([&] { r.validate(); }) == Errc::InvalidArgument);
    r = make_request("u");
    r.max_tokens = 0;
    CHECK(code_of([&] { r.validate(); }) == Errc::InvalidArgument);
}

TEST_CASE("digest depends only on field values") {
    ChatRequest a = make_request("hello");
    ChatRequest b;
    b.messages.push_back({Role::System, "sys"});
    b.messages.push_back({Role::User, "hello"});
    b.model = "m";
    CHECK(a.digest() == b.digest());
    CHECK(a.canonical_json() == b.canonical_json());
    CHECK(a.digest() != make_request("hello!").digest());
    b.max_tokens = 10;
    CHECK(a.digest() != b.digest());
}

TEST_CASE("transcript jsonl round trip") {
    Transcript t({{std::string("abc"), {"reply one", {1, 2}, ""}}, {std::nullopt, {"two\n", {0, 0}, ""}}});
    auto back = Transcript::parse(t.to_jsonl());
    REQUIRE(back.entries().size() == 2);
    CHECK(back.entries()[0].digest == "abc");
    CHECK(back.entries()[0].reply.content == "reply one");
    CHECK(back.entries()[0].reply.usage == Usage{1, 2});
    CHECK_FALSE(back.entries()[1].digest.has_value());
    CHECK(back.entries()[1].reply.content == "two\n");
    CHECK(code_of([] { Transcript::parse("not json\n"); }) == Errc::InvalidArgument);
}

TEST_CASE("ordered replay") {
    auto req = make_request("first");
    Transcript t({{req.digest(), {"A", {}, ""}}, {std::nullopt, {"B", {}, ""}}});
    ReplayBackend replay(t);
    CHECK(replay.complete(req).content == "A");
    CHECK(replay.is_consumed(0));
    CHECK_FALSE(replay.is_consumed(1));
    CHECK(replay.complete(make_request("anything")).content == "B");
    CHECK(replay.consumed() == 2);
    CHECK(replay.remaining() == 0);
    CHECK(code_of([&] { replay.complete(req); }) == Errc::TranscriptMiss);
}

TEST_CASE("ordered replay rejects a digest mismatch") {
    Transcript t({{make_request("expected").digest(), {"A", {}, ""}}});
    ReplayBackend replay(t);
    CHECK(code_of([&] { replay.complete(make_request("other")); }) == Errc::TranscriptMiss);
    CHECK(replay.consumed() == 0);
}

TEST_CASE("digest replay matches out of order") {
    auto r1 = make_request("one"), r2 = make_request("two");
    Transcript t({{r1.digest(), {"1", {}, ""}}, {r2.digest(), {"2", {}, ""}}});
    ReplayBackend replay(t, ReplayMode::Digest);
    CHECK(replay.complete(r2).content == "2");
    CHECK(replay.is_consumed(1));
    CHECK_FALSE(replay.is_consumed(0));
    CHECK(replay.complete(r1).content == "1");
    CHECK(code_of([&] { replay.complete(r1); }) == Errc::TranscriptMiss);
}

TEST_CASE("record backend against the stub server") {
    testing::StubLlmServer server;
    testing::TempDir dir;
    auto remote = std::make_shared<RemoteBackend>(stub_config(server));
    RecordBackend record(remote, dir / "rec.jsonl");
    auto req = make_request("say OK");
    auto reply = record.complete(req);
    CHECK(reply.content == "OK");
    CHECK(reply.usage == Usage{11, 7});

    auto sink = Transcript::load(dir / "rec.jsonl");
    REQUIRE(sink.entries().size() == 1);
    CHECK(sink.entries()[0].digest == req.digest());
    CHECK(sink.entries()[0].reply.content == "OK");

    auto seen = server.requests();
    REQUIRE(seen.size() == 1);
    CHECK(seen[0].path == "/v1/chat/completions");
    CHECK(seen[0].authorization == "Bearer test-key");
    auto body = nlohmann::json::parse(seen[0].body);
    CHECK(body["messages"][1]["content"] == "say OK");
    CHECK(body["temperature"] == 0.0);

    // The recorded file replays the same answer without the server.
    ReplayBackend replay(sink, ReplayMode::Digest);
    CHECK(replay.complete(req).content == "OK");
}

TEST_CASE("reply content is kept verbatim") {
    testing::StubLlmServer server;
    server.enqueue_completion("  padded\n\n");
    RemoteBackend remote(stub_config(server));
    CHECK(remote.complete(make_request("x")).content == "  padded\n\n");
}

TEST_CASE("rate limiting retries at most R times") {
    testing::StubLlmServer server;
    for (int i = 0; i < 4; ++i) server.enqueue({429, "{}", {{"Retry-After", "0"}}});
    auto cfg = stub_config(server);
    cfg.max_retries = 3;
    RemoteBackend remote(cfg);
    CHECK(code_of([&] { remote.complete(make_request("x")); }) == Errc::RateLimited);
    CHECK(remote.http_attempts() == 4);

    server.enqueue({429, "{}", {}});
    CHECK(remote.complete(make_request("x")).content == "OK");
    CHECK(remote.http_attempts() == 6);
}

TEST_CASE("HTTP failures map onto gateway errors") {
    testing::StubLlmServer server;
    RemoteBackend remote(stub_config(server));
    server.enqueue({401, "{}", {}});
    CHECK(code_of([&] { remote.complete(make_request("x")); }) == Errc::AuthFailure);
    server.enqueue({503, "down", {}});
    CHECK(code_of([&] { remote.complete(make_request("x")); }) == Errc::EndpointUnreachable);
    server.enqueue({200, "not json", {}});
    CHECK(code_of([&] { remote.complete(make_request("x")); }) == Errc::MalformedProviderResponse);
    server.enqueue({200, R"({"choices": []})", {}});
    CHECK(code_of([&] { remote.complete(make_request("x")); }) == Errc::MalformedProviderResponse);
}

TEST_CASE("unreachable endpoint") {
    RemoteConfig cfg;
    cfg.base_url = "http://127.0.0.1:1/v1";
    cfg.connect_timeout = std::chrono::milliseconds(500);
    RemoteBackend remote(cfg);
    CHECK(code_of([&] { remote.complete(make_request("x")); }) == Errc::EndpointUnreachable);
}

TEST_CASE("remote embedder freezes its dimension") {
    testing::StubLlmServer server;
    server.enqueue({200, testing::StubLlmServer::embedding({3.0, 4.0}), {}});
    server.enqueue({200, testing::StubLlmServer::embedding({1.0, 0.0, 0.0}), {}});
    auto remote = std::make_shared<RemoteBackend>(stub_config(server));
    RemoteEmbedder embedder(remote, "embed-model");
    auto v = embedder.embed("hello");
    CHECK(v == std::vector<double>{0.6, 0.8});
    CHECK(embedder.dimension() == 2);
    CHECK(embedder.tag() == "remote:embed-model:2");
    CHECK(code_of([&] { embedder.embed("again"); }) == Errc::DimensionMismatch);
}
