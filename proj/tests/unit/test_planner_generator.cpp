#include "doctest.h"

#include "common/error.hpp"
#include "common/prompts.hpp"
#include "corpus/corpus.hpp"
#include "generator/generator.hpp"
#include "planner/planner.hpp"
#include "vecindex/embedder.hpp"
#include "vecindex/index.hpp"

using namespace chatvis;
using namespace chatvis::planner;
using namespace chatvis::generator;

namespace {

Errc code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an Error");
    return Errc::InvalidArgument;
}

corpus::DocChunk make_chunk(std::string id, corpus::ChunkKind kind, std::optional<std::string> symbol,
                            std::string text) {
    corpus::DocChunk c;
    c.id = std::move(id);
    c.kind = kind;
    c.symbol = std::move(symbol);
    c.source_path = c.id;
    c.text = std::move(text);
    return c;
}

struct SmallIndex {
    corpus::Corpus corpus;
    vecindex::FallbackEmbedder embedder;
    vecindex::VectorIndex index{vecindex::FallbackEmbedder::kDefaultDimension, vecindex::FallbackEmbedder::kTag};

    SmallIndex() {
        corpus = corpus::Corpus(
            {make_chunk("contour", corpus::ChunkKind::ApiDoc, "Contour",
                        "Contour(Input, ContourBy, Isosurfaces) extracts isosurfaces"),
             make_chunk("tube", corpus::ChunkKind::ApiDoc, "Tube", "Tube(Input, Radius) wraps lines in tubes"),
             make_chunk("example", corpus::ChunkKind::CodeSnippet, std::nullopt,
                        "contour = Contour(Input=reader)\nShow(contour)")},
            "fp");
        for (const auto& c : corpus.chunks()) index.add(c.id, embedder.embed(c.text));
    }
};

}  // namespace

TEST_CASE("parse_expansion") {
    auto steps = parse_expansion("1. OpenDataFile\n2. Contour");
    REQUIRE(steps.size() == 2);
    CHECK(steps[0] == OperationStep{1, "OpenDataFile", std::string("OpenDataFile")});
    CHECK(steps[1] == OperationStep{2, "Contour", std::string("Contour")});

    CHECK(code_of([] { parse_expansion("\n\n"); }) == Errc::NoOperations);

    auto one = parse_expansion("- Show the tube filter");
    REQUIRE(one.size() == 1);
    CHECK(one[0].description == "Show the tube filter");
    CHECK(one[0].api_hint == "Show");

    auto mixed = parse_expansion("  3) read the file\n\n* Render\n");
    REQUIRE(mixed.size() == 2);
    CHECK(mixed[0].index == 1);
    CHECK(mixed[0].description == "read the file");
    CHECK_FALSE(mixed[0].api_hint.has_value());
    CHECK(mixed[1].index == 2);
}

TEST_CASE("parse_expansion is idempotent over render_steps") {
    for (const char* raw : {"1. OpenDataFile 'a.vtk'\n2. Contour by density\n3. SaveScreenshot 'x.png'",
                            "- Show the tube filter\n- Show the glyph filter", "Render"}) {
        auto steps = parse_expansion(raw);
        CHECK(parse_expansion(render_steps(steps)) == steps);
    }
}

TEST_CASE("api hints") {
    CHECK(extract_api_hint("apply a Clip with a plane") == "Clip");
    CHECK(extract_api_hint("GetActiveViewOrCreate RenderView") == "GetActiveViewOrCreate");
    CHECK_FALSE(extract_api_hint("render everything").has_value());
}

TEST_CASE("decomposition request") {
    auto lib = PromptLibrary::builtin();
    const std::string prompt = "Load a.vtk and save a screenshot with white background";
    auto req = build_decomposition_request(prompt, lib.decompose(), "m");
    REQUIRE(req.messages.size() == 2);
    CHECK(req.messages[1].content.find(prompt) != std::string::npos);
    CHECK(req.messages[0].content.find("SaveScreenshot with a desired background color") != std::string::npos);
    CHECK(req.messages[0].content.find("plain SaveScreenshot") != std::string::npos);
    CHECK(build_decomposition_request("other", lib.decompose(), "m").messages[0] == req.messages[0]);
}

TEST_CASE("decompose keeps the raw reply") {
    auto lib = PromptLibrary::builtin();
    llm::ReplayBackend gw(llm::Transcript({{std::nullopt, {"1. Sphere\n2. Show\n", {}, ""}}}));
    auto plan = decompose("draw a sphere", gw, lib.decompose(), "m");
    CHECK(plan.user_prompt == "draw a sphere");
    CHECK(plan.raw_expansion == "1. Sphere\n2. Show\n");
    CHECK(plan.steps.size() == 2);
}

TEST_CASE("retrieval") {
    SmallIndex s;
    SUBCASE("no steps") {
        auto b = retrieve_context({}, s.index, s.corpus, s.embedder);
        CHECK(b.empty());
        CHECK(b.total_chars == 0);
        CHECK(render_context(b).empty());
    }
    SUBCASE("step equal to a chunk's text scores 1.0") {
        std::vector<OperationStep> steps{{1, s.corpus.find("tube")->text, std::nullopt}};
        auto b = retrieve_context(steps, s.index, s.corpus, s.embedder, {.k = 1});
        REQUIRE(b.chunk_count() == 1);
        CHECK(b.selections[0].chunks[0].chunk.id == "tube");
        CHECK(b.selections[0].chunks[0].score == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("a chunk retrieved by two steps appears once, under the first") {
        std::vector<OperationStep> steps{{1, "Contour isosurfaces", std::nullopt},
                                         {2, "Contour isosurfaces again", std::nullopt}};
        auto b = retrieve_context(steps, s.index, s.corpus, s.embedder, {.k = 3});
        std::vector<std::string> ids;
        for (const auto& sel : b.selections)
            for (const auto& c : sel.chunks) ids.push_back(c.chunk.id);
        std::sort(ids.begin(), ids.end());
        CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
        REQUIRE_FALSE(b.selections.empty());
        CHECK(b.selections[0].step.index == 1);
        bool first_has_contour = false;
        for (const auto& c : b.selections[0].chunks) first_has_contour |= c.chunk.id == "contour";
        CHECK(first_has_contour);
    }
    SUBCASE("kind filter and budget") {
        std::vector<OperationStep> steps{{1, "Contour reader Show", std::nullopt}};
        auto snippets = retrieve_context(steps, s.index, s.corpus, s.embedder,
                                         {.k = 5, .kind_filter = corpus::ChunkKind::CodeSnippet});
        REQUIRE(snippets.chunk_count() == 1);
        CHECK(snippets.selections[0].chunks[0].chunk.id == "example");

        for (std::size_t budget : {0u, 10u, 60u, 100u, 1000u}) {
            auto b = retrieve_context(steps, s.index, s.corpus, s.embedder, {.k = 5, .budget_chars = budget});
            CHECK(b.total_chars <= budget);
            std::size_t sum = 0;
            for (const auto& sel : b.selections)
                for (const auto& c : sel.chunks) sum += c.chunk.text.size();
            CHECK(sum == b.total_chars);
        }
    }
}

TEST_CASE("generation request") {
    auto lib = PromptLibrary::builtin();
    SmallIndex s;
    SUBCASE("empty bundle still carries the prompt and the code-block rule") {
        auto req = build_generation_request("draw a cone", {}, lib.generate(), "m");
        CHECK(req.messages[1].content.find("draw a cone") != std::string::npos);
        CHECK(req.messages[0].content.find("fenced code block") != std::string::npos);
    }
    SUBCASE("chunk labels appear as markers") {
        ContextBundle b;
        b.selections.push_back({{1, "contour", std::nullopt}, {{*s.corpus.find("contour"), 0.9}}});
        b.total_chars = s.corpus.find("contour")->text.size();
        auto req = build_generation_request("contour it", b, lib.generate(), "m");
        CHECK(req.messages[1].content.find("\n### Contour (api-doc)\n") != std::string::npos);
        CHECK(req.messages[1].content.find(s.corpus.find("contour")->text) != std::string::npos);
        CHECK(req.messages[0] == build_generation_request("x", {}, lib.generate(), "m").messages[0]);
    }
    CHECK(code_of([&] { build_generation_request("  ", {}, lib.generate(), "m"); }) == Errc::InvalidArgument);
}

TEST_CASE("extract_script") {
    auto one = extract_script({"Sure:\n```python\nfrom x import *\n```\nDone.", {}, ""});
    CHECK(one.text == "from x import *");
    CHECK(one.origin == ScriptOrigin::FencedBlock);
    CHECK_FALSE(one.reply_digest.empty());

    const std::string small(10, 'a'), big(200, 'b');
    auto two = extract_script({"```\n" + small + "\n```\ntext\n```python\n" + big + "\n```\n", {}, ""});
    CHECK(two.text == big);

    auto whole = extract_script({"print(1)\n", {}, ""});
    CHECK(whole.text == "print(1)\n");
    CHECK(whole.origin == ScriptOrigin::WholeReply);
    CHECK(origin_name(whole.origin) == "whole-reply");

    CHECK(code_of([] { extract_script({" \n", {}, ""}); }) == Errc::EmptyReply);
}
