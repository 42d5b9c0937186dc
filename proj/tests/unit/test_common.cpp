#include "doctest.h"

#include "common/error.hpp"
#include "common/keyvalue.hpp"
#include "common/prompts.hpp"
#include "common/text.hpp"

using namespace chatvis;

TEST_CASE("error text starts with the error name") {
    Error e(Errc::CorruptIndex, "bad header");
    CHECK(std::string(e.what()) == "CorruptIndex: bad header");
    CHECK(e.code() == Errc::CorruptIndex);
    RateLimitedError r("slow down", 2.5);
    CHECK(r.code() == Errc::RateLimited);
    CHECK(r.retry_after() == 2.5);
}

TEST_CASE("split_lines drops only the final newline") {
    CHECK(text::split_lines("a\nb\n") == std::vector<std::string>{"a", "b"});
    CHECK(text::split_lines("a\n\nb") == std::vector<std::string>{"a", "", "b"});
    CHECK(text::split_lines("").empty());
}

TEST_CASE("split_command honours quotes") {
    CHECK(text::split_command("python3 -c 'print(1)'") == std::vector<std::string>{"python3", "-c", "print(1)"});
    CHECK(text::split_command("  a   \"b c\" ") == std::vector<std::string>{"a", "b c"});
    CHECK(text::split_command("").empty());
}

TEST_CASE("render substitutes known placeholders only") {
    CHECK(text::render("{{a}} and {{b}}", {{"a", "x"}}) == "x and {{b}}");
}

TEST_CASE("fixed and sha256") {
    CHECK(text::fixed(40.1, 1) == "40.1");
    CHECK(text::fixed(0.76, 3) == "0.760");
    CHECK(text::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("key-value files") {
    auto kv = KeyValueFile::parse(
        "# comment\n"
        "id = \"task\"  # trailing\n"
        "count = 5\n"
        "flag = true\n"
        "data = [\"a.vtk\", 'b.vtk']\n"
        "[chatvis]\n"
        "model = 'gpt-4o'\n");
    CHECK(kv.get_string("id") == "task");
    CHECK(kv.get_number("count") == 5.0);
    CHECK(kv.get_text("count") == "5");
    CHECK(kv.get_bool("flag") == true);
    CHECK(kv.get_list("data") == std::vector<std::string>{"a.vtk", "b.vtk"});
    CHECK(kv.get_string("chatvis.model") == "gpt-4o");
    CHECK_FALSE(kv.contains("missing"));
    CHECK_THROWS_AS(KeyValueFile::parse("x = \"open\n"), Error);
    CHECK_THROWS_AS(KeyValueFile::parse("x = nonsense\n"), Error);
}

TEST_CASE("prompt templates") {
    auto t = PromptTemplate::parse("# c\n=== system ===\nsys {{x}}\n=== user ===\nuser {{y}}\n");
    CHECK(text::trim(t.system) == "sys {{x}}");
    CHECK(text::trim(t.user) == "user {{y}}");
    CHECK_THROWS_AS(PromptTemplate::parse("no sections"), Error);

    auto lib = PromptLibrary::builtin();
    CHECK(lib.decompose().user.find("{{user_prompt}}") != std::string::npos);
    CHECK_FALSE(lib.generate().system.empty());
    CHECK_FALSE(lib.correct().system.empty());
}
