#include "common/prompts.hpp"

#include "builtin_prompts.hpp"
#include "common/error.hpp"
#include "common/text.hpp"

namespace chatvis {

namespace {

std::string strip_trailing_newlines(std::string s) {
    while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
    return s;
}

PromptTemplate from_file_or(const std::optional<std::filesystem::path>& dir, const char* name,
                            std::string_view fallback) {
    if (dir) {
        auto path = *dir / name;
        std::error_code ec;
        if (std::filesystem::is_regular_file(path, ec)) return PromptTemplate::parse(text::read_file(path), name);
    }
    return PromptTemplate::parse(fallback, name);
}

}  // namespace

PromptTemplate PromptTemplate::parse(std::string_view content, std::string_view name) {
    enum class Section { None, System, User } section = Section::None;
    std::string system, user;
    bool seen_system = false, seen_user = false;
    for (const auto& line : text::split_lines(content)) {
        auto t = text::trim(line);
        if (t == "=== system ===") {
            section = Section::System;
            seen_system = true;
            continue;
        }
        if (t == "=== user ===") {
            section = Section::User;
            seen_user = true;
            continue;
        }
        switch (section) {
            case Section::None:
                if (!t.empty() && t.front() != '#')
                    throw Error(Errc::InvalidArgument, std::string(name) + ": text before first section");
                break;
            case Section::System: system += line + '\n'; break;
            case Section::User: user += line + '\n'; break;
        }
    }
    if (!seen_system || !seen_user)
        throw Error(Errc::InvalidArgument, std::string(name) + ": needs '=== system ===' and '=== user ===' sections");
    return {strip_trailing_newlines(std::move(system)), strip_trailing_newlines(std::move(user))};
}

PromptLibrary PromptLibrary::builtin() { return load(std::nullopt); }

PromptLibrary PromptLibrary::load(const std::optional<std::filesystem::path>& dir) {
    PromptLibrary lib;
    lib.decompose_ = from_file_or(dir, "decompose.txt", builtin_prompts::kDecompose);
    lib.generate_ = from_file_or(dir, "generate.txt", builtin_prompts::kGenerate);
    lib.correct_ = from_file_or(dir, "correct.txt", builtin_prompts::kCorrect);
    return lib;
}

}  // namespace chatvis
