#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace chatvis {

// A chat prompt template: one system part and one user part, each with
// {{placeholder}} slots. File layout:
//
//   # comment lines (only before the first section)
//   === system ===
//   ...
//   === user ===
//   ...
struct PromptTemplate {
    std::string system;
    std::string user;

    static PromptTemplate parse(std::string_view content, std::string_view name = "template");
};

// decompose.txt, generate.txt and correct.txt. Files found in `dir` win over
// the copies compiled into the library.
class PromptLibrary {
public:
    static PromptLibrary builtin();
    static PromptLibrary load(const std::optional<std::filesystem::path>& dir);

    const PromptTemplate& decompose() const { return decompose_; }
    const PromptTemplate& generate() const { return generate_; }
    const PromptTemplate& correct() const { return correct_; }

private:
    PromptTemplate decompose_;
    PromptTemplate generate_;
    PromptTemplate correct_;
};

}  // namespace chatvis
