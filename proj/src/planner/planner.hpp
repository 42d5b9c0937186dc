#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "common/prompts.hpp"
#include "llm/gateway.hpp"

namespace chatvis::planner {

struct OperationStep {
    int index = 1;  // 1-based, consecutive
    std::string description;
    std::optional<std::string> api_hint;
    friend bool operator==(const OperationStep&, const OperationStep&) = default;
};

struct DecompositionPlan {
    std::string user_prompt;
    std::vector<OperationStep> steps;
    std::string raw_expansion;
};

llm::ChatRequest build_decomposition_request(std::string_view user_prompt, const PromptTemplate& tmpl,
                                             const std::string& model);

// One step per non-blank line, list markers ("1.", "2)", "-", "*", ")") stripped.
// Throws NoOperations when nothing remains.
std::vector<OperationStep> parse_expansion(std::string_view raw);

// Descriptions joined by newlines; parse_expansion(render_steps(s)) == s.
std::string render_steps(const std::vector<OperationStep>& steps);

// First UpperCamelCase identifier token in the line, if any.
std::optional<std::string> extract_api_hint(std::string_view line);

DecompositionPlan decompose(std::string_view user_prompt, llm::Gateway& gateway, const PromptTemplate& tmpl,
                            const std::string& model);

}  // namespace chatvis::planner
