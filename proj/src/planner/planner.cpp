#include "planner/planner.hpp"

#include <cctype>
#include <regex>

#include "common/error.hpp"
#include "common/text.hpp"

namespace chatvis::planner {

llm::ChatRequest build_decomposition_request(std::string_view user_prompt, const PromptTemplate& tmpl,
                                             const std::string& model) {
    if (text::is_blank(user_prompt)) throw Error(Errc::InvalidArgument, "user prompt is empty");
    const std::map<std::string, std::string> vars{{"user_prompt", std::string(user_prompt)}};
    llm::ChatRequest req;
    req.model = model;
    req.messages.push_back({llm::Role::System, text::render(tmpl.system, vars)});
    req.messages.push_back({llm::Role::User, text::render(tmpl.user, vars)});
    return req;
}

namespace {

// "1." / "12)" / "-" / "*" / "•" / ")" followed by whitespace or end of line.
const std::regex& marker_re() {
    static const std::regex re(R"(^(?:\d+[.)]|[-*)]|\xE2\x80\xA2)(?:\s+|$))");
    return re;
}

std::string strip_markers(std::string_view line) {
    std::string s(text::trim(line));
    std::smatch m;
    while (std::regex_search(s, m, marker_re())) s = std::string(text::trim(std::string_view(s).substr(m.length(0))));
    return s;
}

bool is_fence(std::string_view line) { return text::trim(line).substr(0, 3) == "```"; }

}  // namespace

std::optional<std::string> extract_api_hint(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size()) {
        auto is_ident = [](unsigned char c) { return std::isalnum(c) || c == '_'; };
        while (i < line.size() && !is_ident(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t start = i;
        while (i < line.size() && is_ident(static_cast<unsigned char>(line[i]))) ++i;
        auto token = line.substr(start, i - start);
        if (token.empty()) break;
        bool upper_first = std::isupper(static_cast<unsigned char>(token[0])) != 0;
        bool has_lower = false, alnum_only = true;
        for (unsigned char c : token) {
            if (std::islower(c)) has_lower = true;
            if (!std::isalnum(c)) alnum_only = false;
        }
        if (upper_first && has_lower && alnum_only) return std::string(token);
    }
    return std::nullopt;
}

std::vector<OperationStep> parse_expansion(std::string_view raw) {
    std::vector<OperationStep> steps;
    for (const auto& line : text::split_lines(raw)) {
        auto description = strip_markers(line);
        if (description.empty() || is_fence(description)) continue;
        OperationStep step;
        step.index = static_cast<int>(steps.size()) + 1;
        step.api_hint = extract_api_hint(description);
        step.description = std::move(description);
        steps.push_back(std::move(step));
    }
    if (steps.empty()) throw Error(Errc::NoOperations, "expansion contains no operation lines");
    return steps;
}

std::string render_steps(const std::vector<OperationStep>& steps) {
    std::vector<std::string> lines;
    lines.reserve(steps.size());
    for (const auto& s : steps) lines.push_back(s.description);
    return text::join(lines, "\n");
}

DecompositionPlan decompose(std::string_view user_prompt, llm::Gateway& gateway, const PromptTemplate& tmpl,
                            const std::string& model) {
    auto request = build_decomposition_request(user_prompt, tmpl, model);
    auto reply = gateway.complete(request);
    DecompositionPlan plan;
    plan.user_prompt = std::string(user_prompt);
    plan.raw_expansion = reply.content;
    plan.steps = parse_expansion(reply.content);
    return plan;
}

}  // namespace chatvis::planner
