#include "executor/traceback.hpp"

#include <cctype>
#include <charconv>
#include <optional>
#include <regex>

#include "common/text.hpp"

namespace chatvis::executor {

namespace {

const std::regex& file_re() {
    static const std::regex re(R"re(\bFile\s+(?:"([^"]+)"|'([^']+)')(?:,\s*line\s+(\d+))?)re");
    return re;
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

struct Terminator {
    std::string error_class;
    std::string message;
};

// ^<identifier>(Error|Exception) followed by ':', whitespace or end of line.
// Hand-rolled: std::regex recursion is unsafe on very long output lines.
std::optional<Terminator> match_terminator(std::string_view line) {
    auto ident_start = [](char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; };
    auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; };
    if (line.empty() || !ident_start(line[0])) return std::nullopt;
    std::size_t end = 1;
    while (end < line.size() && ident_char(line[end])) ++end;
    auto name = line.substr(0, end);
    if (!ends_with(name, "Error") && !ends_with(name, "Exception")) return std::nullopt;
    if (end < line.size() && line[end] != ':' && !std::isspace(static_cast<unsigned char>(line[end])))
        return std::nullopt;
    auto rest = line.substr(end);
    if (!rest.empty() && rest.front() == ':') rest.remove_prefix(1);
    return Terminator{std::string(name), std::string(text::trim(rest))};
}

bool mentions_file(std::string_view line) { return line.find("File") != std::string_view::npos; }

}  // namespace

std::string TracebackRecord::text() const { return text::join(lines, "\n"); }

bool is_file_line(std::string_view line) {
    return mentions_file(line) && std::regex_search(line.begin(), line.end(), file_re());
}

std::vector<TracebackRecord> extract_tracebacks(std::string_view output) {
    std::vector<TracebackRecord> records;
    std::optional<TracebackRecord> open;

    for (auto& line : text::split_lines(output)) {
        // Strip a CR only for matching; the record keeps the raw line.
        std::string_view view(line);
        if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
        std::string probe(view);

        if (!open) {
            if (!is_file_line(probe)) continue;
            open.emplace();
        }
        open->lines.push_back(line);

        std::smatch fm;
        if (mentions_file(probe) && std::regex_search(probe, fm, file_re()) && fm[3].matched) {
            int line_no = 0;
            auto digits = fm[3].str();
            auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), line_no);
            if (ec == std::errc()) open->locations.push_back({fm[1].matched ? fm[1].str() : fm[2].str(), line_no});
        }

        if (auto term = match_terminator(probe)) {
            open->error_class = std::move(term->error_class);
            open->error_message = std::move(term->message);
            records.push_back(std::move(*open));
            open.reset();
        }
    }
    if (open) {
        open->error_class = kUnknownErrorClass;
        records.push_back(std::move(*open));
    }
    return records;
}

}  // namespace chatvis::executor
