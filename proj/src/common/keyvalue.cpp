#include "common/keyvalue.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

#include "common/error.hpp"
#include "common/text.hpp"

namespace chatvis {

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
    throw Error(Errc::InvalidArgument, "line " + std::to_string(line_no) + ": " + what);
}

// Parses a quoted string starting at s[pos] (which must be a quote). Advances pos past it.
std::string parse_quoted(std::string_view s, std::size_t& pos, std::size_t line_no) {
    const char quote = s[pos++];
    std::string out;
    while (pos < s.size() && s[pos] != quote) {
        char c = s[pos++];
        if (quote == '"' && c == '\\' && pos < s.size()) {
            char e = s[pos++];
            switch (e) {
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                default: fail(line_no, std::string("unsupported escape \\") + e);
            }
        } else {
            out += c;
        }
    }
    if (pos >= s.size()) fail(line_no, "unterminated string");
    ++pos;
    return out;
}

std::string_view strip_comment(std::string_view rest) {
    auto t = text::trim(rest);
    if (!t.empty() && t.front() != '#') return {};
    return t;
}

KeyValueFile::Value parse_value(std::string_view raw, std::size_t line_no) {
    auto v = text::trim(raw);
    if (v.empty()) fail(line_no, "missing value");
    std::size_t pos = 0;
    if (v[0] == '"' || v[0] == '\'') {
        auto s = parse_quoted(v, pos, line_no);
        if (!text::trim(v.substr(pos)).empty() && strip_comment(v.substr(pos)).empty())
            fail(line_no, "trailing characters after string");
        return s;
    }
    if (v[0] == '[') {
        std::vector<std::string> items;
        pos = 1;
        for (;;) {
            while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos]))) ++pos;
            if (pos >= v.size()) fail(line_no, "unterminated list");
            if (v[pos] == ']') break;
            if (v[pos] != '"' && v[pos] != '\'') fail(line_no, "list items must be strings");
            items.push_back(parse_quoted(v, pos, line_no));
            while (pos < v.size() && std::isspace(static_cast<unsigned char>(v[pos]))) ++pos;
            if (pos < v.size() && v[pos] == ',') ++pos;
        }
        return items;
    }
    auto hash = v.find('#');
    auto token = text::trim(v.substr(0, hash));
    if (token == "true") return true;
    if (token == "false") return false;
    double number = 0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), number);
    if (ec != std::errc() || ptr != token.data() + token.size())
        fail(line_no, "unrecognised value '" + std::string(token) + "'");
    return number;
}

}  // namespace

KeyValueFile KeyValueFile::parse(std::string_view content) {
    KeyValueFile file;
    std::string prefix;
    std::size_t line_no = 0;
    for (const auto& raw : text::split_lines(content)) {
        ++line_no;
        auto line = text::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            auto close = line.find(']');
            if (close == std::string_view::npos) fail(line_no, "unterminated section header");
            auto name = text::trim(line.substr(1, close - 1));
            prefix = name.empty() ? "" : std::string(name) + ".";
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) fail(line_no, "expected key = value");
        auto key = text::trim(line.substr(0, eq));
        if (key.empty()) fail(line_no, "empty key");
        file.values_[prefix + std::string(key)] = parse_value(line.substr(eq + 1), line_no);
    }
    return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
    return parse(text::read_file(path));
}

std::optional<std::string> KeyValueFile::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (auto p = std::get_if<std::string>(&it->second)) return *p;
    return std::nullopt;
}

std::optional<double> KeyValueFile::get_number(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (auto p = std::get_if<double>(&it->second)) return *p;
    return std::nullopt;
}

std::optional<bool> KeyValueFile::get_bool(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (auto p = std::get_if<bool>(&it->second)) return *p;
    return std::nullopt;
}

std::optional<std::vector<std::string>> KeyValueFile::get_list(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    if (auto p = std::get_if<std::vector<std::string>>(&it->second)) return *p;
    return std::nullopt;
}

std::optional<std::string> KeyValueFile::get_text(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::string>) {
                return v;
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else if constexpr (std::is_same_v<T, double>) {
                if (v == static_cast<double>(static_cast<long long>(v)))
                    return std::to_string(static_cast<long long>(v));
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.17g", v);
                return buf;
            } else {
                return text::join(v, ",");
            }
        },
        it->second);
}

}  // namespace chatvis
