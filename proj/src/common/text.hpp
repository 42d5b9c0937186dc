#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace chatvis::text {

// Splits on '\n'. A trailing newline does not produce a final empty line;
// a trailing '\r' on each line is kept verbatim.
std::vector<std::string> split_lines(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string_view trim(std::string_view s) noexcept;
bool is_blank(std::string_view s) noexcept;
std::string to_lower(std::string_view s);

// Whitespace split honouring single and double quotes (no escapes, no expansion).
std::vector<std::string> split_command(std::string_view command);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view data);

// Replaces every "{{name}}" with vars[name]. Unknown placeholders are left as-is.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& vars);

// Fixed-point rendering with the given number of decimals ("%.*f").
std::string fixed(double value, int decimals);

}  // namespace chatvis::text
