#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace chatvis {

// Flat TOML subset used by task manifests and chatvis.toml:
//   key = "string" | 'string' | 42 | 1.5 | true | ["a", "b"]
// "[section]" headers prefix following keys with "section.". '#' starts a comment.
class KeyValueFile {
public:
    using Value = std::variant<std::string, double, bool, std::vector<std::string>>;

    static KeyValueFile parse(std::string_view content);
    static KeyValueFile load(const std::filesystem::path& path);

    bool contains(const std::string& key) const { return values_.count(key) != 0; }
    std::optional<std::string> get_string(const std::string& key) const;
    std::optional<double> get_number(const std::string& key) const;
    std::optional<bool> get_bool(const std::string& key) const;
    std::optional<std::vector<std::string>> get_list(const std::string& key) const;

    // Scalar values rendered as text ("5", "true", "abc"); lists joined by ','.
    std::optional<std::string> get_text(const std::string& key) const;

    const std::map<std::string, Value>& values() const { return values_; }

private:
    std::map<std::string, Value> values_;
};

}  // namespace chatvis
