#include "vecindex/embedder.hpp"

#include <cctype>
#include <cmath>

#include "common/error.hpp"
#include "common/text.hpp"

namespace chatvis::vecindex {

FallbackEmbedder::FallbackEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw Error(Errc::InvalidArgument, "embedding dimension must be positive");
}

std::string FallbackEmbedder::tag() const {
    if (dimension_ == kDefaultDimension) return kTag;
    return std::string(kTag) + "-d" + std::to_string(dimension_);
}

std::vector<std::string> FallbackEmbedder::tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        // Bytes >= 0x80 belong to multi-byte UTF-8 sequences; keep them inside words.
        if (std::isalnum(c) || c >= 0x80) {
            current += static_cast<char>(std::tolower(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::uint64_t FallbackEmbedder::fnv1a(std::string_view token) noexcept {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : token) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

Embedding FallbackEmbedder::embed(std::string_view text) {
    auto trimmed = text::trim(text);
    if (trimmed.empty()) throw Error(Errc::EmptyText, "cannot embed blank text");
    auto tokens = tokenize(trimmed);
    // Punctuation-only input still needs a direction: hash it whole.
    if (tokens.empty()) tokens.emplace_back(trimmed);
    Embedding v(dimension_, 0.0);
    for (const auto& t : tokens) v[fnv1a(t) % dimension_] += 1.0;
    normalize(v);
    return v;
}

double l2_norm(std::span<const double> v) noexcept {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

void normalize(std::span<double> v) {
    double n = l2_norm(v);
    if (!(n > 0.0) || !std::isfinite(n)) throw Error(Errc::EmptyText, "cannot normalize a zero or non-finite vector");
    for (double& x : v) x /= n;
}

}  // namespace chatvis::vecindex
