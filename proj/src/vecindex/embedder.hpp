#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace chatvis::vecindex {

using Embedding = std::vector<double>;

// Produces unit-norm vectors of a fixed dimension. tag() names the provider
// and version; an index is only searchable with the embedder that built it.
class Embedder {
public:
    virtual ~Embedder() = default;
    virtual std::string tag() const = 0;
    virtual std::size_t dimension() const = 0;
    virtual Embedding embed(std::string_view text) = 0;
};

// Hashed bag-of-words: lowercase, split on non-alphanumerics, FNV-1a each
// token into one of `dimension` buckets, count, L2-normalize.
class FallbackEmbedder final : public Embedder {
public:
    static constexpr std::size_t kDefaultDimension = 256;
    static constexpr const char* kTag = "fallback-v1";

    explicit FallbackEmbedder(std::size_t dimension = kDefaultDimension);

    std::string tag() const override;
    std::size_t dimension() const override { return dimension_; }
    Embedding embed(std::string_view text) override;

    static std::vector<std::string> tokenize(std::string_view text);
    static std::uint64_t fnv1a(std::string_view token) noexcept;

private:
    std::size_t dimension_;
};

double l2_norm(std::span<const double> v) noexcept;

// Scales v to unit length. Throws EmptyText for the zero vector.
void normalize(std::span<double> v);

}  // namespace chatvis::vecindex
