#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "vecindex/embedder.hpp"

namespace chatvis::vecindex {

struct RetrievalHit {
    std::string chunk_id;
    double score = 0.0;  // cosine similarity of unit vectors
    friend bool operator==(const RetrievalHit&, const RetrievalHit&) = default;
};

// Exact flat cosine index. Rows are stored contiguously; every row is unit-norm.
class VectorIndex {
public:
    static constexpr double kNormTolerance = 1e-9;

    VectorIndex(std::size_t dimension, std::string embedder_tag);

    std::size_t dimension() const noexcept { return dimension_; }
    const std::string& embedder_tag() const noexcept { return embedder_tag_; }
    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }

    const std::string& id(std::size_t row) const { return ids_.at(row); }
    std::span<const double> vector(std::size_t row) const;

    // Rejects wrong dimensions, non-unit norms and duplicate ids.
    void add(std::string chunk_id, std::span<const double> embedding);

    // Top min(k, eligible) rows by descending dot product, ties by ascending id.
    // `accept` filters rows by id before ranking.
    std::vector<RetrievalHit> search(std::span<const double> query, std::size_t k,
                                     const std::function<bool(std::string_view)>& accept = {}) const;

    // Header line {dimension, count, embedder_tag, checksum} then one {id, values} line per entry.
    std::string serialize() const;
    static VectorIndex deserialize(std::string_view content,
                                   const std::optional<std::string>& required_tag = std::nullopt);

    void persist(const std::filesystem::path& path) const;
    static VectorIndex load(const std::filesystem::path& path,
                            const std::optional<std::string>& required_tag = std::nullopt);

    friend bool operator==(const VectorIndex&, const VectorIndex&) = default;

private:
    std::size_t dimension_;
    std::string embedder_tag_;
    std::vector<std::string> ids_;
    std::unordered_set<std::string> id_set_;
    std::vector<double> values_;
};

}  // namespace chatvis::vecindex
