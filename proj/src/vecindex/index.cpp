#include "vecindex/index.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "common/error.hpp"
#include "common/text.hpp"

using nlohmann::json;

namespace chatvis::vecindex {

namespace {

bool ranks_before(const RetrievalHit& a, const RetrievalHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.chunk_id < b.chunk_id;
}

std::string entry_line(const std::string& id, std::span<const double> values) {
    json j;
    j["id"] = id;
    j["values"] = std::vector<double>(values.begin(), values.end());
    return j.dump();
}

}  // namespace

VectorIndex::VectorIndex(std::size_t dimension, std::string embedder_tag)
    : dimension_(dimension), embedder_tag_(std::move(embedder_tag)) {
    if (dimension_ == 0) throw Error(Errc::InvalidArgument, "index dimension must be positive");
}

std::span<const double> VectorIndex::vector(std::size_t row) const {
    if (row >= ids_.size()) throw Error(Errc::InvalidArgument, "row out of range");
    return std::span<const double>(values_).subspan(row * dimension_, dimension_);
}

void VectorIndex::add(std::string chunk_id, std::span<const double> embedding) {
    if (embedding.size() != dimension_)
        throw Error(Errc::DimensionMismatch, "expected " + std::to_string(dimension_) + " values, got " +
                                                 std::to_string(embedding.size()));
    if (std::abs(l2_norm(embedding) - 1.0) > kNormTolerance)
        throw Error(Errc::InvalidArgument, "embedding for " + chunk_id + " is not unit-norm");
    if (!id_set_.insert(chunk_id).second) throw Error(Errc::InvalidArgument, "duplicate chunk id " + chunk_id);
    ids_.push_back(std::move(chunk_id));
    values_.insert(values_.end(), embedding.begin(), embedding.end());
}

std::vector<RetrievalHit> VectorIndex::search(std::span<const double> query, std::size_t k,
                                              const std::function<bool(std::string_view)>& accept) const {
    if (query.size() != dimension_)
        throw Error(Errc::DimensionMismatch, "query has " + std::to_string(query.size()) + " values, index has " +
                                                 std::to_string(dimension_));
    if (k == 0) throw Error(Errc::InvalidArgument, "k must be positive");

    std::vector<RetrievalHit> hits;
    hits.reserve(ids_.size());
    for (std::size_t row = 0; row < ids_.size(); ++row) {
        if (accept && !accept(ids_[row])) continue;
        const double* v = values_.data() + row * dimension_;
        double dot = 0.0;
        for (std::size_t d = 0; d < dimension_; ++d) dot += v[d] * query[d];
        hits.push_back({ids_[row], dot});
    }
    auto keep = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(), ranks_before);
    hits.resize(keep);
    return hits;
}

std::string VectorIndex::serialize() const {
    std::string body;
    for (std::size_t row = 0; row < ids_.size(); ++row) {
        body += entry_line(ids_[row], vector(row));
        body += '\n';
    }
    json header;
    header["dimension"] = dimension_;
    header["count"] = ids_.size();
    header["embedder_tag"] = embedder_tag_;
    header["checksum"] = text::sha256_hex(body);
    return header.dump() + '\n' + body;
}

VectorIndex VectorIndex::deserialize(std::string_view content, const std::optional<std::string>& required_tag) {
    auto nl = content.find('\n');
    if (nl == std::string_view::npos) throw Error(Errc::CorruptIndex, "missing header line");
    json header;
    try {
        header = json::parse(content.substr(0, nl));
    } catch (const json::exception& e) {
        throw Error(Errc::CorruptIndex, std::string("bad header: ") + e.what());
    }

    std::size_t dimension = 0, count = 0;
    std::string tag, checksum;
    try {
        dimension = header.at("dimension").get<std::size_t>();
        count = header.at("count").get<std::size_t>();
        tag = header.at("embedder_tag").get<std::string>();
        checksum = header.at("checksum").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(Errc::CorruptIndex, std::string("bad header: ") + e.what());
    }
    if (required_tag && *required_tag != tag)
        throw Error(Errc::EmbedderMismatch, "index built with '" + tag + "', caller requires '" + *required_tag + "'");

    auto body = content.substr(nl + 1);
    if (text::sha256_hex(body) != checksum) throw Error(Errc::CorruptIndex, "checksum mismatch");

    VectorIndex index(dimension, tag);
    try {
        for (const auto& line : text::split_lines(body)) {
            auto j = json::parse(line);
            auto values = j.at("values").get<std::vector<double>>();
            index.add(j.at("id").get<std::string>(), values);
        }
    } catch (const json::exception& e) {
        throw Error(Errc::CorruptIndex, std::string("bad entry: ") + e.what());
    } catch (const Error& e) {
        throw Error(Errc::CorruptIndex, e.what());
    }
    if (index.size() != count)
        throw Error(Errc::CorruptIndex, "header declares " + std::to_string(count) + " entries, found " +
                                            std::to_string(index.size()));
    return index;
}

void VectorIndex::persist(const std::filesystem::path& path) const { text::write_file(path, serialize()); }

VectorIndex VectorIndex::load(const std::filesystem::path& path, const std::optional<std::string>& required_tag) {
    return deserialize(text::read_file(path), required_tag);
}

}  // namespace chatvis::vecindex
