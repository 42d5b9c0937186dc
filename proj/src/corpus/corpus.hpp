#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chatvis::corpus {

enum class ChunkKind { ApiDoc, CodeSnippet };

std::string_view kind_name(ChunkKind kind) noexcept;
std::optional<ChunkKind> parse_kind(std::string_view name) noexcept;

struct LineSpan {
    int start = 1;  // 1-based, inclusive
    int end = 1;
    friend bool operator==(const LineSpan&, const LineSpan&) = default;
};

struct DocChunk {
    std::string id;
    ChunkKind kind = ChunkKind::ApiDoc;
    std::optional<std::string> symbol;
    std::string source_path;  // relative to the ingested root, '/'-separated
    std::string text;
    std::optional<LineSpan> line_span;

    friend bool operator==(const DocChunk&, const DocChunk&) = default;
};

struct ChunkConfig {
    int max_lines = 60;
    int overlap_lines = 10;
    // ECMAScript regex; capture group 1 is the documented symbol.
    std::string heading_pattern =
        R"(^\s*(?:#{1,6}\s+|def\s+|\.\.\s+(?:py:)?function::\s+)`?([A-Za-z_][A-Za-z0-9_.]*)`?\s*\()";
    std::vector<std::string> doc_extensions = {".md", ".rst", ".txt"};
    std::vector<std::string> snippet_extensions = {".py"};
};

struct SkippedFile {
    std::string path;
    std::string reason;
};

class Corpus {
public:
    Corpus() = default;
    Corpus(std::vector<DocChunk> chunks, std::string source_fingerprint);

    const std::vector<DocChunk>& chunks() const noexcept { return chunks_; }
    const std::string& source_fingerprint() const noexcept { return fingerprint_; }
    std::size_t size() const noexcept { return chunks_.size(); }

    const DocChunk* find(std::string_view id) const;

    // Files that were present but could not be read during chunk_docs.
    const std::vector<SkippedFile>& skipped() const noexcept { return skipped_; }
    void set_skipped(std::vector<SkippedFile> skipped) { skipped_ = std::move(skipped); }

    // JSON-lines, one chunk per line:
    // {id, kind, symbol, source_path, text, line_start, line_end}
    std::string to_jsonl() const;
    static Corpus from_jsonl(std::string_view content);

    void save(const std::filesystem::path& path) const;
    static Corpus load(const std::filesystem::path& path);

private:
    std::vector<DocChunk> chunks_;
    std::string fingerprint_;
    std::vector<SkippedFile> skipped_;
    std::vector<std::size_t> order_;  // chunk positions sorted by id
};

// Line windows [start, end] (1-based, inclusive) covering a file of line_count
// lines. A tail that would add fewer than overlap_lines new lines is merged
// into the previous window.
std::vector<LineSpan> window_spans(int line_count, int max_lines, int overlap_lines);

// Splits one documentation file into api-doc chunks, one per heading entry.
std::vector<DocChunk> chunk_doc_text(std::string_view source_path, std::string_view content,
                                     const ChunkConfig& config);

std::vector<DocChunk> chunk_snippet_text(std::string_view source_path, std::string_view content,
                                         const ChunkConfig& config);

std::string chunk_id(std::string_view source_path, const LineSpan& span);

Corpus chunk_docs(const std::filesystem::path& root, const ChunkConfig& config = {});

}  // namespace chatvis::corpus
