#include "corpus/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "common/error.hpp"
#include "common/text.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace chatvis::corpus {

std::string_view kind_name(ChunkKind kind) noexcept {
    return kind == ChunkKind::ApiDoc ? "api-doc" : "code-snippet";
}

std::optional<ChunkKind> parse_kind(std::string_view name) noexcept {
    if (name == "api-doc") return ChunkKind::ApiDoc;
    if (name == "code-snippet") return ChunkKind::CodeSnippet;
    return std::nullopt;
}

Corpus::Corpus(std::vector<DocChunk> chunks, std::string source_fingerprint)
    : chunks_(std::move(chunks)), fingerprint_(std::move(source_fingerprint)) {
    order_.resize(chunks_.size());
    for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
    std::sort(order_.begin(), order_.end(),
              [&](std::size_t a, std::size_t b) { return chunks_[a].id < chunks_[b].id; });
    for (std::size_t i = 1; i < order_.size(); ++i) {
        if (chunks_[order_[i]].id == chunks_[order_[i - 1]].id)
            throw Error(Errc::InvalidArgument, "duplicate chunk id " + chunks_[order_[i]].id);
    }
    for (const auto& c : chunks_) {
        if (c.text.empty()) throw Error(Errc::InvalidArgument, "empty chunk text for " + c.id);
        if (c.line_span && c.line_span->start > c.line_span->end)
            throw Error(Errc::InvalidArgument, "inverted line span for " + c.id);
    }
}

const DocChunk* Corpus::find(std::string_view id) const {
    auto it = std::lower_bound(order_.begin(), order_.end(), id,
                               [&](std::size_t pos, std::string_view key) { return chunks_[pos].id < key; });
    if (it == order_.end() || chunks_[*it].id != id) return nullptr;
    return &chunks_[*it];
}

std::string Corpus::to_jsonl() const {
    std::string out;
    for (const auto& c : chunks_) {
        json j;
        j["id"] = c.id;
        j["kind"] = kind_name(c.kind);
        j["symbol"] = c.symbol ? json(*c.symbol) : json(nullptr);
        j["source_path"] = c.source_path;
        j["text"] = c.text;
        j["line_start"] = c.line_span ? json(c.line_span->start) : json(nullptr);
        j["line_end"] = c.line_span ? json(c.line_span->end) : json(nullptr);
        out += j.dump();
        out += '\n';
    }
    return out;
}

Corpus Corpus::from_jsonl(std::string_view content) {
    std::vector<DocChunk> chunks;
    std::size_t line_no = 0;
    for (const auto& line : text::split_lines(content)) {
        ++line_no;
        if (text::is_blank(line)) continue;
        try {
            auto j = json::parse(line);
            DocChunk c;
            c.id = j.at("id").get<std::string>();
            auto kind = parse_kind(j.at("kind").get<std::string>());
            if (!kind) throw Error(Errc::InvalidArgument, "unknown chunk kind");
            c.kind = *kind;
            if (!j.at("symbol").is_null()) c.symbol = j["symbol"].get<std::string>();
            c.source_path = j.at("source_path").get<std::string>();
            c.text = j.at("text").get<std::string>();
            if (!j.at("line_start").is_null())
                c.line_span = LineSpan{j["line_start"].get<int>(), j.at("line_end").get<int>()};
            chunks.push_back(std::move(c));
        } catch (const json::exception& e) {
            throw Error(Errc::InvalidArgument, "corpus line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    std::string fingerprint;
    for (const auto& c : chunks) fingerprint += c.id + '\n' + c.text + '\n';
    return Corpus(std::move(chunks), text::sha256_hex(fingerprint));
}

void Corpus::save(const fs::path& path) const { text::write_file(path, to_jsonl()); }

Corpus Corpus::load(const fs::path& path) { return from_jsonl(text::read_file(path)); }

std::vector<LineSpan> window_spans(int line_count, int max_lines, int overlap_lines) {
    if (max_lines <= 0 || overlap_lines < 0 || overlap_lines >= max_lines)
        throw Error(Errc::InvalidArgument, "require 0 <= overlap_lines < max_lines");
    std::vector<LineSpan> spans;
    if (line_count <= 0) return spans;
    int start = 1;
    for (;;) {
        int end = std::min(start + max_lines - 1, line_count);
        spans.push_back({start, end});
        if (end == line_count) break;
        int next_start = end - overlap_lines + 1;
        int fresh = line_count - end;
        if (fresh < overlap_lines && line_count - next_start + 1 <= max_lines) {
            spans.back().end = line_count;
            break;
        }
        start = next_start;
    }
    return spans;
}

std::string chunk_id(std::string_view source_path, const LineSpan& span) {
    return std::string(source_path) + "#L" + std::to_string(span.start) + "-L" + std::to_string(span.end);
}

std::vector<DocChunk> chunk_doc_text(std::string_view source_path, std::string_view content,
                                     const ChunkConfig& config) {
    const std::regex heading(config.heading_pattern);
    auto lines = text::split_lines(content);
    std::vector<DocChunk> chunks;

    struct Entry {
        int first;  // 0-based line index of the heading
        std::string symbol;
    };
    std::vector<Entry> entries;
    for (int i = 0; i < static_cast<int>(lines.size()); ++i) {
        std::smatch m;
        if (std::regex_search(lines[i], m, heading) && m.size() > 1 && m[1].matched)
            entries.push_back({i, m[1].str()});
    }

    for (std::size_t e = 0; e < entries.size(); ++e) {
        int first = entries[e].first;
        int last = e + 1 < entries.size() ? entries[e + 1].first - 1 : static_cast<int>(lines.size()) - 1;
        while (last > first && text::is_blank(lines[last])) --last;
        std::vector<std::string> body(lines.begin() + first, lines.begin() + last + 1);
        DocChunk c;
        c.kind = ChunkKind::ApiDoc;
        c.symbol = entries[e].symbol;
        c.source_path = std::string(source_path);
        c.text = text::join(body, "\n");
        c.line_span = LineSpan{first + 1, last + 1};
        c.id = chunk_id(source_path, *c.line_span);
        chunks.push_back(std::move(c));
    }
    return chunks;
}

std::vector<DocChunk> chunk_snippet_text(std::string_view source_path, std::string_view content,
                                         const ChunkConfig& config) {
    std::vector<DocChunk> chunks;
    if (text::is_blank(content)) return chunks;
    auto lines = text::split_lines(content);
    for (const auto& span : window_spans(static_cast<int>(lines.size()), config.max_lines, config.overlap_lines)) {
        std::vector<std::string> body(lines.begin() + (span.start - 1), lines.begin() + span.end);
        DocChunk c;
        c.kind = ChunkKind::CodeSnippet;
        c.source_path = std::string(source_path);
        c.text = text::join(body, "\n");
        if (c.text.empty()) continue;
        c.line_span = span;
        c.id = chunk_id(source_path, span);
        chunks.push_back(std::move(c));
    }
    return chunks;
}

namespace {

bool has_extension(const fs::path& p, const std::vector<std::string>& exts) {
    auto ext = text::to_lower(p.extension().string());
    return std::find(exts.begin(), exts.end(), ext) != exts.end();
}

bool is_hidden(const fs::path& rel) {
    for (const auto& part : rel) {
        auto s = part.string();
        if (!s.empty() && s[0] == '.' && s != "." && s != "..") return true;
    }
    return false;
}

}  // namespace

Corpus chunk_docs(const fs::path& root, const ChunkConfig& config) {
    if (config.max_lines <= 0 || config.overlap_lines < 0 || config.overlap_lines >= config.max_lines)
        throw Error(Errc::InvalidArgument, "require 0 <= overlap_lines < max_lines");
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw Error(Errc::RootNotFound, root.string());

    std::vector<std::pair<std::string, fs::path>> files;
    for (auto it = fs::recursive_directory_iterator(root, fs::directory_options::skip_permission_denied, ec);
         it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) break;
        auto rel = fs::relative(it->path(), root, ec);
        if (is_hidden(rel)) {
            if (it->is_directory(ec)) it.disable_recursion_pending();
            continue;
        }
        if (!it->is_regular_file(ec)) continue;
        if (has_extension(rel, config.doc_extensions) || has_extension(rel, config.snippet_extensions))
            files.emplace_back(rel.generic_string(), it->path());
    }
    if (ec) throw Error(Errc::RootNotFound, root.string() + ": " + ec.message());
    std::sort(files.begin(), files.end());

    std::vector<DocChunk> chunks;
    std::vector<SkippedFile> skipped;
    std::string fingerprint_input;
    for (const auto& [rel, full] : files) {
        std::ifstream in(full, std::ios::binary);
        std::ostringstream ss;
        if (in) ss << in.rdbuf();
        if (!in || in.bad()) {
            skipped.push_back({rel, "unreadable"});
            continue;
        }
        std::string content = ss.str();
        fingerprint_input += rel;
        fingerprint_input += '\0';
        fingerprint_input += std::to_string(content.size());
        fingerprint_input += '\0';
        fingerprint_input += content;

        auto produced = has_extension(full, config.doc_extensions)
                            ? chunk_doc_text(rel, content, config)
                            : chunk_snippet_text(rel, content, config);
        for (auto& c : produced) chunks.push_back(std::move(c));
    }
    if (!files.empty() && skipped.size() == files.size())
        throw Error(Errc::UnreadableFile, "no input file under " + root.string() + " could be read");

    Corpus corpus(std::move(chunks), text::sha256_hex(fingerprint_input));
    corpus.set_skipped(std::move(skipped));
    return corpus;
}

}  // namespace chatvis::corpus
