#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "common/prompts.hpp"
#include "corpus/corpus.hpp"
#include "llm/gateway.hpp"
#include "planner/planner.hpp"
#include "vecindex/index.hpp"

namespace chatvis::generator {

struct ScoredChunk {
    corpus::DocChunk chunk;
    double score = 0.0;
};

struct ContextSelection {
    planner::OperationStep step;
    std::vector<ScoredChunk> chunks;  // descending score
};

// Chunks are unique across selections (first step wins) and their text
// lengths sum to total_chars, which never exceeds the retrieval budget.
struct ContextBundle {
    std::vector<ContextSelection> selections;
    std::size_t total_chars = 0;

    bool empty() const noexcept;
    std::size_t chunk_count() const noexcept;
};

struct RetrievalOptions {
    std::size_t k = 5;
    std::size_t budget_chars = 24000;
    std::optional<corpus::ChunkKind> kind_filter;
};

ContextBundle retrieve_context(const std::vector<planner::OperationStep>& steps, const vecindex::VectorIndex& index,
                               const corpus::Corpus& corpus, vecindex::Embedder& embedder,
                               const RetrievalOptions& options = {});

// "### <symbol> (<kind>)" heading per chunk, chunks in step order then score.
// Empty bundle renders as "".
std::string render_context(const ContextBundle& bundle);
std::string chunk_label(const corpus::DocChunk& chunk);

llm::ChatRequest build_generation_request(std::string_view user_prompt, const ContextBundle& bundle,
                                          const PromptTemplate& tmpl, const std::string& model);

enum class ScriptOrigin { FencedBlock, WholeReply };

std::string_view origin_name(ScriptOrigin origin) noexcept;

struct GeneratedScript {
    std::string text;
    ScriptOrigin origin = ScriptOrigin::FencedBlock;
    std::string reply_digest;
};

// Body of the only fenced block, or of the longest one when there are several;
// the whole reply when there is none. Throws EmptyReply for blank content.
GeneratedScript extract_script(const llm::ChatReply& reply);

}  // namespace chatvis::generator
