#include "generator/generator.hpp"

#include <algorithm>
#include <unordered_set>

#include "common/error.hpp"
#include "common/text.hpp"

namespace chatvis::generator {

bool ContextBundle::empty() const noexcept { return chunk_count() == 0; }

std::size_t ContextBundle::chunk_count() const noexcept {
    std::size_t n = 0;
    for (const auto& s : selections) n += s.chunks.size();
    return n;
}

ContextBundle retrieve_context(const std::vector<planner::OperationStep>& steps, const vecindex::VectorIndex& index,
                               const corpus::Corpus& corpus, vecindex::Embedder& embedder,
                               const RetrievalOptions& options) {
    ContextBundle bundle;
    if (steps.empty()) return bundle;
    if (options.k == 0) throw Error(Errc::InvalidArgument, "k must be positive");

    std::function<bool(std::string_view)> accept;
    if (options.kind_filter) {
        accept = [&](std::string_view id) {
            const auto* c = corpus.find(id);
            return c == nullptr || c->kind == *options.kind_filter;
        };
    }

    std::unordered_set<std::string> seen;
    for (const auto& step : steps) {
        ContextSelection sel{step, {}};
        auto query = embedder.embed(step.description);
        for (const auto& hit : index.search(query, options.k, accept)) {
            const auto* chunk = corpus.find(hit.chunk_id);
            if (!chunk) throw Error(Errc::UnresolvedChunk, hit.chunk_id);
            if (!seen.insert(hit.chunk_id).second) continue;
            sel.chunks.push_back({*chunk, hit.score});
            bundle.total_chars += chunk->text.size();
        }
        bundle.selections.push_back(std::move(sel));
    }

    // Evict the lowest-scoring chunk (later step, then larger id, on ties) until within budget.
    struct Pos {
        std::size_t sel, idx;
    };
    auto worse = [&](const Pos& a, const Pos& b) {
        const auto& ca = bundle.selections[a.sel].chunks[a.idx];
        const auto& cb = bundle.selections[b.sel].chunks[b.idx];
        if (ca.score != cb.score) return ca.score < cb.score;
        if (a.sel != b.sel) return a.sel > b.sel;
        return ca.chunk.id > cb.chunk.id;
    };
    while (bundle.total_chars > options.budget_chars) {
        std::optional<Pos> worst;
        for (std::size_t s = 0; s < bundle.selections.size(); ++s) {
            for (std::size_t p = 0; p < bundle.selections[s].chunks.size(); ++p) {
                Pos here{s, p};
                if (!worst || worse(here, *worst)) worst = here;
            }
        }
        if (!worst) break;
        auto& chunks = bundle.selections[worst->sel].chunks;
        bundle.total_chars -= chunks[worst->idx].chunk.text.size();
        chunks.erase(chunks.begin() + static_cast<std::ptrdiff_t>(worst->idx));
    }
    return bundle;
}

std::string chunk_label(const corpus::DocChunk& chunk) {
    std::string name;
    if (chunk.symbol) {
        name = *chunk.symbol;
    } else if (chunk.line_span) {
        name = chunk.source_path + ":" + std::to_string(chunk.line_span->start) + "-" +
               std::to_string(chunk.line_span->end);
    } else {
        name = chunk.source_path;
    }
    return "### " + name + " (" + std::string(corpus::kind_name(chunk.kind)) + ")";
}

std::string render_context(const ContextBundle& bundle) {
    if (bundle.empty()) return {};
    std::string out = "Reference material from the ParaView documentation and examples:\n";
    for (const auto& sel : bundle.selections) {
        for (const auto& sc : sel.chunks) {
            out += '\n';
            out += chunk_label(sc.chunk);
            out += '\n';
            out += sc.chunk.text;
            out += '\n';
        }
    }
    return out;
}

llm::ChatRequest build_generation_request(std::string_view user_prompt, const ContextBundle& bundle,
                                          const PromptTemplate& tmpl, const std::string& model) {
    if (text::is_blank(user_prompt)) throw Error(Errc::InvalidArgument, "user prompt is empty");
    const std::map<std::string, std::string> vars{{"user_prompt", std::string(user_prompt)},
                                                  {"context", render_context(bundle)}};
    auto user = text::render(tmpl.user, vars);

    llm::ChatRequest req;
    req.model = model;
    req.messages.push_back({llm::Role::System, text::render(tmpl.system, vars)});
    req.messages.push_back({llm::Role::User, std::move(user)});
    return req;
}

std::string_view origin_name(ScriptOrigin origin) noexcept {
    return origin == ScriptOrigin::FencedBlock ? "fenced-block" : "whole-reply";
}

GeneratedScript extract_script(const llm::ChatReply& reply) {
    if (text::is_blank(reply.content)) throw Error(Errc::EmptyReply, "reply has no content");

    std::vector<std::string> blocks;
    std::optional<std::vector<std::string>> open;
    for (const auto& line : text::split_lines(reply.content)) {
        bool fence = text::trim(line).substr(0, 3) == "```";
        if (!open) {
            if (fence) open.emplace();
        } else if (fence) {
            blocks.push_back(text::join(*open, "\n"));
            open.reset();
        } else {
            open->push_back(line);
        }
    }
    if (open) blocks.push_back(text::join(*open, "\n"));

    GeneratedScript script;
    script.reply_digest = text::sha256_hex(reply.content);
    const std::string* best = nullptr;
    for (const auto& b : blocks) {
        if (!best || b.size() > best->size()) best = &b;
    }
    if (best && !text::is_blank(*best)) {
        script.text = *best;
        script.origin = ScriptOrigin::FencedBlock;
    } else {
        script.text = reply.content;
        script.origin = ScriptOrigin::WholeReply;
    }
    return script;
}

}  // namespace chatvis::generator
