#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "common/prompts.hpp"
#include "corpus/corpus.hpp"
#include "executor/executor.hpp"
#include "generator/generator.hpp"
#include "llm/gateway.hpp"
#include "planner/planner.hpp"
#include "vecindex/index.hpp"

namespace chatvis::orchestrator {

enum class Mode { Rag, FewShot };
enum class SessionStatus { Success, Exhausted, GatewayFailure };

std::string_view mode_name(Mode mode) noexcept;
std::optional<Mode> parse_mode(std::string_view name) noexcept;
std::string_view status_name(SessionStatus status) noexcept;

struct Attempt {
    generator::GeneratedScript script;
    executor::ExecutionResult result;
    // Digest of the correction request built from this attempt's errors.
    std::optional<std::string> correction_request_digest;
};

struct GenerationSession {
    std::string user_prompt;
    Mode mode = Mode::Rag;
    std::vector<Attempt> attempts;
    SessionStatus status = SessionStatus::GatewayFailure;
    std::optional<planner::DecompositionPlan> plan;
    std::optional<std::string> failure;  // gateway error text for GatewayFailure
    std::optional<std::string> expected_artifact;
    double wall_time = 0.0;

    bool succeeded() const noexcept { return status == SessionStatus::Success; }
    const generator::GeneratedScript* final_script() const;
};

struct SessionConfig {
    Mode mode = Mode::Rag;
    int max_iterations = 5;
    executor::ExecConfig exec;
    generator::RetrievalOptions retrieval;
    std::string model = "gpt-4o";
    bool write_record = true;  // session.json and generated.py in exec.work_dir
};

// Non-owning. Few-shot sessions only use gateway and prompts.
struct Services {
    llm::Gateway* gateway = nullptr;
    const PromptLibrary* prompts = nullptr;
    const vecindex::VectorIndex* index = nullptr;
    const corpus::Corpus* corpus = nullptr;
    vecindex::Embedder* embedder = nullptr;
};

llm::ChatRequest build_correction_request(const generator::GeneratedScript& previous,
                                          const std::vector<executor::TracebackRecord>& errors,
                                          const std::optional<generator::ContextBundle>& extra_context,
                                          const PromptTemplate& tmpl, const std::string& model);

// Retrieval queries for a failed attempt: the script line each error points
// at plus its error class; the class and message when no line is known.
std::vector<planner::OperationStep> correction_queries(const generator::GeneratedScript& script,
                                                       const std::vector<executor::TracebackRecord>& errors,
                                                       const std::string& script_name);

GenerationSession run_session(std::string_view user_prompt, const SessionConfig& config, const Services& services);

nlohmann::json session_to_json(const GenerationSession& session);

inline constexpr const char* kSessionFile = "session.json";
inline constexpr const char* kFinalScriptFile = "generated.py";

}  // namespace chatvis::orchestrator
