#include "orchestrator/session.hpp"

#include <chrono>
#include <set>

#include <nlohmann/json.hpp>

#include "common/error.hpp"
#include "common/text.hpp"

using nlohmann::json;

namespace chatvis::orchestrator {

std::string_view mode_name(Mode mode) noexcept { return mode == Mode::Rag ? "rag" : "fewshot"; }

std::optional<Mode> parse_mode(std::string_view name) noexcept {
    if (name == "rag") return Mode::Rag;
    if (name == "fewshot") return Mode::FewShot;
    return std::nullopt;
}

std::string_view status_name(SessionStatus status) noexcept {
    switch (status) {
        case SessionStatus::Success: return "Success";
        case SessionStatus::Exhausted: return "Exhausted";
        case SessionStatus::GatewayFailure: return "GatewayFailure";
    }
    return "GatewayFailure";
}

const generator::GeneratedScript* GenerationSession::final_script() const {
    return attempts.empty() ? nullptr : &attempts.back().script;
}

llm::ChatRequest build_correction_request(const generator::GeneratedScript& previous,
                                          const std::vector<executor::TracebackRecord>& errors,
                                          const std::optional<generator::ContextBundle>& extra_context,
                                          const PromptTemplate& tmpl, const std::string& model) {
    if (errors.empty()) throw Error(Errc::InvalidArgument, "correction request needs at least one error record");
    std::string error_text;
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (i) error_text += "\n\n";
        error_text += errors[i].text();
    }
    const std::map<std::string, std::string> vars{
        {"script", previous.text},
        {"errors", error_text},
        {"context", extra_context ? generator::render_context(*extra_context) : std::string()}};
    llm::ChatRequest req;
    req.model = model;
    req.messages.push_back({llm::Role::System, text::render(tmpl.system, vars)});
    req.messages.push_back({llm::Role::User, text::render(tmpl.user, vars)});
    return req;
}

std::vector<planner::OperationStep> correction_queries(const generator::GeneratedScript& script,
                                                       const std::vector<executor::TracebackRecord>& errors,
                                                       const std::string& script_name) {
    auto lines = text::split_lines(script.text);
    const auto wanted = std::filesystem::path(script_name).filename().string();
    std::vector<std::string> queries;
    std::set<std::string> seen;
    auto add = [&](std::string q) {
        if (text::is_blank(q) || !seen.insert(q).second) return;
        queries.push_back(std::move(q));
    };
    for (const auto& rec : errors) {
        bool pointed = false;
        for (const auto& loc : rec.locations) {
            if (std::filesystem::path(loc.file).filename().string() != wanted) continue;
            if (loc.line < 1 || loc.line > static_cast<int>(lines.size())) continue;
            auto code = text::trim(lines[loc.line - 1]);
            if (code.empty()) continue;
            add(std::string(code) + " " + rec.error_class);
            pointed = true;
        }
        if (!pointed) add(rec.error_class + " " + rec.error_message);
    }
    std::vector<planner::OperationStep> steps;
    for (auto& q : queries) {
        planner::OperationStep s;
        s.index = static_cast<int>(steps.size()) + 1;
        s.api_hint = planner::extract_api_hint(q);
        s.description = std::move(q);
        steps.push_back(std::move(s));
    }
    return steps;
}

namespace {

bool is_gateway_error(Errc code) {
    switch (code) {
        case Errc::EndpointUnreachable:
        case Errc::AuthFailure:
        case Errc::RateLimited:
        case Errc::TranscriptMiss:
        case Errc::MalformedProviderResponse:
        case Errc::EmptyReply:
        case Errc::ProviderUnavailable:
            return true;
        default:
            return false;
    }
}

executor::TracebackRecord missing_artifact_record(const std::string& name) {
    executor::TracebackRecord rec;
    rec.error_class = "MissingArtifactError";
    rec.error_message = "the script finished without errors but did not create the expected output file '" + name + "'";
    rec.lines = {rec.error_class + ": " + rec.error_message};
    return rec;
}

void write_record(const GenerationSession& session, const executor::ExecConfig& exec) {
    text::write_file(exec.work_dir / kSessionFile, session_to_json(session).dump(2) + "\n");
    if (const auto* script = session.final_script()) {
        std::string body = script->text;
        if (body.empty() || body.back() != '\n') body += '\n';
        text::write_file(exec.work_dir / kFinalScriptFile, body);
    }
}

}  // namespace

GenerationSession run_session(std::string_view user_prompt, const SessionConfig& config, const Services& services) {
    if (text::is_blank(user_prompt)) throw Error(Errc::InvalidArgument, "user prompt is empty");
    if (config.max_iterations < 1) throw Error(Errc::InvalidArgument, "max_iterations must be >= 1");
    if (!services.gateway || !services.prompts) throw Error(Errc::InvalidArgument, "session needs a gateway and prompts");
    const bool rag = config.mode == Mode::Rag;
    if (rag && (!services.index || !services.corpus || !services.embedder))
        throw Error(Errc::InvalidArgument, "rag mode needs an index, a corpus and an embedder");

    const auto started = std::chrono::steady_clock::now();
    GenerationSession session;
    session.user_prompt = std::string(user_prompt);
    session.mode = config.mode;
    session.expected_artifact = config.exec.expected_artifact;
    auto& gateway = *services.gateway;
    const auto& prompts = *services.prompts;

    auto retrieve = [&](const std::vector<planner::OperationStep>& steps) {
        return generator::retrieve_context(steps, *services.index, *services.corpus, *services.embedder,
                                           config.retrieval);
    };

    try {
        generator::ContextBundle bundle;
        if (rag) {
            planner::DecompositionPlan plan;
            plan.user_prompt = session.user_prompt;
            auto reply = gateway.complete(
                planner::build_decomposition_request(user_prompt, prompts.decompose(), config.model));
            plan.raw_expansion = reply.content;
            try {
                plan.steps = planner::parse_expansion(reply.content);
            } catch (const Error& e) {
                if (e.code() != Errc::NoOperations) throw;
            }
            session.plan = plan;
            bundle = retrieve(plan.steps);
        }

        auto reply = gateway.complete(
            generator::build_generation_request(user_prompt, bundle, prompts.generate(), config.model));
        auto script = generator::extract_script(reply);

        for (int i = 1; i <= config.max_iterations; ++i) {
            auto exec = config.exec;
            exec.script_name = "attempt_" + std::to_string(i) + ".py";
            Attempt attempt{script, executor::run_script(script, exec), std::nullopt};

            auto errors = attempt.result.tracebacks;
            if (errors.empty() && config.exec.expected_artifact &&
                !attempt.result.has_artifact(*config.exec.expected_artifact))
                errors.push_back(missing_artifact_record(*config.exec.expected_artifact));

            if (errors.empty()) {
                session.attempts.push_back(std::move(attempt));
                session.status = SessionStatus::Success;
                break;
            }
            if (i == config.max_iterations) {
                session.attempts.push_back(std::move(attempt));
                session.status = SessionStatus::Exhausted;
                break;
            }

            std::optional<generator::ContextBundle> extra;
            if (rag) extra = retrieve(correction_queries(script, errors, exec.script_name));
            auto correction = build_correction_request(script, errors, extra, prompts.correct(), config.model);
            attempt.correction_request_digest = correction.digest();
            session.attempts.push_back(std::move(attempt));

            script = generator::extract_script(gateway.complete(correction));
        }
    } catch (const Error& e) {
        if (!is_gateway_error(e.code())) throw;
        session.status = SessionStatus::GatewayFailure;
        session.failure = e.what();
    }

    session.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (config.write_record) write_record(session, config.exec);
    return session;
}

json session_to_json(const GenerationSession& session) {
    json j;
    j["prompt"] = session.user_prompt;
    j["mode"] = mode_name(session.mode);
    j["status"] = status_name(session.status);
    j["failure"] = session.failure ? json(*session.failure) : json(nullptr);
    j["expected_artifact"] = session.expected_artifact ? json(*session.expected_artifact) : json(nullptr);
    if (session.plan) {
        json steps = json::array();
        for (const auto& s : session.plan->steps) {
            steps.push_back({{"index", s.index},
                             {"description", s.description},
                             {"api_hint", s.api_hint ? json(*s.api_hint) : json(nullptr)}});
        }
        j["plan"] = {{"raw_expansion", session.plan->raw_expansion}, {"steps", std::move(steps)}};
    } else {
        j["plan"] = nullptr;
    }
    json attempts = json::array();
    for (std::size_t i = 0; i < session.attempts.size(); ++i) {
        const auto& a = session.attempts[i];
        json tbs = json::array();
        for (const auto& t : a.result.tracebacks) {
            json locs = json::array();
            for (const auto& l : t.locations) locs.push_back({{"file", l.file}, {"line", l.line}});
            tbs.push_back({{"error_class", t.error_class},
                           {"error_message", t.error_message},
                           {"lines", t.lines},
                           {"locations", std::move(locs)}});
        }
        attempts.push_back({
            {"index", i + 1},
            {"script", a.script.text},
            {"origin", generator::origin_name(a.script.origin)},
            {"reply_digest", a.script.reply_digest},
            {"exit_status", a.result.exit_status ? json(*a.result.exit_status) : json(nullptr)},
            {"timed_out", a.result.timed_out},
            {"stdout", a.result.stdout_text},
            {"stderr", a.result.stderr_text},
            {"tracebacks", std::move(tbs)},
            {"artifacts", a.result.artifacts},
            {"success", a.result.success()},
            {"wall_time", a.result.wall_time},
            {"correction_request_digest",
             a.correction_request_digest ? json(*a.correction_request_digest) : json(nullptr)},
        });
    }
    j["attempts"] = std::move(attempts);
    j["wall_time"] = session.wall_time;
    return j;
}

}  // namespace chatvis::orchestrator
