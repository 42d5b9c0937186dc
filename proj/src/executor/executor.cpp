#include "executor/executor.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>

#include "common/error.hpp"
#include "common/text.hpp"
#include "executor/subprocess.hpp"

namespace fs = std::filesystem;

namespace chatvis::executor {

void ExecConfig::apply_env() {
    if (const char* cmd = std::getenv("CHATVIS_INTERPRETER"); cmd && *cmd) {
        auto argv = text::split_command(cmd);
        if (!argv.empty()) interpreter_cmd = std::move(argv);
    }
}

bool ExecutionResult::has_artifact(const std::string& name) const {
    return std::find(artifacts.begin(), artifacts.end(), name) != artifacts.end();
}

std::string ExecutionResult::combined_output() const {
    std::string all = stdout_text;
    if (!all.empty() && all.back() != '\n' && !stderr_text.empty()) all += '\n';
    all += stderr_text;
    return all;
}

namespace {

struct FileStamp {
    std::uintmax_t size = 0;
    fs::file_time_type mtime;
    bool operator==(const FileStamp&) const = default;
};

std::map<std::string, FileStamp> snapshot(const fs::path& dir) {
    std::map<std::string, FileStamp> files;
    std::error_code ec;
    for (auto it = fs::recursive_directory_iterator(dir, fs::directory_options::skip_permission_denied, ec);
         it != fs::recursive_directory_iterator(); it.increment(ec)) {
        if (ec) break;
        std::error_code fe;
        if (!it->is_regular_file(fe)) continue;
        FileStamp st{it->file_size(fe), it->last_write_time(fe)};
        files[fs::relative(it->path(), dir, fe).generic_string()] = st;
    }
    return files;
}

std::vector<std::string> tail_lines(const std::string& output, int count) {
    auto lines = text::split_lines(output);
    while (!lines.empty() && text::is_blank(lines.back())) lines.pop_back();
    auto first = lines.size() > static_cast<std::size_t>(count) ? lines.size() - count : 0;
    return {lines.begin() + static_cast<std::ptrdiff_t>(first), lines.end()};
}

}  // namespace

ExecutionResult run_script(const generator::GeneratedScript& script, const ExecConfig& config) {
    if (config.interpreter_cmd.empty()) throw Error(Errc::InterpreterNotFound, "no interpreter configured");
    if (!resolve_executable(config.interpreter_cmd.front()))
        throw Error(Errc::InterpreterNotFound, config.interpreter_cmd.front());

    std::error_code ec;
    fs::create_directories(config.work_dir, ec);
    if (!fs::is_directory(config.work_dir, ec))
        throw Error(Errc::WorkDirUnwritable, config.work_dir.string());

    const auto script_path = config.work_dir / config.script_name;
    auto before = snapshot(config.work_dir);
    try {
        std::string body = script.text;
        if (body.empty() || body.back() != '\n') body += '\n';
        text::write_file(script_path, body);
    } catch (const Error& e) {
        throw Error(Errc::WorkDirUnwritable, e.what());
    }

    auto argv = config.interpreter_cmd;
    argv.push_back(fs::absolute(script_path).string());
    auto proc = run_process(argv, config.work_dir, std::chrono::duration<double>(config.timeout_seconds));

    ExecutionResult result;
    result.script_path = script_path.string();
    result.exit_status = proc.exit_code;
    result.term_signal = proc.term_signal;
    result.timed_out = proc.timed_out;
    result.stdout_text = std::move(proc.out);
    result.stderr_text = std::move(proc.err);
    result.wall_time = proc.wall_seconds;
    result.tracebacks = extract_tracebacks(result.combined_output());

    auto after = snapshot(config.work_dir);
    const auto script_rel = fs::path(config.script_name).generic_string();
    for (const auto& [path, stamp] : after) {
        if (path == script_rel) continue;
        auto it = before.find(path);
        if (it == before.end() || !(it->second == stamp)) result.artifacts.push_back(path);
    }

    if (result.exit_status != 0 && result.tracebacks.empty()) {
        TracebackRecord rec;
        if (result.timed_out) {
            rec.error_class = "TimeoutError";
            rec.error_message = "script exceeded the " + text::fixed(config.timeout_seconds, 1) + " s time limit";
            rec.lines = {rec.error_class + ": " + rec.error_message};
        } else {
            rec.error_class = kNonzeroExitClass;
            rec.lines = tail_lines(result.combined_output(), kTailLines);
            std::string status = result.term_signal ? "killed by signal " + std::to_string(*result.term_signal)
                                                    : "exit status " + std::to_string(result.exit_status.value_or(-1));
            if (rec.lines.empty()) rec.lines = {"process ended with " + status + " and no output"};
            rec.error_message = text::join(rec.lines, "\n");
        }
        result.tracebacks.push_back(std::move(rec));
    }
    return result;
}

}  // namespace chatvis::executor
