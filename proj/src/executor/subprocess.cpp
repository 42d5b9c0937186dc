#include "executor/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstdlib>
#include <cstring>

#include "common/error.hpp"

extern char** environ;

namespace chatvis::executor {

namespace {

class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    Fd(Fd&& o) noexcept : fd_(o.release()) {}
    Fd& operator=(Fd&& o) noexcept {
        if (this != &o) {
            reset();
            fd_ = o.release();
        }
        return *this;
    }
    ~Fd() { reset(); }

    int get() const noexcept { return fd_; }
    int release() noexcept { return std::exchange(fd_, -1); }
    void reset() noexcept {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_ = -1;
};

struct Pipe {
    Fd read, write;
};

Pipe make_pipe() {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) throw Error(Errc::IoFailure, std::string("pipe2: ") + std::strerror(errno));
    return {Fd(fds[0]), Fd(fds[1])};
}

bool is_executable(const std::filesystem::path& p) {
    std::error_code ec;
    return std::filesystem::is_regular_file(p, ec) && ::access(p.c_str(), X_OK) == 0;
}

}  // namespace

std::optional<std::filesystem::path> resolve_executable(const std::string& name) {
    if (name.empty()) return std::nullopt;
    if (name.find('/') != std::string::npos) {
        // Absolute, so the child can chdir before exec.
        if (is_executable(name)) return std::filesystem::absolute(name);
        return std::nullopt;
    }
    const char* path_env = std::getenv("PATH");
    std::string search = path_env ? path_env : "/usr/local/bin:/usr/bin:/bin";
    std::size_t start = 0;
    while (start <= search.size()) {
        auto colon = search.find(':', start);
        auto dir = search.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
        auto candidate = std::filesystem::path(dir.empty() ? "." : dir) / name;
        if (is_executable(candidate)) return std::filesystem::absolute(candidate);
        if (colon == std::string::npos) break;
        start = colon + 1;
    }
    return std::nullopt;
}

ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                          std::optional<std::chrono::duration<double>> timeout) {
    if (argv.empty()) throw Error(Errc::InterpreterNotFound, "empty command");
    auto exe = resolve_executable(argv[0]);
    if (!exe) throw Error(Errc::InterpreterNotFound, argv[0]);

    // Everything the child touches is prepared before fork.
    std::vector<char*> cargv;
    for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
    cargv.push_back(nullptr);
    const std::string exe_path = exe->string();
    const std::string cwd_path = cwd.string();

    Pipe out = make_pipe(), err = make_pipe(), status = make_pipe();
    Fd devnull(::open("/dev/null", O_RDONLY | O_CLOEXEC));

    const auto started = std::chrono::steady_clock::now();
    pid_t pid = ::fork();
    if (pid < 0) throw Error(Errc::IoFailure, std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        ::setpgid(0, 0);
        if (::chdir(cwd_path.c_str()) == 0 && ::dup2(devnull.get(), STDIN_FILENO) >= 0 &&
            ::dup2(out.write.get(), STDOUT_FILENO) >= 0 && ::dup2(err.write.get(), STDERR_FILENO) >= 0) {
            ::execve(exe_path.c_str(), cargv.data(), environ);
        }
        int code = errno;
        [[maybe_unused]] auto n = ::write(status.write.get(), &code, sizeof code);
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    out.write.reset();
    err.write.reset();
    status.write.reset();

    int exec_errno = 0;
    ssize_t got = 0;
    do {
        got = ::read(status.read.get(), &exec_errno, sizeof exec_errno);
    } while (got < 0 && errno == EINTR);
    if (got == static_cast<ssize_t>(sizeof exec_errno)) {
        int ignored = 0;
        ::waitpid(pid, &ignored, 0);
        throw Error(Errc::InterpreterNotFound, exe_path + ": " + std::strerror(exec_errno));
    }

    ProcessResult result;
    std::array<pollfd, 2> fds{pollfd{out.read.get(), POLLIN, 0}, pollfd{err.read.get(), POLLIN, 0}};
    std::array<std::string*, 2> sinks{&result.out, &result.err};
    std::array<char, 65536> buf{};
    bool killed = false;

    auto remaining_ms = [&]() -> int {
        if (!timeout || killed) return -1;
        auto deadline = started + std::chrono::duration_cast<std::chrono::steady_clock::duration>(*timeout);
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        return left.count() <= 0 ? 0 : static_cast<int>(std::min<long long>(left.count(), 1 << 30));
    };

    while (fds[0].fd >= 0 || fds[1].fd >= 0) {
        int wait_ms = remaining_ms();
        if (wait_ms == 0) {
            ::kill(-pid, SIGKILL);
            killed = true;
            result.timed_out = true;
            continue;
        }
        int ready = ::poll(fds.data(), fds.size(), wait_ms);
        if (ready < 0) {
            if (errno == EINTR) continue;
            ::kill(-pid, SIGKILL);
            throw Error(Errc::IoFailure, std::string("poll: ") + std::strerror(errno));
        }
        for (std::size_t i = 0; i < fds.size(); ++i) {
            if (fds[i].fd < 0 || !(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            ssize_t n = ::read(fds[i].fd, buf.data(), buf.size());
            if (n > 0) {
                sinks[i]->append(buf.data(), static_cast<std::size_t>(n));
            } else if (n == 0 || (errno != EINTR && errno != EAGAIN)) {
                fds[i].fd = -1;
            }
        }
    }

    int wstatus = 0;
    while (::waitpid(pid, &wstatus, 0) < 0 && errno == EINTR) {
    }
    // Grandchildren may have outlived the group leader.
    if (killed) ::kill(-pid, SIGKILL);

    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    if (WIFEXITED(wstatus)) result.exit_code = WEXITSTATUS(wstatus);
    if (WIFSIGNALED(wstatus)) result.term_signal = WTERMSIG(wstatus);
    if (result.timed_out) result.exit_code.reset();
    return result;
}

}  // namespace chatvis::executor
