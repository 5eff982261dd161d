#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "sokgen/corpus.hpp"
#include "sokgen/ngram.hpp"

namespace sokgen {

/// External generator endpoint. Subprocess runs `endpoint` through /bin/sh
/// and speaks JSON lines over its stdin/stdout. FileExchange writes
/// `<endpoint>/prompts.jsonl` and waits for `<endpoint>/completions.jsonl`.
struct GeneratorAdapter {
    enum class Mode { Subprocess, FileExchange };
    Mode mode = Mode::Subprocess;
    std::string endpoint;
    double timeout_seconds = 600.0;
};

inline constexpr std::string_view kPromptsFile = "prompts.jsonl";
inline constexpr std::string_view kCompletionsFile = "completions.jsonl";

class AdapterTimeout : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class ProtocolError : public std::runtime_error {
  public:
    ProtocolError(std::size_t line, const std::string& what)
        : std::runtime_error("adapter protocol error on response line " + std::to_string(line) + ": " + what),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

  private:
    std::size_t line_;
};

/// One request line. Request i carries seed `params.seed + i`.
inline std::string adapter_request(std::size_t id, std::string_view prompt, const GenerationParams& params) {
    nlohmann::ordered_json j;
    j["id"] = id;
    j["prompt"] = prompt;
    j["temperature"] = params.temperature;
    j["top_p"] = params.top_p;
    j["beams"] = params.beams;
    j["max_chars"] = params.max_chars;
    j["seed"] = params.seed + id;
    return j.dump();
}

namespace detail {

// Matches response lines to request ids. Unknown or repeated ids are
// reported and ignored; malformed lines raise ProtocolError.
class ResponseCollector {
  public:
    ResponseCollector(std::size_t n, Diagnostics* diag) : completions_(n), diag_(diag) {}

    void feed(std::string_view line) {
        ++line_no_;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) return;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            throw ProtocolError(line_no_, "not JSON");
        }
        if (!j.is_object() || !j.contains("id") || !j["id"].is_number_integer() || !j.contains("completion") ||
            !j["completion"].is_string()) {
            throw ProtocolError(line_no_, "expected {\"id\": integer, \"completion\": string}");
        }
        const auto id = j["id"].get<long long>();
        if (id < 0 || static_cast<std::size_t>(id) >= completions_.size()) {
            warn(diag_, "adapter returned unknown id " + std::to_string(id));
            return;
        }
        auto& slot = completions_[static_cast<std::size_t>(id)];
        if (slot) {
            warn(diag_, "adapter returned id " + std::to_string(id) + " more than once; keeping the first");
            return;
        }
        slot = j["completion"].get<std::string>();
        ++received_;
    }

    bool complete() const { return received_ == completions_.size(); }

    std::vector<std::string> finish() {
        std::vector<std::string> out;
        out.reserve(completions_.size());
        for (std::size_t i = 0; i < completions_.size(); ++i) {
            if (!completions_[i]) warn(diag_, "adapter returned no completion for id " + std::to_string(i));
            out.push_back(completions_[i].value_or(""));
        }
        return out;
    }

  private:
    std::vector<std::optional<std::string>> completions_;
    Diagnostics* diag_;
    std::size_t line_no_ = 0;
    std::size_t received_ = 0;
};

class Fd {
  public:
    explicit Fd(int fd = -1) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() { reset(); }
    int get() const { return fd_; }
    void reset() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

  private:
    int fd_;
};

inline std::mutex& endpoint_mutex(const std::string& endpoint) {
    static std::mutex guard;
    static std::map<std::string, std::mutex> mutexes;
    std::lock_guard lock(guard);
    return mutexes[endpoint];
}

inline std::string batch(const std::vector<std::string>& prompts, const GenerationParams& params) {
    std::string out;
    for (std::size_t i = 0; i < prompts.size(); ++i) {
        out += adapter_request(i, prompts[i], params);
        out += '\n';
    }
    return out;
}

inline std::vector<std::string> run_subprocess(const GeneratorAdapter& adapter, const std::vector<std::string>& prompts,
                                               const GenerationParams& params, Diagnostics* diag) {
    using Clock = std::chrono::steady_clock;
    const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                             std::chrono::duration<double>(adapter.timeout_seconds));
    ::signal(SIGPIPE, SIG_IGN);

    int to_child[2];
    int from_child[2];
    if (::pipe2(to_child, O_CLOEXEC) != 0) throw std::system_error(errno, std::generic_category(), "pipe");
    Fd in_read(to_child[0]), in_write(to_child[1]);
    if (::pipe2(from_child, O_CLOEXEC) != 0) throw std::system_error(errno, std::generic_category(), "pipe");
    Fd out_read(from_child[0]), out_write(from_child[1]);

    const pid_t pid = ::fork();
    if (pid < 0) throw std::system_error(errno, std::generic_category(), "fork");
    if (pid == 0) {
        ::dup2(in_read.get(), STDIN_FILENO);
        ::dup2(out_write.get(), STDOUT_FILENO);
        ::execl("/bin/sh", "sh", "-c", adapter.endpoint.c_str(), static_cast<char*>(nullptr));
        ::_exit(127);
    }
    in_read.reset();
    out_write.reset();
    ::fcntl(in_write.get(), F_SETFL, ::fcntl(in_write.get(), F_GETFL) | O_NONBLOCK);

    auto reap = [pid](bool kill) {
        if (kill) ::kill(pid, SIGKILL);
        int status = 0;
        while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
        }
        return status;
    };

    const std::string request = batch(prompts, params);
    std::size_t written = 0;
    if (request.empty()) in_write.reset();
    ResponseCollector collector(prompts.size(), diag);
    std::string pending;
    char buf[65536];

    try {
        while (out_read.get() >= 0 && !collector.complete()) {
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()).count();
            if (left <= 0) throw AdapterTimeout("adapter did not answer within " + std::to_string(adapter.timeout_seconds) + " s");
            pollfd fds[2] = {{out_read.get(), POLLIN, 0}, {in_write.get(), POLLOUT, 0}};
            const nfds_t nfds = in_write.get() >= 0 ? 2 : 1;
            if (::poll(fds, nfds, static_cast<int>(std::min<long long>(left, 1000))) < 0) {
                if (errno == EINTR) continue;
                throw std::system_error(errno, std::generic_category(), "poll");
            }
            if (nfds == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
                const ssize_t n = ::write(in_write.get(), request.data() + written, request.size() - written);
                if (n > 0) written += static_cast<std::size_t>(n);
                if ((n < 0 && errno != EAGAIN && errno != EINTR) || written == request.size()) in_write.reset();
            }
            if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
                const ssize_t n = ::read(out_read.get(), buf, sizeof buf);
                if (n < 0 && (errno == EINTR || errno == EAGAIN)) continue;
                if (n <= 0) {
                    out_read.reset();
                    break;
                }
                pending.append(buf, static_cast<std::size_t>(n));
                std::size_t start = 0;
                for (std::size_t nl; (nl = pending.find('\n', start)) != std::string::npos; start = nl + 1) {
                    collector.feed(std::string_view(pending).substr(start, nl - start));
                }
                pending.erase(0, start);
            }
        }
        if (!pending.empty()) collector.feed(pending);
    } catch (...) {
        reap(true);
        throw;
    }
    in_write.reset();
    out_read.reset();
    const int status = reap(false);
    if (WIFEXITED(status) && WEXITSTATUS(status) != 0) {
        warn(diag, "adapter exited with status " + std::to_string(WEXITSTATUS(status)));
    } else if (WIFSIGNALED(status) && WTERMSIG(status) != SIGPIPE) {
        warn(diag, "adapter terminated by signal " + std::to_string(WTERMSIG(status)));
    }
    return collector.finish();
}

inline std::vector<std::string> run_file_exchange(const GeneratorAdapter& adapter,
                                                  const std::vector<std::string>& prompts,
                                                  const GenerationParams& params, Diagnostics* diag) {
    namespace fs = std::filesystem;
    using Clock = std::chrono::steady_clock;
    const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                             std::chrono::duration<double>(adapter.timeout_seconds));
    const fs::path dir = adapter.endpoint;
    fs::create_directories(dir);
    const fs::path completions = dir / kCompletionsFile;
    fs::remove(completions);

    const fs::path staging = dir / (std::string(kPromptsFile) + ".tmp");
    {
        std::ofstream out(staging, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + staging.string());
        out << batch(prompts, params);
        if (!out.flush()) throw std::runtime_error("cannot write " + staging.string());
    }
    fs::rename(staging, dir / kPromptsFile);

    while (!fs::exists(completions)) {
        if (Clock::now() >= deadline) {
            throw AdapterTimeout("no " + std::string(kCompletionsFile) + " in " + dir.string() + " within " +
                                 std::to_string(adapter.timeout_seconds) + " s");
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    std::ifstream in(completions, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + completions.string());
    ResponseCollector collector(prompts.size(), diag);
    for (std::string line; std::getline(in, line);) collector.feed(line);
    return collector.finish();
}

}  // namespace detail

/// Sends one request per prompt to the external generator and returns one
/// completion per prompt, matched by id. Missing ids yield empty
/// completions (with a warning). Calls to the same endpoint are serialized.
inline std::vector<std::string> adapter_generate(const GeneratorAdapter& adapter, const std::vector<std::string>& prompts,
                                                 const GenerationParams& params, Diagnostics* diag = nullptr) {
    validate_params(params);
    if (adapter.endpoint.empty()) throw std::invalid_argument("adapter endpoint is empty");
    std::lock_guard lock(detail::endpoint_mutex(adapter.endpoint));
    if (adapter.mode == GeneratorAdapter::Mode::Subprocess) return detail::run_subprocess(adapter, prompts, params, diag);
    return detail::run_file_exchange(adapter, prompts, params, diag);
}

}  // namespace sokgen
