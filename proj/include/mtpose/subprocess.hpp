#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>

#include "mtpose/error.hpp"

namespace mtpose {

/// Child process speaking a newline-delimited protocol on stdin/stdout, with
/// stderr captured for diagnostics. The command runs under /bin/sh -c.
class LineProcess {
public:
    LineProcess(const std::string& command, const std::filesystem::path& working_dir) {
        ignore_sigpipe_once();
        int to_child[2];
        int from_child[2];
        int err_pipe[2];
        if (pipe2(to_child, O_CLOEXEC) != 0 || pipe2(from_child, O_CLOEXEC) != 0 ||
            pipe2(err_pipe, O_CLOEXEC) != 0) {
            throw IoError("pipe2 failed: " + std::string(std::strerror(errno)));
        }
        const std::string dir = working_dir.string();
        pid_ = fork();
        if (pid_ < 0) {
            throw IoError("fork failed: " + std::string(std::strerror(errno)));
        }
        if (pid_ == 0) {
            // child: only async-signal-safe calls from here to exec
            if (!dir.empty() && chdir(dir.c_str()) != 0) {
                _exit(127);
            }
            dup2(to_child[0], STDIN_FILENO);
            dup2(from_child[1], STDOUT_FILENO);
            dup2(err_pipe[1], STDERR_FILENO);
            execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            _exit(127);
        }
        close(to_child[0]);
        close(from_child[1]);
        close(err_pipe[1]);
        stdin_fd_ = to_child[1];
        stdout_fd_ = from_child[0];
        stderr_fd_ = err_pipe[0];
    }

    LineProcess(const LineProcess&) = delete;
    LineProcess& operator=(const LineProcess&) = delete;

    ~LineProcess() {
        if (stdin_fd_ >= 0) close(stdin_fd_);
        if (stdout_fd_ >= 0) close(stdout_fd_);
        if (stderr_fd_ >= 0) close(stderr_fd_);
        if (pid_ > 0) {
            // closing stdin asks the child to exit; escalate if it lingers
            int status = 0;
            for (int i = 0; i < 50; ++i) {
                if (waitpid(pid_, &status, WNOHANG) != 0) {
                    pid_ = -1;
                    return;
                }
                usleep(10'000);
            }
            kill(pid_, SIGKILL);
            waitpid(pid_, &status, 0);
        }
    }

    void write_line(const std::string& line) {
        std::string payload = line;
        payload.push_back('\n');
        std::size_t off = 0;
        while (off < payload.size()) {
            const ssize_t n = write(stdin_fd_, payload.data() + off, payload.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw IoError("write to adapter failed: " + std::string(std::strerror(errno)) +
                              diagnostic_suffix());
            }
            off += static_cast<std::size_t>(n);
        }
    }

    /// Next full line from the child's stdout, or nullopt when timeout_ms
    /// elapses first. EOF raises ProtocolError with the child's stderr.
    std::optional<std::string> read_line(int timeout_ms) {
        const auto deadline =
            std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
        for (;;) {
            const auto newline = out_buffer_.find('\n');
            if (newline != std::string::npos) {
                std::string line = out_buffer_.substr(0, newline);
                out_buffer_.erase(0, newline + 1);
                return line;
            }
            const auto now = std::chrono::steady_clock::now();
            if (now >= deadline) {
                return std::nullopt;
            }
            const int wait_ms = static_cast<int>(
                std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1);
            pollfd fds[2] = {{stdout_fd_, POLLIN, 0}, {stderr_fd_, POLLIN, 0}};
            const int rc = poll(fds, 2, wait_ms);
            if (rc < 0) {
                if (errno == EINTR) continue;
                throw IoError("poll on adapter pipes failed: " +
                              std::string(std::strerror(errno)));
            }
            if (rc == 0) {
                return std::nullopt;
            }
            if (fds[1].revents & (POLLIN | POLLHUP)) {
                drain(stderr_fd_, stderr_buffer_);
            }
            if (fds[0].revents & POLLIN) {
                if (!drain(stdout_fd_, out_buffer_) && out_buffer_.find('\n') == std::string::npos) {
                    throw ProtocolError("adapter closed its output stream" + diagnostic_suffix());
                }
            } else if (fds[0].revents & POLLHUP) {
                if (!drain(stdout_fd_, out_buffer_) && out_buffer_.find('\n') == std::string::npos) {
                    throw ProtocolError("adapter closed its output stream" + diagnostic_suffix());
                }
            }
        }
    }

    /// Exit status if the child has already terminated.
    std::optional<int> exit_status() {
        if (pid_ <= 0) return exit_status_;
        int status = 0;
        const pid_t rc = waitpid(pid_, &status, WNOHANG);
        if (rc == pid_) {
            pid_ = -1;
            exit_status_ = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
        }
        return exit_status_;
    }

    /// Everything the child has written to stderr so far.
    std::string stderr_output() {
        drain(stderr_fd_, stderr_buffer_);
        return stderr_buffer_;
    }

private:
    static void ignore_sigpipe_once() {
        static std::once_flag flag;
        std::call_once(flag, [] { signal(SIGPIPE, SIG_IGN); });
    }

    // Non-blocking-ish read of whatever is available; false on EOF.
    bool drain(int fd, std::string& buffer) {
        char chunk[4096];
        for (;;) {
            pollfd p{fd, POLLIN, 0};
            if (poll(&p, 1, 0) <= 0 || !(p.revents & (POLLIN | POLLHUP))) {
                return true;
            }
            const ssize_t n = read(fd, chunk, sizeof(chunk));
            if (n < 0) {
                if (errno == EINTR) continue;
                return true;
            }
            if (n == 0) {
                return false;
            }
            buffer.append(chunk, static_cast<std::size_t>(n));
        }
    }

    std::string diagnostic_suffix() {
        const std::string err = stderr_output();
        std::string suffix;
        if (const auto status = exit_status()) {
            suffix += " (exit status " + std::to_string(*status) + ")";
        }
        if (!err.empty()) {
            suffix += "; adapter stderr: " + err;
        }
        return suffix;
    }

    pid_t pid_ = -1;
    int stdin_fd_ = -1;
    int stdout_fd_ = -1;
    int stderr_fd_ = -1;
    std::string out_buffer_;
    std::string stderr_buffer_;
    std::optional<int> exit_status_;
};

}  // namespace mtpose
