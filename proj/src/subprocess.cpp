#include "wellposed/subprocess.hpp"

#include <cerrno>
#include <chrono>
#include <csignal>
#include <cstring>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace wellposed {

namespace {

void close_fd(int& fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

double now_s() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

std::vector<std::string> split_command(const std::string& command) {
  std::vector<std::string> out;
  std::istringstream in(command);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string executable_dir() {
  char buf[4096];
  ssize_t n = ::readlink("/proc/self/exe", buf, sizeof(buf) - 1);
  if (n <= 0) return "";
  buf[n] = '\0';
  std::string path(buf);
  size_t slash = path.rfind('/');
  return slash == std::string::npos ? "" : path.substr(0, slash);
}

RunResult run_with_input(const std::vector<std::string>& argv, const std::string& input,
                         double timeout_s) {
  RunResult result;
  if (argv.empty()) {
    result.spawn_failed = true;
    result.error = "empty command";
    return result;
  }

  // O_CLOEXEC keeps concurrently spawned children from inheriting each
  // other's pipe ends, which would hold stdin open past its EOF.
  int in_pipe[2] = {-1, -1};
  int out_pipe[2] = {-1, -1};
  int err_pipe[2] = {-1, -1};
  if (::pipe2(in_pipe, O_CLOEXEC) < 0 || ::pipe2(out_pipe, O_CLOEXEC) < 0 ||
      ::pipe2(err_pipe, O_CLOEXEC) < 0) {
    result.spawn_failed = true;
    result.error = std::string("pipe: ") + strerror(errno);
    for (int* p : {in_pipe, out_pipe, err_pipe}) {
      close_fd(p[0]);
      close_fd(p[1]);
    }
    return result;
  }

  pid_t pid = ::fork();
  if (pid < 0) {
    result.spawn_failed = true;
    result.error = std::string("fork: ") + strerror(errno);
    for (int* p : {in_pipe, out_pipe, err_pipe}) {
      close_fd(p[0]);
      close_fd(p[1]);
    }
    return result;
  }

  if (pid == 0) {
    ::setpgid(0, 0);  // own process group, so the whole tree can be killed
    ::dup2(in_pipe[0], STDIN_FILENO);
    ::dup2(out_pipe[1], STDOUT_FILENO);
    ::dup2(err_pipe[1], STDERR_FILENO);
    for (int* p : {in_pipe, out_pipe, err_pipe}) {
      ::close(p[0]);
      ::close(p[1]);
    }
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    ::execvp(args[0], args.data());
    fprintf(stderr, "exec %s: %s\n", args[0], strerror(errno));
    _exit(127);
  }

  close_fd(in_pipe[0]);
  close_fd(out_pipe[1]);
  close_fd(err_pipe[1]);

  ::fcntl(in_pipe[1], F_SETFL, O_NONBLOCK);
  ::signal(SIGPIPE, SIG_IGN);

  const double deadline = now_s() + timeout_s;
  size_t written = 0;
  bool stdin_open = true;
  char buf[8192];

  while (true) {
    struct pollfd fds[3];
    int nfds = 0;
    int out_idx = -1, err_idx = -1, in_idx = -1;
    if (out_pipe[0] >= 0) {
      out_idx = nfds;
      fds[nfds++] = {out_pipe[0], POLLIN, 0};
    }
    if (err_pipe[0] >= 0) {
      err_idx = nfds;
      fds[nfds++] = {err_pipe[0], POLLIN, 0};
    }
    if (stdin_open) {
      in_idx = nfds;
      fds[nfds++] = {in_pipe[1], POLLOUT, 0};
    }
    if (nfds == 0) break;

    double remaining = deadline - now_s();
    if (remaining <= 0) {
      result.timed_out = true;
      break;
    }
    int rc = ::poll(fds, nfds, static_cast<int>(remaining * 1000) + 1);
    if (rc < 0) {
      if (errno == EINTR) continue;
      result.error = std::string("poll: ") + strerror(errno);
      break;
    }
    if (rc == 0) {
      result.timed_out = true;
      break;
    }

    if (in_idx >= 0 && (fds[in_idx].revents & (POLLOUT | POLLERR | POLLHUP))) {
      if (written < input.size() && !(fds[in_idx].revents & (POLLERR | POLLHUP))) {
        ssize_t n = ::write(in_pipe[1], input.data() + written, input.size() - written);
        if (n > 0) written += static_cast<size_t>(n);
        if (n < 0 && errno != EAGAIN && errno != EINTR) written = input.size();
      }
      if (written >= input.size() || (fds[in_idx].revents & (POLLERR | POLLHUP))) {
        close_fd(in_pipe[1]);
        stdin_open = false;
      }
    }
    auto drain = [&](int idx, int* fd, std::string* sink) {
      if (idx < 0 || !(fds[idx].revents & (POLLIN | POLLHUP | POLLERR))) return;
      ssize_t n = ::read(*fd, buf, sizeof(buf));
      if (n > 0) {
        sink->append(buf, static_cast<size_t>(n));
      } else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EINTR)) {
        close_fd(*fd);
      }
    };
    drain(out_idx, &out_pipe[0], &result.out);
    drain(err_idx, &err_pipe[0], &result.err);
  }

  close_fd(in_pipe[1]);
  close_fd(out_pipe[0]);
  close_fd(err_pipe[0]);

  if (result.timed_out) {
    ::kill(-pid, SIGKILL);
    ::kill(pid, SIGKILL);
    result.error = "timeout after " + std::to_string(timeout_s) + "s";
  }

  int status = 0;
  while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  if (result.exit_code == 127 && !result.timed_out) {
    result.spawn_failed = true;
    result.error = result.err.empty() ? "exec failed" : result.err;
  }
  return result;
}

}  // namespace wellposed
