#pragma once

// Minimal subprocess runner for workflow steps: argv-style exec (no shell),
// working directory, extra environment entries, stdout/stderr redirected to
// files, and a wall-clock timeout that kills the step's whole process group.

#include <fcntl.h>
#include <signal.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "fairflow/errors.hpp"

namespace fairflow {

struct SpawnResult {
  int exit_code = -1;   // if signaled: 128 + signal number
  bool timed_out = false;
  double duration_s = 0.0;
};

namespace process_detail {

inline int open_log(const std::filesystem::path& p) {
  int fd = ::open(p.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(Errc::io_error, "cannot open log file " + p.string());
  return fd;
}

}  // namespace process_detail

// Runs `argv` in `cwd` with `extra_env` appended to the inherited environment
// ("NAME=value" strings; later entries win). Blocks until exit or until
// `timeout_s` seconds elapse, whereupon the process group is killed and
// `timed_out` is set. `timeout_s <= 0` means no limit.
inline SpawnResult run_process(const std::vector<std::string>& argv,
                               const std::filesystem::path& cwd,
                               const std::vector<std::string>& extra_env,
                               const std::filesystem::path& stdout_file,
                               const std::filesystem::path& stderr_file, double timeout_s) {
  if (argv.empty()) throw Error(Errc::schema_error, "empty command");

  int out_fd = process_detail::open_log(stdout_file);
  int err_fd = process_detail::open_log(stderr_file);

  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  auto start = std::chrono::steady_clock::now();
  pid_t pid = ::fork();
  if (pid < 0) {
    ::close(out_fd);
    ::close(err_fd);
    throw Error(Errc::io_error, std::string("fork failed: ") + std::strerror(errno));
  }

  if (pid == 0) {
    // Child: own process group so a timeout can reap grandchildren too.
    ::setpgid(0, 0);
    if (::chdir(cwd.c_str()) != 0) _exit(127);
    ::dup2(out_fd, STDOUT_FILENO);
    ::dup2(err_fd, STDERR_FILENO);
    for (const auto& kv : extra_env) {
      std::string copy = kv;
      size_t eq = copy.find('=');
      if (eq == std::string::npos) continue;
      copy[eq] = '\0';
      ::setenv(copy.c_str(), copy.c_str() + eq + 1, 1);
    }
    ::execvp(cargv[0], cargv.data());
    const char* msg = "exec failed: ";
    ssize_t n = ::write(STDERR_FILENO, msg, std::strlen(msg));
    n = ::write(STDERR_FILENO, cargv[0], std::strlen(cargv[0]));
    n = ::write(STDERR_FILENO, "\n", 1);
    (void)n;
    _exit(127);
  }

  ::close(out_fd);
  ::close(err_fd);
  ::setpgid(pid, pid);  // may race the child's own call; either one suffices

  SpawnResult result;
  int status = 0;
  const auto deadline =
      start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                  std::chrono::duration<double>(timeout_s > 0 ? timeout_s : 1e18));
  for (;;) {
    pid_t r = ::waitpid(pid, &status, WNOHANG);
    if (r == pid) break;
    if (r < 0 && errno != EINTR) {
      throw Error(Errc::io_error, std::string("waitpid failed: ") + std::strerror(errno));
    }
    if (timeout_s > 0 && std::chrono::steady_clock::now() >= deadline) {
      result.timed_out = true;
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);  // in case the group vanished already
      while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
      }
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }

  result.duration_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (WIFEXITED(status)) {
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.exit_code = 128 + WTERMSIG(status);
  }
  return result;
}

}  // namespace fairflow
