// Copyright 2026 The refuzz Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "refuzz/process.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <map>

extern char** environ;

namespace refuzz {
namespace {

using Clock = std::chrono::steady_clock;

struct Pipe {
  int fd[2] = {-1, -1};
  Pipe() {
    if (::pipe2(fd, O_CLOEXEC) != 0) throw std::system_error(errno, std::generic_category(), "pipe2");
  }
  ~Pipe() {
    close_read();
    close_write();
  }
  Pipe(const Pipe&) = delete;
  Pipe& operator=(const Pipe&) = delete;
  void close_read() {
    if (fd[0] >= 0) ::close(fd[0]);
    fd[0] = -1;
  }
  void close_write() {
    if (fd[1] >= 0) ::close(fd[1]);
    fd[1] = -1;
  }
};

std::vector<std::string> merged_environment(const std::vector<std::string>& overrides) {
  std::map<std::string, std::string> vars;
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    vars[std::string(kv.substr(0, eq))] = std::string(kv.substr(eq + 1));
  }
  for (const auto& kv : overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    vars[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  std::vector<std::string> out;
  out.reserve(vars.size());
  for (auto& [k, v] : vars) out.push_back(k + "=" + v);
  return out;
}

std::optional<std::uint64_t> resident_bytes(pid_t pid) {
  std::ifstream statm("/proc/" + std::to_string(pid) + "/statm");
  std::uint64_t size = 0, resident = 0;
  if (!(statm >> size >> resident)) return std::nullopt;
  return resident * static_cast<std::uint64_t>(::sysconf(_SC_PAGESIZE));
}

[[noreturn]] void child_fail(int report_fd, int err) {
  (void)!::write(report_fd, &err, sizeof err);
  ::_exit(127);
}

// Splits each stream into whole lines and merges them in arrival order.
class Interleaver {
 public:
  explicit Interleaver(std::size_t cap) : cap_(cap) {}

  void feed(int stream, std::string_view data) {
    auto& pending = pending_[stream];
    pending.append(data);
    std::size_t start = 0;
    for (auto nl = pending.find('\n'); nl != std::string::npos; nl = pending.find('\n', start)) {
      emit(stream, std::string_view(pending).substr(start, nl + 1 - start));
      start = nl + 1;
    }
    pending.erase(0, start);
  }

  void finish() {
    for (int s = 0; s < 2; ++s) {
      if (!pending_[s].empty()) emit(s, pending_[s] + "\n");
      pending_[s].clear();
    }
  }

  std::string take() { return std::move(out_); }

 private:
  void emit(int stream, std::string_view line) {
    if (out_.size() >= cap_) return;
    if (stream != current_) {
      out_ += stream == 0 ? "[stdout]\n" : "[stderr]\n";
      current_ = stream;
    }
    out_.append(line);
  }

  std::size_t cap_;
  int current_ = -1;
  std::array<std::string, 2> pending_;
  std::string out_;
};

}  // namespace

const char* to_string(Termination t) {
  switch (t) {
    case Termination::exited: return "exited";
    case Termination::signaled: return "signaled";
    case Termination::timed_out: return "timed_out";
    case Termination::memory_exceeded: return "memory_exceeded";
    case Termination::spawn_failed: return "spawn_failed";
  }
  return "unknown";
}

ProcessResult run_process(const ProcessSpec& spec) {
  ProcessResult result;
  if (spec.argv.empty()) {
    result.spawn_error = "empty argv";
    return result;
  }

  // Everything the child needs is materialised before fork(); only
  // async-signal-safe calls happen between fork and exec.
  std::vector<char*> argv;
  for (const auto& a : spec.argv) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  auto env_storage = merged_environment(spec.env);
  std::vector<char*> envp;
  for (auto& e : env_storage) envp.push_back(e.data());
  envp.push_back(nullptr);
  const std::string cwd = spec.cwd.string();
  const rlim_t as_limit = static_cast<rlim_t>(spec.limits.memory_limit_bytes);
  const bool limit_as = spec.limits.limit_address_space;

  Pipe out, err, report;
  const auto started = Clock::now();
  pid_t pid = ::fork();
  if (pid < 0) {
    result.spawn_error = std::string("fork: ") + std::strerror(errno);
    return result;
  }
  if (pid == 0) {
    ::setpgid(0, 0);
    int devnull = ::open("/dev/null", O_RDONLY);
    if (devnull < 0 || ::dup2(devnull, STDIN_FILENO) < 0) child_fail(report.fd[1], errno);
    if (::dup2(out.fd[1], STDOUT_FILENO) < 0 || ::dup2(err.fd[1], STDERR_FILENO) < 0)
      child_fail(report.fd[1], errno);
    if (!cwd.empty() && ::chdir(cwd.c_str()) != 0) child_fail(report.fd[1], errno);
    if (limit_as) {
      struct rlimit rl{as_limit, as_limit};
      if (::setrlimit(RLIMIT_AS, &rl) != 0) child_fail(report.fd[1], errno);
    }
    struct rlimit core{0, 0};
    ::setrlimit(RLIMIT_CORE, &core);
    ::execvpe(argv[0], argv.data(), envp.data());
    child_fail(report.fd[1], errno);
  }
  ::setpgid(pid, pid);  // closes the race with the child's own setpgid
  out.close_write();
  err.close_write();
  report.close_write();

  int exec_errno = 0;
  if (::read(report.fd[0], &exec_errno, sizeof exec_errno) == sizeof exec_errno) {
    ::waitpid(pid, nullptr, 0);
    result.spawn_error = std::string(spec.argv[0]) + ": " + std::strerror(exec_errno);
    result.wall_time = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);
    return result;
  }

  const auto deadline = started + spec.limits.timeout;
  Interleaver interleaver(spec.capture_cap * 2);
  std::array<std::string*, 2> sinks{&result.stdout_text, &result.stderr_text};
  std::array<int, 2> fds{out.fd[0], err.fd[0]};
  bool killed_for_time = false, killed_for_memory = false, reaped = false;
  int status = 0;
  struct rusage usage{};
  std::uint64_t peak_sampled = 0;
  std::array<char, 16384> buf{};

  auto kill_group = [&] { ::kill(-pid, SIGKILL); };

  while (fds[0] >= 0 || fds[1] >= 0 || !reaped) {
    std::array<pollfd, 2> pfds{};
    nfds_t n = 0;
    std::array<int, 2> which{};
    for (int s = 0; s < 2; ++s) {
      if (fds[s] < 0) continue;
      pfds[n] = {fds[s], POLLIN, 0};
      which[n++] = s;
    }
    int rc = n ? ::poll(pfds.data(), n, 10) : (::usleep(5000), 0);
    if (rc < 0 && errno != EINTR) break;
    for (nfds_t i = 0; rc > 0 && i < n; ++i) {
      if (!(pfds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
      int s = which[i];
      ssize_t got = ::read(fds[s], buf.data(), buf.size());
      if (got <= 0) {
        ::close(fds[s]);
        fds[s] = -1;
        if (s == 0) out.fd[0] = -1; else err.fd[0] = -1;
        continue;
      }
      std::string_view chunk(buf.data(), static_cast<std::size_t>(got));
      if (sinks[s]->size() < spec.capture_cap)
        sinks[s]->append(chunk.substr(0, spec.capture_cap - sinks[s]->size()));
      interleaver.feed(s, chunk);
    }

    if (!reaped) {
      pid_t w = ::wait4(pid, &status, WNOHANG, &usage);
      if (w == pid) {
        reaped = true;
        // Survivors in the group would hold the pipes open forever.
        kill_group();
      } else {
        if (auto rss = resident_bytes(pid)) {
          peak_sampled = std::max(peak_sampled, *rss);
          if (*rss > spec.limits.memory_limit_bytes && !killed_for_memory && !killed_for_time) {
            killed_for_memory = true;
            kill_group();
          }
        }
        if (Clock::now() >= deadline && !killed_for_time && !killed_for_memory) {
          killed_for_time = true;
          kill_group();
        }
      }
    }
  }
  if (!reaped) ::wait4(pid, &status, 0, &usage);

  result.wall_time = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started);
  interleaver.finish();
  result.interleaved = interleaver.take();
  std::uint64_t peak = static_cast<std::uint64_t>(usage.ru_maxrss) * 1024u;
  result.peak_rss_bytes = std::max(peak, peak_sampled);

  if (killed_for_time) {
    result.termination = Termination::timed_out;
  } else if (killed_for_memory) {
    result.termination = Termination::memory_exceeded;
  } else if (WIFEXITED(status)) {
    result.termination = Termination::exited;
    result.exit_code = WEXITSTATUS(status);
  } else if (WIFSIGNALED(status)) {
    result.termination = Termination::signaled;
    result.signal = WTERMSIG(status);
  }
  // An RLIMIT_AS overrun surfaces as an allocation failure inside the child;
  // the peak figure is the only reliable witness.
  if ((result.termination == Termination::exited || result.termination == Termination::signaled) &&
      result.peak_rss_bytes && *result.peak_rss_bytes > spec.limits.memory_limit_bytes)
    result.termination = Termination::memory_exceeded;
  return result;
}

}  // namespace refuzz
