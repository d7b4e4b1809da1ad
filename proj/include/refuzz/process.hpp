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

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace refuzz {

// Child-process execution with a wall-clock deadline and a memory ceiling.
//
// The child runs in its own process group with stdin bound to /dev/null.
// On deadline or memory overrun the whole group receives SIGKILL, so any
// grandchildren die with it.
//
// Memory is enforced two ways. Resident set size of the direct child is
// sampled while it runs; crossing the ceiling kills the group. When
// `limit_address_space` is set the ceiling is additionally installed as
// RLIMIT_AS, which is only safe for uninstrumented binaries: ASan and MSan
// reserve terabytes of shadow address space up front.

struct RunLimits {
  std::chrono::milliseconds timeout{60'000};
  std::uint64_t memory_limit_bytes = 16ull << 30;
  bool limit_address_space = false;
};

struct ProcessSpec {
  std::vector<std::string> argv;
  /// KEY=VALUE entries layered over the parent environment.
  std::vector<std::string> env;
  std::filesystem::path cwd;
  RunLimits limits;
  /// Bytes retained per stream; the remainder is read and dropped.
  std::size_t capture_cap = 4u << 20;
};

enum class Termination { exited, signaled, timed_out, memory_exceeded, spawn_failed };

struct ProcessResult {
  Termination termination = Termination::spawn_failed;
  int exit_code = -1;  ///< valid when termination == exited
  int signal = 0;      ///< valid when termination == signaled
  std::string stdout_text;
  std::string stderr_text;
  /// Both streams in arrival order, whole lines only, with a `[stdout]` or
  /// `[stderr]` tag line inserted whenever the source stream changes.
  std::string interleaved;
  std::chrono::milliseconds wall_time{0};
  std::optional<std::uint64_t> peak_rss_bytes;
  std::string spawn_error;
};

ProcessResult run_process(const ProcessSpec& spec);

const char* to_string(Termination t);

}  // namespace refuzz
