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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "refuzz/corpus.hpp"
#include "refuzz/diagnostics.hpp"

namespace refuzz {

enum class SanitizerKind { address_undefined, memory, thread };

struct SanitizerProfile {
  SanitizerKind kind = SanitizerKind::address_undefined;
  std::vector<std::string> compile_flags;
  std::vector<std::string> runtime_env;  ///< KEY=VALUE

  static SanitizerProfile address_undefined();
  static SanitizerProfile memory();
  static SanitizerProfile thread();
};

const char* to_string(SanitizerKind k);
std::optional<SanitizerKind> sanitizer_from_string(std::string_view s);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ToolchainConfig {
  std::string compiler_path = "clang";
  std::string cxx_compiler_path = "clang++";
  std::vector<std::string> base_flags;
  std::vector<std::string> link_flags{"-lm"};
  std::string opt_level = "-O0";
  /// ASan+UBSan then MSan. TSan is available but off by default.
  std::vector<SanitizerProfile> sanitizer_profiles{SanitizerProfile::address_undefined(),
                                                   SanitizerProfile::memory()};
  double timeout_s = 60.0;
  std::uint64_t memory_limit_bytes = 16ull << 30;
  std::filesystem::path work_dir = "work";
  /// Runs per profile; outputs must agree when > 1.
  int determinism_runs = 1;

  /// Throws ConfigError on a violated invariant.
  void validate() const;
};

enum class Phase { static_check, dynamic_check };
enum class Verdict { pass, fail, hang, resource_exceeded, tool_error };

const char* to_string(Phase p);
const char* to_string(Verdict v);
std::optional<Verdict> verdict_from_string(std::string_view s);

struct ValidationOutcome {
  std::string id;
  std::string program_id;
  Phase phase = Phase::static_check;
  Verdict verdict = Verdict::tool_error;
  ErrorLog error_log;
  std::optional<int> exit_code;
  std::int64_t wall_time_ms = 0;
  std::optional<std::uint64_t> peak_memory_bytes;
  std::optional<SanitizerKind> profile;
  std::string detail;  ///< infrastructure message for tool_error
  std::filesystem::path log_path;
};

void to_json(nlohmann::json& j, const ValidationOutcome& o);
void from_json(const nlohmann::json& j, ValidationOutcome& o);

/// What the validator needs from a program: identity, language and text.
struct ProgramSource {
  std::string id;
  Language language = Language::c;
  std::string text;
};

/// Compiles and links with base_flags + opt_level. The binary is discarded.
ValidationOutcome validate_static(const ProgramSource& program, const ToolchainConfig& cfg);

/// One outcome per sanitizer profile, in profile order. A nonzero exit code
/// with no sanitizer report is still a pass.
std::vector<ValidationOutcome> validate_dynamic(const ProgramSource& program, const ToolchainConfig& cfg);

class ToolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Static fail/hang -> StaticallyInvalid; any dynamic non-pass ->
/// DynamicallyInvalid; all pass -> Valid. Throws ToolError if any outcome
/// is a tool_error, since an infrastructure fault says nothing about the
/// program.
ProgramStatus classify(const ValidationOutcome& static_outcome, std::span<const ValidationOutcome> dynamic_outcomes);

}  // namespace refuzz
