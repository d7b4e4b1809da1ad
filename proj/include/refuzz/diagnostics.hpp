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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace refuzz {

enum class DiagSource { compiler, asan, ubsan, msan, tsan };
enum class Severity { error, warning, fatal, runtime_error };

struct StackFrame {
  int index = 0;
  std::optional<std::string> pc;
  std::optional<std::string> symbol;
  std::optional<std::string> location;

  bool operator==(const StackFrame&) const = default;
};

/// One compiler diagnostic or one sanitizer report.
struct Diagnostic {
  DiagSource source = DiagSource::compiler;
  Severity severity = Severity::error;
  std::string kind;
  std::string message;
  std::optional<std::string> file;
  std::optional<int> line;
  std::optional<int> column;
  std::vector<StackFrame> frames;
  /// Verbatim lines of the log this record came from.
  std::string raw_excerpt;

  /// Warnings are context for the model; everything else asks for a fix.
  bool triggers_repair() const { return severity != Severity::warning; }

  bool operator==(const Diagnostic&) const = default;
};

struct ErrorLog {
  std::string verbatim;
  std::vector<Diagnostic> diagnostics;
  bool truncated = false;

  std::size_t repair_trigger_count() const;
  std::size_t count(Severity s) const;

  bool operator==(const ErrorLog&) const = default;
};

inline constexpr std::size_t kDefaultLogCap = 64 * 1024;

/// Keeps the head of `text` up to `cap` bytes, cut after the last complete
/// line that fits. A single line longer than `cap` is cut at `cap`.
std::string_view truncate_head(std::string_view text, std::size_t cap, bool& truncated);

/// Parses `<file>:<line>:<col>: <severity>: <message>` lines plus driver and
/// linker failures. Never fails; unrecognised lines only live in `verbatim`.
/// Diagnostics are extracted from the full text, `verbatim` is capped.
ErrorLog parse_compiler_log(std::string_view text, std::size_t cap = kDefaultLogCap);

/// Parses `==pid==ERROR: XSanitizer: kind ...` report blocks and UBSan's
/// inline `file:line:col: runtime error: message` form.
ErrorLog parse_sanitizer_log(std::string_view text, std::size_t cap = kDefaultLogCap);

const char* to_string(DiagSource s);
const char* to_string(Severity s);
std::optional<DiagSource> diag_source_from_string(std::string_view s);
std::optional<Severity> severity_from_string(std::string_view s);

void to_json(nlohmann::json& j, const StackFrame& f);
void from_json(const nlohmann::json& j, StackFrame& f);
void to_json(nlohmann::json& j, const Diagnostic& d);
void from_json(const nlohmann::json& j, Diagnostic& d);
void to_json(nlohmann::json& j, const ErrorLog& log);
void from_json(const nlohmann::json& j, ErrorLog& log);

}  // namespace refuzz
