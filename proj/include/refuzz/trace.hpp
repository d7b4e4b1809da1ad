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
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "refuzz/corpus.hpp"
#include "refuzz/validator.hpp"

namespace refuzz {

enum class ErrorClass { compilation_errors, sanitizer_errors };

const char* to_string(ErrorClass c);
std::optional<ErrorClass> error_class_from_string(std::string_view s);

struct RepairAttempt {
  int attempt_index = 1;
  ErrorClass error_class = ErrorClass::compilation_errors;
  std::string prompt;
  bool prompt_over_budget = false;
  /// Path of the stored model response, relative to the corpus root.
  std::string response_ref;
  bool extracted = false;
  std::optional<Verdict> reverify_static;
  /// Worst verdict across the dynamic profiles, when they ran.
  std::optional<Verdict> reverify_dynamic;
  std::int64_t wall_time_ms = 0;
  /// Every outcome of the re-verification, static first.
  std::vector<ValidationOutcome> outcomes;
};

struct RepairTrace {
  std::string program_id;
  /// Classification before any repair.
  std::optional<ProgramStatus> initial_status;
  std::vector<ValidationOutcome> initial_outcomes;
  std::vector<RepairAttempt> attempts;
  ProgramStatus final_status = ProgramStatus::raw;
  std::int64_t total_time_ms = 0;
  /// Aborted by an infrastructure fault; the program keeps its status.
  bool incomplete = false;
  std::string incomplete_reason;
};

void to_json(nlohmann::json& j, const RepairAttempt& a);
void from_json(const nlohmann::json& j, RepairAttempt& a);
void to_json(nlohmann::json& j, const RepairTrace& t);
void from_json(const nlohmann::json& j, RepairTrace& t);

}  // namespace refuzz
