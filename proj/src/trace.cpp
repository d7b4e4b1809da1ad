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

#include "refuzz/trace.hpp"

#include <stdexcept>

namespace refuzz {
namespace {

nlohmann::json optional_verdict(const std::optional<Verdict>& v) {
  return v ? nlohmann::json(to_string(*v)) : nlohmann::json(nullptr);
}

std::optional<Verdict> read_verdict(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  auto v = verdict_from_string(j.get<std::string>());
  if (!v) throw std::invalid_argument("unknown verdict " + j.dump());
  return v;
}

ProgramStatus read_status(const nlohmann::json& j) {
  auto s = status_from_string(j.get<std::string>());
  if (!s) throw std::invalid_argument("unknown status " + j.dump());
  return *s;
}

}  // namespace

const char* to_string(ErrorClass c) {
  return c == ErrorClass::compilation_errors ? "compilation_errors" : "sanitizer_errors";
}

std::optional<ErrorClass> error_class_from_string(std::string_view s) {
  if (s == "compilation_errors") return ErrorClass::compilation_errors;
  if (s == "sanitizer_errors") return ErrorClass::sanitizer_errors;
  return std::nullopt;
}

void to_json(nlohmann::json& j, const RepairAttempt& a) {
  j = nlohmann::json{{"attempt_index", a.attempt_index},
                     {"error_class", to_string(a.error_class)},
                     {"prompt", a.prompt},
                     {"prompt_over_budget", a.prompt_over_budget},
                     {"response_ref", a.response_ref},
                     {"extracted", a.extracted},
                     {"reverify_static", optional_verdict(a.reverify_static)},
                     {"reverify_dynamic", optional_verdict(a.reverify_dynamic)},
                     {"wall_time_ms", a.wall_time_ms},
                     {"outcomes", a.outcomes}};
}

void from_json(const nlohmann::json& j, RepairAttempt& a) {
  a = RepairAttempt{};
  j.at("attempt_index").get_to(a.attempt_index);
  auto cls = error_class_from_string(j.at("error_class").get<std::string>());
  if (!cls) throw std::invalid_argument("unknown error class " + j.at("error_class").dump());
  a.error_class = *cls;
  j.at("prompt").get_to(a.prompt);
  a.prompt_over_budget = j.value("prompt_over_budget", false);
  j.at("response_ref").get_to(a.response_ref);
  j.at("extracted").get_to(a.extracted);
  a.reverify_static = read_verdict(j.at("reverify_static"));
  a.reverify_dynamic = read_verdict(j.at("reverify_dynamic"));
  j.at("wall_time_ms").get_to(a.wall_time_ms);
  j.at("outcomes").get_to(a.outcomes);
}

void to_json(nlohmann::json& j, const RepairTrace& t) {
  j = nlohmann::json{{"program_id", t.program_id},
                     {"initial_status", t.initial_status ? nlohmann::json(to_string(*t.initial_status))
                                                         : nlohmann::json(nullptr)},
                     {"initial_outcomes", t.initial_outcomes},
                     {"attempts", t.attempts},
                     {"final_status", to_string(t.final_status)},
                     {"total_time_ms", t.total_time_ms},
                     {"incomplete", t.incomplete},
                     {"incomplete_reason", t.incomplete_reason}};
}

void from_json(const nlohmann::json& j, RepairTrace& t) {
  t = RepairTrace{};
  j.at("program_id").get_to(t.program_id);
  if (!j.at("initial_status").is_null()) t.initial_status = read_status(j["initial_status"]);
  j.at("initial_outcomes").get_to(t.initial_outcomes);
  j.at("attempts").get_to(t.attempts);
  t.final_status = read_status(j.at("final_status"));
  j.at("total_time_ms").get_to(t.total_time_ms);
  j.at("incomplete").get_to(t.incomplete);
  j.at("incomplete_reason").get_to(t.incomplete_reason);
}

}  // namespace refuzz
