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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "refuzz/corpus.hpp"
#include "refuzz/llm_client.hpp"
#include "refuzz/report.hpp"
#include "refuzz/trace.hpp"
#include "refuzz/validator.hpp"

namespace refuzz {

struct RepairPolicy {
  int max_attempts = 2;
  /// Substituted for the optimisation level named in the prompt.
  std::string opt_level_arg = "-O0";

  void validate() const;
};

inline constexpr std::string_view kErrorLogDelimiter = "--- ERROR LOG ---";

std::string build_prompt(std::string_view source, std::string_view log, ErrorClass error_class,
                         std::string_view opt_level_arg);

/// The program text embedded in a prompt built by build_prompt, with
/// trailing newlines removed. Cassettes key on its hash because the log half
/// of a prompt carries pids and addresses.
std::optional<std::string> program_section(std::string_view prompt);

/// Hash a cassette's `source_sha256` field should hold for this program.
std::string cassette_key(std::string_view source);

// Static + dynamic checking, abstracted so tests can substitute a fake.
class ProgramValidator {
 public:
  virtual ~ProgramValidator() = default;
  virtual ValidationOutcome check_static(const ProgramSource& program) = 0;
  virtual std::vector<ValidationOutcome> check_dynamic(const ProgramSource& program) = 0;
};

class ToolchainValidator : public ProgramValidator {
 public:
  explicit ToolchainValidator(ToolchainConfig cfg) : cfg_(std::move(cfg)) {}
  ValidationOutcome check_static(const ProgramSource& program) override { return validate_static(program, cfg_); }
  std::vector<ValidationOutcome> check_dynamic(const ProgramSource& program) override {
    return validate_dynamic(program, cfg_);
  }
  const ToolchainConfig& config() const { return cfg_; }

 private:
  ToolchainConfig cfg_;
};

struct RepairContext {
  CorpusStore& store;
  ProgramValidator& validator;
  LanguageModel& model;
  ModelConfig model_config;
  RepairPolicy policy;
  /// Defaults to <store root>/traces.
  std::filesystem::path traces_dir;
};

/// Runs the detect, prompt, fix, re-verify loop on one non-terminal program.
/// Validator tool errors and transport failures end the loop early with the
/// trace marked incomplete and the program left where it was.
RepairTrace refuzz_one(RepairContext& ctx, const std::string& program_id);

struct CampaignResult {
  std::vector<RepairTrace> traces;
  std::size_t pre_valid = 0;
  std::size_t total = 0;
  CampaignStats stats;
};

/// Every non-terminal program exactly once, spread over `workers` threads.
/// Writes <root>/stats.json.
CampaignResult refuzz_corpus(RepairContext& ctx, int workers);

}  // namespace refuzz
