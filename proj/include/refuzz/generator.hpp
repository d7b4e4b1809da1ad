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
#include <random>
#include <string>
#include <vector>

#include "refuzz/corpus.hpp"
#include "refuzz/llm_client.hpp"

namespace refuzz {

struct GenSpec {
  std::vector<std::string> keyword_pool;
  int keywords_per_prompt = 3;
  int count = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

/// One keyword per line; blank lines and `#` comments are skipped.
std::vector<std::string> load_keywords(const std::filesystem::path& path);

/// Draws keywords_per_prompt distinct keywords, in draw order.
std::vector<std::string> sample_keywords(const GenSpec& spec, std::mt19937_64& rng);

std::string render_generation_prompt(const std::vector<std::string>& keywords);

std::string gen_prompt(const GenSpec& spec, std::mt19937_64& rng);

struct GenerationResult {
  std::vector<TestProgram> programs;
  int extraction_failures = 0;
  int transport_errors = 0;
  int ingest_errors = 0;
};

/// count rounds of prompt, complete, extract; every extracted program is
/// ingested as a Raw black-box program.
GenerationResult generate(const GenSpec& spec, LanguageModel& model, const ModelConfig& model_config,
                          CorpusStore& store);

}  // namespace refuzz
