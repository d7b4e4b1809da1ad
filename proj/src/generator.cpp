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

#include "refuzz/generator.hpp"

#include <fstream>
#include <stdexcept>

namespace refuzz {
namespace fs = std::filesystem;

namespace {

// Unbiased draw from [0, n); spelled out so sequences do not depend on the
// standard library's distribution implementation.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do x = rng();
  while (x >= limit);
  return x % n;
}

std::string trimmed(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void GenSpec::validate() const {
  if (keyword_pool.empty()) throw std::invalid_argument("generator keyword pool is empty");
  if (keywords_per_prompt < 1) throw std::invalid_argument("generator.keywords_per_prompt must be at least 1");
  if (static_cast<std::size_t>(keywords_per_prompt) > keyword_pool.size())
    throw std::invalid_argument("generator.keywords_per_prompt exceeds the keyword pool size");
  if (count < 0) throw std::invalid_argument("generator.count must not be negative");
}

std::vector<std::string> load_keywords(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read keyword file " + path.string());
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    line = trimmed(line);
    if (line.empty() || line.front() == '#') continue;
    out.push_back(line);
  }
  return out;
}

std::vector<std::string> sample_keywords(const GenSpec& spec, std::mt19937_64& rng) {
  spec.validate();
  std::vector<std::size_t> order(spec.keyword_pool.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<std::string> picked;
  for (std::size_t i = 0; i < static_cast<std::size_t>(spec.keywords_per_prompt); ++i) {
    std::size_t j = i + draw_below(rng, order.size() - i);
    std::swap(order[i], order[j]);
    picked.push_back(spec.keyword_pool[order[i]]);
  }
  return picked;
}

std::string render_generation_prompt(const std::vector<std::string>& keywords) {
  std::string list;
  for (std::size_t i = 0; i < keywords.size(); ++i) {
    if (i) list += ", ";
    list += keywords[i];
  }
  return "Write a complete, self-contained C program that exercises the following concepts: " + list +
         ".\nThe program must define main, use only the C standard library, read no input and terminate on its "
         "own.\nReturn the whole program as a single ```c code block.\n";
}

std::string gen_prompt(const GenSpec& spec, std::mt19937_64& rng) {
  return render_generation_prompt(sample_keywords(spec, rng));
}

GenerationResult generate(const GenSpec& spec, LanguageModel& model, const ModelConfig& model_config,
                          CorpusStore& store) {
  spec.validate();
  GenerationResult result;
  std::mt19937_64 rng(spec.seed);
  const fs::path staging = store.root() / "staging";
  fs::create_directories(staging);
  for (int i = 0; i < spec.count; ++i) {
    const std::string prompt = gen_prompt(spec, rng);
    CompletionResponse response;
    try {
      response = model.complete({prompt, model_config});
    } catch (const TransportError&) {
      ++result.transport_errors;
      continue;
    } catch (const ProtocolError&) {
      ++result.transport_errors;
      continue;
    }
    auto code = extract_code(response.text);
    if (!code || code->empty()) {
      ++result.extraction_failures;
      continue;
    }
    const fs::path file = staging / ("gen-" + std::to_string(spec.seed) + "-" + std::to_string(i) + ".c");
    {
      std::ofstream out(file, std::ios::binary | std::ios::trunc);
      out << *code;
      if (code->back() != '\n') out << '\n';
    }
    IngestResult ingested = store.ingest(std::span<const fs::path>(&file, 1), Origin::blackbox);
    fs::remove(file);
    result.ingest_errors += static_cast<int>(ingested.errors.size());
    for (auto& p : ingested.programs) result.programs.push_back(std::move(p));
  }
  std::error_code ignored;
  fs::remove(staging, ignored);
  return result;
}

}  // namespace refuzz
