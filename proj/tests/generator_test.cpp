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

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "marker_validator.hpp"
#include "support.hpp"

namespace refuzz {
namespace {

namespace fs = std::filesystem;

std::vector<std::string> pool() {
  return {"loop unrolling", "inlining", "dead code elimination", "vectorization", "pointer arithmetic",
          "bit fields", "recursion", "switch statements"};
}

TEST(Generator, SamplingIsDeterministicPerSeed) {
  GenSpec spec{pool(), 3, 1, 42};
  std::mt19937_64 a(42), b(42), c(43);
  std::vector<std::vector<std::string>> from_a, from_b, from_c;
  for (int i = 0; i < 20; ++i) {
    from_a.push_back(sample_keywords(spec, a));
    from_b.push_back(sample_keywords(spec, b));
    from_c.push_back(sample_keywords(spec, c));
  }
  EXPECT_EQ(from_a, from_b);
  EXPECT_NE(from_a, from_c);
}

TEST(Generator, SamplesAreDistinctPoolMembers) {
  GenSpec spec{pool(), 4, 1, 7};
  std::mt19937_64 rng(7);
  const auto p = pool();
  for (int i = 0; i < 500; ++i) {
    auto k = sample_keywords(spec, rng);
    ASSERT_EQ(k.size(), 4u);
    EXPECT_EQ(std::set<std::string>(k.begin(), k.end()).size(), 4u);
    for (const auto& w : k) EXPECT_NE(std::find(p.begin(), p.end(), w), p.end());
  }
}

TEST(Generator, WholePoolMentionsEveryKeywordOnce) {
  GenSpec spec{pool(), static_cast<int>(pool().size()), 1, 3};
  std::mt19937_64 rng(3);
  const auto prompt = gen_prompt(spec, rng);
  for (const auto& w : pool()) {
    auto first = prompt.find(w);
    ASSERT_NE(first, std::string::npos) << w;
    EXPECT_EQ(prompt.find(w, first + 1), std::string::npos) << w;
  }
}

TEST(Generator, EveryKeywordGetsDrawn) {
  GenSpec spec{pool(), 2, 1, 11};
  std::mt19937_64 rng(11);
  std::map<std::string, int> seen;
  for (int i = 0; i < 4000; ++i)
    for (const auto& w : sample_keywords(spec, rng)) ++seen[w];
  ASSERT_EQ(seen.size(), pool().size());
  // 8000 draws over 8 keywords: each expected 1000.
  for (const auto& [w, n] : seen) {
    EXPECT_GT(n, 850) << w;
    EXPECT_LT(n, 1150) << w;
  }
}

TEST(Generator, PromptTemplate) {
  EXPECT_EQ(render_generation_prompt({"inlining", "dead code elimination"}),
            "Write a complete, self-contained C program that exercises the following concepts: inlining, dead code "
            "elimination.\nThe program must define main, use only the C standard library, read no input and "
            "terminate on its own.\nReturn the whole program as a single ```c code block.\n");
}

TEST(Generator, SpecValidation) {
  EXPECT_THROW((GenSpec{{}, 1, 1, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((GenSpec{pool(), 0, 1, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((GenSpec{pool(), 9, 1, 0}.validate()), std::invalid_argument);
  EXPECT_THROW((GenSpec{pool(), 2, -1, 0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((GenSpec{pool(), 8, 0, 0}.validate()));
}

TEST(Generator, IngestsEveryExtractedProgram) {
  testing::TempDir dir;
  CorpusStore store(dir / "corpus");
  MockModel model;
  int n = 0;
  model.set_responder([&](std::string_view) -> std::optional<std::string> {
    return testing::fenced("int main(void) {\n  return " + std::to_string(n++) + ";\n}\n");
  });
  auto result = generate(GenSpec{pool(), 3, 5, 1}, model, ModelConfig{}, store);
  EXPECT_EQ(result.programs.size(), 5u);
  EXPECT_EQ(result.extraction_failures, 0);
  EXPECT_EQ(store.size(), 5u);
  for (const auto& p : store.programs()) {
    EXPECT_EQ(p.origin, Origin::blackbox);
    EXPECT_EQ(p.status, ProgramStatus::raw);
  }
  EXPECT_FALSE(fs::exists(store.root() / "staging"));
}

TEST(Generator, ProseAndOutagesAreCountedNotIngested) {
  testing::TempDir dir;
  CorpusStore store(dir / "corpus");
  MockModel model;
  int n = 0;
  model.set_responder([&](std::string_view) -> std::optional<std::string> {
    const int i = n++;
    if (i == 1 || i == 3) return std::string("As a language model I prefer to describe the program in words.");
    if (i == 5) return std::nullopt;
    return testing::fenced("int main(void) {\n  return " + std::to_string(i) + ";\n}\n");
  });
  auto result = generate(GenSpec{pool(), 3, 6, 9}, model, ModelConfig{}, store);
  EXPECT_EQ(result.programs.size(), 3u);
  EXPECT_EQ(result.extraction_failures, 2);
  EXPECT_EQ(result.transport_errors, 1);
  EXPECT_EQ(store.size(), 3u);
}

TEST(Generator, DuplicateOutputIsFlaggedNotDropped) {
  testing::TempDir dir;
  CorpusStore store(dir / "corpus");
  MockModel model;
  model.set_responder([](std::string_view) -> std::optional<std::string> {
    return testing::fenced("int main(void) {\n  return 0;\n}\n");
  });
  auto result = generate(GenSpec{pool(), 3, 3, 2}, model, ModelConfig{}, store);
  ASSERT_EQ(result.programs.size(), 3u);
  EXPECT_FALSE(result.programs[0].duplicate_of.has_value());
  EXPECT_EQ(result.programs[1].duplicate_of, result.programs[0].id);
  EXPECT_EQ(result.programs[2].duplicate_of, result.programs[0].id);
}

TEST(Generator, LoadKeywords) {
  testing::TempDir dir;
  testing::spit(dir / "k.txt", "# header\n\n  loop unrolling  \ninlining\n# trailing\n");
  EXPECT_EQ(load_keywords(dir / "k.txt"), (std::vector<std::string>{"loop unrolling", "inlining"}));
  EXPECT_THROW(load_keywords(dir / "missing.txt"), std::runtime_error);
}

TEST(Generator, DefaultKeywordFileCoversOptimisations) {
  auto words = load_keywords(REFUZZ_KEYWORDS);
  EXPECT_GE(words.size(), 20u);
  for (const char* w : {"inlining", "dead code elimination", "vectorization", "loop unrolling"})
    EXPECT_NE(std::find(words.begin(), words.end(), w), words.end()) << w;
}

}  // namespace
}  // namespace refuzz
