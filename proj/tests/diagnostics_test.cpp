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

#include "refuzz/diagnostics.hpp"

#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

namespace refuzz {
namespace {

namespace fs = std::filesystem;

ErrorLog parse_fixture(const fs::path& log) {
  const std::string text = testing::slurp(log);
  return log.filename().string().find(".compile.") != std::string::npos ? parse_compiler_log(text)
                                                                          : parse_sanitizer_log(text);
}

std::vector<fs::path> golden_logs() {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(testing::fixture("logs")))
    if (e.path().extension() == ".log") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

TEST(DiagnosticsGolden, EveryCapturedLogMatchesItsExpectation) {
  const auto logs = golden_logs();
  ASSERT_GE(logs.size(), 12u);
  for (const auto& log : logs) {
    SCOPED_TRACE(log.filename().string());
    fs::path expected_path = log;
    expected_path.replace_extension(".expected.json");
    const auto expected = nlohmann::json::parse(testing::slurp(expected_path));
    const std::string text = testing::slurp(log);
    const ErrorLog parsed = parse_fixture(log);

    nlohmann::json got = parsed.diagnostics;
    for (std::size_t i = 0; i < parsed.diagnostics.size(); ++i) {
      const std::string& excerpt = parsed.diagnostics[i].raw_excerpt;
      EXPECT_FALSE(excerpt.empty());
      EXPECT_NE(text.find(excerpt), std::string::npos) << "excerpt is not verbatim";
      got[i].erase("raw_excerpt");
    }
    EXPECT_EQ(got, expected.at("diagnostics"));
    EXPECT_EQ(parsed.truncated, expected.at("truncated").get<bool>());
    EXPECT_EQ(parsed.verbatim, text);
  }
}

TEST(DiagnosticsGolden, StackBufferOverflowKind) {
  auto log = parse_fixture(testing::fixture("logs/stack_overflow.asan.log"));
  ASSERT_EQ(log.diagnostics.size(), 1u);
  const auto& d = log.diagnostics[0];
  EXPECT_EQ(d.source, DiagSource::asan);
  EXPECT_EQ(d.severity, Severity::runtime_error);
  EXPECT_EQ(d.kind, "stack-buffer-overflow");
  EXPECT_EQ(d.frames.size(), 5u);
  EXPECT_EQ(d.frames[0].pc, "0x5573934bc529");
}

TEST(DiagnosticsGolden, MixedCompilerLogSeparatesWarningsFromErrors) {
  auto log = parse_fixture(testing::fixture("logs/mixed.compile.log"));
  EXPECT_EQ(log.count(Severity::warning), 3u);
  EXPECT_EQ(log.count(Severity::error), 2u);
  EXPECT_EQ(log.repair_trigger_count(), 2u);
}

TEST(DiagnosticsGolden, InlineUbsanFollowedByDeadlySignal) {
  auto log = parse_fixture(testing::fixture("logs/divzero.ubsan_plain.log"));
  ASSERT_EQ(log.diagnostics.size(), 2u);
  EXPECT_EQ(log.diagnostics[0].kind, "division by zero");
  EXPECT_EQ(log.diagnostics[0].file, "divzero.c");
  EXPECT_EQ(log.diagnostics[0].line, 5);
  EXPECT_EQ(log.diagnostics[1].kind, "FPE");
}

TEST(CompilerLog, ParsesLocationSeverityAndFlag) {
  auto log = parse_compiler_log("a.c:3:7: warning: unused variable 'x' [-Wunused-variable]\n");
  ASSERT_EQ(log.diagnostics.size(), 1u);
  const auto& d = log.diagnostics[0];
  EXPECT_EQ(d.severity, Severity::warning);
  EXPECT_EQ(d.kind, "unused-variable");
  EXPECT_EQ(d.message, "unused variable 'x' [-Wunused-variable]");
  EXPECT_EQ(d.file, "a.c");
  EXPECT_EQ(d.line, 3);
  EXPECT_EQ(d.column, 7);
  EXPECT_FALSE(d.triggers_repair());
}

TEST(CompilerLog, NotesAndCaretsAreNotDiagnostics) {
  auto log = parse_compiler_log(
      "x.c:1:1: error: unknown type name 'foo'\nfoo y;\n^\nx.c:1:1: note: something\n1 error generated.\n");
  ASSERT_EQ(log.diagnostics.size(), 1u);
  EXPECT_EQ(log.diagnostics[0].kind, "unknown-type-name");
}

TEST(CompilerLog, EmptyInput) {
  auto log = parse_compiler_log("");
  EXPECT_TRUE(log.diagnostics.empty());
  EXPECT_FALSE(log.truncated);
  EXPECT_EQ(log.verbatim, "");
}

TEST(SanitizerLog, SymbolizedFrameYieldsSourceLocation) {
  const std::string text =
      "==7==ERROR: AddressSanitizer: heap-use-after-free on address 0x1 at pc 0x2 bp 0x3 sp 0x4\n"
      "READ of size 4 at 0x1 thread T0\n"
      "    #0 0x4011d6 in main /src/a.c:7:5\n"
      "    #1 0x7f00 in __libc_start_main (/lib/libc.so.6+0x2)\n"
      "SUMMARY: AddressSanitizer: heap-use-after-free /src/a.c:7:5 in main\n";
  auto log = parse_sanitizer_log(text);
  ASSERT_EQ(log.diagnostics.size(), 1u);
  const auto& d = log.diagnostics[0];
  EXPECT_EQ(d.kind, "heap-use-after-free");
  ASSERT_EQ(d.frames.size(), 2u);
  EXPECT_EQ(d.frames[0].symbol, "main");
  EXPECT_EQ(d.frames[0].location, "/src/a.c:7:5");
  EXPECT_EQ(d.file, "/src/a.c");
  EXPECT_EQ(d.line, 7);
  EXPECT_EQ(d.column, 5);
}

TEST(SanitizerLog, CleanRunHasNoDiagnostics) {
  auto log = parse_sanitizer_log("[stdout]\nhello\n[exit] code 0\n");
  EXPECT_TRUE(log.diagnostics.empty());
  EXPECT_EQ(log.repair_trigger_count(), 0u);
}

TEST(Truncation, KeepsWholeLinesFromTheHead) {
  bool truncated = false;
  EXPECT_EQ(truncate_head("aaa\nbbb\nccc\n", 9, truncated), "aaa\nbbb\n");
  EXPECT_TRUE(truncated);
  EXPECT_EQ(truncate_head("aaa\n", 9, truncated), "aaa\n");
  EXPECT_FALSE(truncated);
  EXPECT_EQ(truncate_head("abcdefghijkl", 5, truncated), "abcde");
  EXPECT_TRUE(truncated);
}

TEST(Truncation, DiagnosticsComeFromTheFullText) {
  std::string text(200, 'x');
  text += "\nlate.c:9:1: error: expected ';' after expression\n";
  auto log = parse_compiler_log(text, 64);
  EXPECT_TRUE(log.truncated);
  EXPECT_LE(log.verbatim.size(), 64u);
  ASSERT_EQ(log.diagnostics.size(), 1u);
  EXPECT_EQ(log.diagnostics[0].file, "late.c");
}

TEST(DiagnosticsJson, RoundTrips) {
  for (const auto& log : golden_logs()) {
    ErrorLog parsed = parse_fixture(log);
    nlohmann::json j = parsed;
    EXPECT_EQ(j.get<ErrorLog>(), parsed) << log;
  }
}

TEST(DiagnosticsRobustness, MutatedFixturesDoNotCrash) {
  std::mt19937_64 rng(42);
  std::vector<std::string> texts;
  for (const auto& log : golden_logs()) texts.push_back(testing::slurp(log));
  for (int i = 0; i < 3000; ++i) {
    std::string t = texts[rng() % texts.size()];
    const int edits = 1 + static_cast<int>(rng() % 8);
    for (int e = 0; e < edits && !t.empty(); ++e) {
      std::size_t at = rng() % t.size();
      switch (rng() % 3) {
        case 0: t.erase(at, rng() % 40); break;
        case 1: t.insert(at, 1, static_cast<char>(rng() % 256)); break;
        default: t[at] = static_cast<char>(rng() % 256);
      }
    }
    auto a = parse_compiler_log(t, 512);
    auto b = parse_sanitizer_log(t, 512);
    EXPECT_LE(a.verbatim.size(), 512u);
    EXPECT_LE(b.verbatim.size(), 512u);
  }
}

}  // namespace
}  // namespace refuzz
