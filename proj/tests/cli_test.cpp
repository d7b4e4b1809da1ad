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

#include "refuzz/cli.hpp"

#include <gtest/gtest.h>
#include <stdlib.h>

#include <sstream>

#include "json.hpp"
#include "refuzz/repair.hpp"
#include "support.hpp"

namespace refuzz {
namespace {

namespace fs = std::filesystem;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "refuzz");
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string config_value(const std::string& printed, const std::string& key) {
  std::istringstream in(printed);
  for (std::string line; std::getline(in, line);)
    if (line.rfind(key + "=", 0) == 0) return line.substr(key.size() + 1);
  return "<missing " + key + ">";
}

TEST(Cli, HelpForEverySubcommand) {
  auto top = cli({"--help"});
  EXPECT_EQ(top.code, kExitOk);
  for (const char* sub : {"ingest", "generate", "validate", "refuzz", "coverage", "stats"}) {
    EXPECT_NE(top.out.find(sub), std::string::npos) << sub;
    auto r = cli({sub, "--help"});
    EXPECT_EQ(r.code, kExitOk) << sub;
    EXPECT_NE(r.out.find("--config"), std::string::npos) << sub;
  }
  EXPECT_NE(cli({"refuzz", "--help"}).out.find("--opt-level"), std::string::npos);
}

TEST(Cli, UsageErrorsExitTwo) {
  auto none = cli({});
  EXPECT_EQ(none.code, kExitUsage);
  auto unknown = cli({"frobnicate"});
  EXPECT_EQ(unknown.code, kExitUsage);
  EXPECT_FALSE(unknown.err.empty());
  auto flag = cli({"validate", "--no-such-flag"});
  EXPECT_EQ(flag.code, kExitUsage);
  EXPECT_NE(flag.err.find("--no-such-flag"), std::string::npos);
  EXPECT_NE(flag.err.find("Usage"), std::string::npos);
  EXPECT_EQ(cli({"validate", "--format", "html"}).code, kExitUsage);
  EXPECT_EQ(cli({"validate", "--set", "toolchain.timeout_s=-1", "--print-config"}).code, kExitUsage);
  EXPECT_EQ(cli({"validate", "--set", "no.such.key=1", "--print-config"}).code, kExitUsage);
  EXPECT_EQ(cli({"coverage", "--before", "x.info"}).code, kExitUsage);
}

TEST(Cli, ConfigPrecedence) {
  testing::TempDir dir;
  testing::spit(dir / "refuzz.conf",
                "# campaign settings\nmodel.endpoint = http://from-file:1\nmodel.name = file-model\n"
                "toolchain.timeout_s = 7\nrepair.max_attempts = 3\n");
  const std::string conf = (dir / "refuzz.conf").string();

  auto file_only = cli({"refuzz", "--config", conf, "--print-config"});
  ASSERT_EQ(file_only.code, kExitOk) << file_only.err;
  EXPECT_EQ(config_value(file_only.out, "model.endpoint"), "http://from-file:1");
  EXPECT_EQ(config_value(file_only.out, "repair.max_attempts"), "3");

  ::setenv("REFUZZ_MODEL_ENDPOINT", "http://from-env:2", 1);
  auto with_env = cli({"refuzz", "--config", conf, "--print-config"});
  EXPECT_EQ(config_value(with_env.out, "model.endpoint"), "http://from-env:2");
  EXPECT_EQ(config_value(with_env.out, "model.name"), "file-model");

  auto with_flag = cli({"refuzz", "--config", conf, "--endpoint", "http://from-flag:3", "--timeout", "9",
                        "--print-config"});
  EXPECT_EQ(config_value(with_flag.out, "model.endpoint"), "http://from-flag:3");
  EXPECT_EQ(config_value(with_flag.out, "toolchain.timeout_s"), "9");
  ::unsetenv("REFUZZ_MODEL_ENDPOINT");

  testing::spit(dir / "bad.conf", "model.name = ok\nthis line is wrong\n");
  auto bad = cli({"refuzz", "--config", (dir / "bad.conf").string(), "--print-config"});
  EXPECT_EQ(bad.code, kExitUsage);
  EXPECT_NE(bad.err.find("bad.conf:2"), std::string::npos) << bad.err;
}

TEST(Cli, CampaignFlags) {
  auto r = cli({"refuzz", "--opt-level", "-O0", "--timeout", "60", "--mem-limit", "16G", "--print-config"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(config_value(r.out, "toolchain.opt_level"), "-O0");
  EXPECT_EQ(config_value(r.out, "repair.opt_level_arg"), "-O0");
  EXPECT_EQ(config_value(r.out, "toolchain.timeout_s"), "60");
  EXPECT_EQ(config_value(r.out, "toolchain.memory_limit"), "16G");

  auto split = cli({"refuzz", "--opt-level", "-O2", "--prompt-opt-level", "-O3", "--print-config"});
  EXPECT_EQ(config_value(split.out, "toolchain.opt_level"), "-O2");
  EXPECT_EQ(config_value(split.out, "repair.opt_level_arg"), "-O3");
}

TEST(Cli, MockBackendNeedsACassette) {
  auto r = cli({"refuzz", "--backend", "mock", "--print-config"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.err.find("cassette"), std::string::npos);
}

TEST(Cli, ValidateEmptyCorpus) {
  testing::TempDir dir;
  auto r = cli({"validate", "--corpus", (dir / "c").string()});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("total 0"), std::string::npos);
  auto j = cli({"validate", "--corpus", (dir / "c").string(), "--format", "json"});
  EXPECT_EQ(nlohmann::json::parse(j.out).at("total"), 0);
}

TEST(Cli, CoverageTables) {
  const auto toy = testing::fixture("coverage/toy.info").string();
  testing::TempDir dir;
  testing::spit(dir / "map.txt", "*/toy/* = Toy\n");
  auto one = cli({"coverage", "--trace", toy, "--map", (dir / "map.txt").string(), "--format", "md"});
  ASSERT_EQ(one.code, kExitOk) << one.err;
  EXPECT_NE(one.out.find("| Toy | 5 | 2 | 40.0 |"), std::string::npos) << one.out;

  testing::spit(dir / "before.info", "SF:/x/llvm/lib/Transforms/IPO/Inliner.cpp\nFNF:1000\nFNH:118\nend_of_record\n");
  testing::spit(dir / "after.info", "SF:/x/llvm/lib/Transforms/IPO/Inliner.cpp\nFNF:1000\nFNH:330\nend_of_record\n");
  auto d = cli({"coverage", "--before", (dir / "before.info").string(), "--after", (dir / "after.info").string(),
                "--label", "BlackBox", "--format", "markdown"});
  ASSERT_EQ(d.code, kExitOk) << d.err;
  EXPECT_NE(d.out.find("BlackBox Δ"), std::string::npos);
  EXPECT_NE(d.out.find("+21.2"), std::string::npos) << d.out;

  testing::spit(dir / "warn.info", "SF:/a.c\nFNF:x\nend_of_record\n");
  auto w = cli({"coverage", "--trace", (dir / "warn.info").string()});
  EXPECT_EQ(w.code, kExitOk);
  EXPECT_NE(w.err.find("warn.info:2: warning"), std::string::npos) << w.err;
}

TEST(Cli, MockRefuzzEndToEnd) {
  testing::TempDir dir;
  const std::string broken = "#include <stdio.h>\nint main(void) {\n  printf(\"%d\\n\", 1)\n  return 0;\n}\n";
  const std::string fixed = "#include <stdio.h>\nint main(void) {\n  printf(\"%d\\n\", 1);\n  return 0;\n}\n";
  const std::string fine = "int main(void) {\n  return 0;\n}\n";
  testing::spit(dir / "in/a_broken.c", broken);
  testing::spit(dir / "in/b_fine.c", fine);
  nlohmann::json cassette = nlohmann::json::array(
      {{{"source_sha256", cassette_key(broken)}, {"response_text", "```c\n" + fixed + "```\n"}}});
  testing::spit(dir / "cassette.json", cassette.dump());

  const std::string corpus = (dir / "corpus").string();
  auto ing = cli({"ingest", "--corpus", corpus, "--origin", "fuzz4all", (dir / "in").string()});
  ASSERT_EQ(ing.code, kExitOk) << ing.err;
  EXPECT_NE(ing.out.find("ingested 2 programs"), std::string::npos);

  auto ref = cli({"refuzz", "--corpus", corpus, "--backend", "mock", "--cassette", (dir / "cassette.json").string(),
                  "--opt-level", "-O0", "--timeout", "30", "--format", "json"});
  ASSERT_EQ(ref.code, kExitOk) << ref.err;
  auto stats = nlohmann::json::parse(ref.out);
  EXPECT_EQ(stats.at("total_tests"), 2);
  EXPECT_EQ(stats.at("valid_before"), 1);
  EXPECT_EQ(stats.at("valid_after"), 2);
  EXPECT_EQ(stats.at("rate_after"), 100.0);

  auto st = cli({"stats", "--corpus", corpus, "--format", "json"});
  ASSERT_EQ(st.code, kExitOk) << st.err;
  auto again = nlohmann::json::parse(st.out);
  EXPECT_EQ(again.at("valid_before"), 1);
  EXPECT_EQ(again.at("valid_after"), 2);

  auto val = cli({"validate", "--corpus", corpus});
  EXPECT_NE(val.out.find("Valid 2"), std::string::npos) << val.out;
}

TEST(Cli, MissingCassetteResponseIsAToolError) {
  testing::TempDir dir;
  testing::spit(dir / "in/x.c", "int main(void) { return undefined_name; }\n");
  testing::spit(dir / "cassette.json", "[]");
  const std::string corpus = (dir / "corpus").string();
  ASSERT_EQ(cli({"ingest", "--corpus", corpus, (dir / "in/x.c").string()}).code, kExitOk);
  auto r = cli({"refuzz", "--corpus", corpus, "--backend", "mock", "--cassette", (dir / "cassette.json").string()});
  EXPECT_EQ(r.code, kExitToolErrors);
  EXPECT_NE(r.err.find("incomplete"), std::string::npos);
}

}  // namespace
}  // namespace refuzz
