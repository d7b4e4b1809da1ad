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

#include "refuzz/corpus.hpp"

#include <gtest/gtest.h>

#include <thread>

#include "refuzz/hash.hpp"
#include "support.hpp"

namespace refuzz {
namespace {

namespace fs = std::filesystem;
using testing::slurp;
using testing::spit;
using testing::TempDir;

constexpr ProgramStatus kAll[] = {ProgramStatus::raw, ProgramStatus::statically_invalid,
                                  ProgramStatus::dynamically_invalid, ProgramStatus::valid,
                                  ProgramStatus::crash_only};

std::vector<fs::path> write_sources(const TempDir& dir, int n, const std::string& prefix = "p") {
  std::vector<fs::path> out;
  for (int i = 0; i < n; ++i) {
    fs::path p = dir / ("src/" + prefix + std::to_string(i) + ".c");
    spit(p, "int main(void) { return " + std::to_string(i) + "; }\n");
    out.push_back(p);
  }
  return out;
}

// Every indexed program's file sits in its status directory, and nothing else does.
void expect_conserved(const CorpusStore& store) {
  const auto index = store.index();
  std::size_t total = 0;
  for (const auto& [status, n] : store.counts()) total += n;
  EXPECT_EQ(total, index.size());
  std::size_t files = 0;
  for (const char* dir : {"incoming", "work", "valid", "crash_only"})
    for (const auto& e : fs::directory_iterator(store.root() / dir)) {
      (void)e;
      ++files;
    }
  EXPECT_EQ(files, index.size());
  for (const auto& [id, p] : index) {
    EXPECT_EQ(p.source_path.parent_path(), fs::path(CorpusStore::directory_for(p.status))) << id;
    EXPECT_TRUE(fs::exists(store.root() / p.source_path)) << id;
  }
}

TEST(Corpus, IngestAssignsIdsAndStoresRawPrograms) {
  TempDir dir;
  CorpusStore store(dir / "c");
  auto files = write_sources(dir, 3);
  auto r = store.ingest(files, Origin::fuzz4all);
  ASSERT_EQ(r.programs.size(), 3u);
  EXPECT_TRUE(r.errors.empty());
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& p = r.programs[i];
    const std::string text = slurp(files[i]);
    EXPECT_EQ(p.sha256, sha256_hex(text));
    EXPECT_EQ(p.id, p.sha256.substr(0, 12) + "-00000" + std::to_string(i + 1));
    EXPECT_EQ(p.status, ProgramStatus::raw);
    EXPECT_EQ(p.origin, Origin::fuzz4all);
    EXPECT_EQ(p.repair_attempts, 0);
    EXPECT_EQ(store.read_source(p.id), text);
    EXPECT_EQ(p.source_path, fs::path("incoming") / (p.id + ".c"));
  }
  expect_conserved(store);
}

TEST(Corpus, DuplicatesAreFlaggedNotDropped) {
  TempDir dir;
  CorpusStore store(dir / "c");
  spit(dir / "a.c", "int main(void){return 0;}\n");
  spit(dir / "b.c", "int main(void){return 0;}\n");
  std::vector<fs::path> files{dir / "a.c", dir / "b.c"};
  auto r = store.ingest(files, Origin::external);
  ASSERT_EQ(r.programs.size(), 2u);
  EXPECT_FALSE(r.programs[0].duplicate_of.has_value());
  EXPECT_EQ(r.programs[1].duplicate_of, r.programs[0].id);
}

TEST(Corpus, BadInputsAreReportedPerFile) {
  TempDir dir;
  CorpusOptions opts;
  opts.max_file_bytes = 64;
  CorpusStore store(dir / "c", opts);
  spit(dir / "ok.c", "int main(void){return 0;}\n");
  spit(dir / "big.c", std::string(200, ' '));
  spit(dir / "notes.txt", "hello");
  std::vector<fs::path> files{dir / "ok.c", dir / "big.c", dir / "notes.txt", dir / "missing.c"};
  auto r = store.ingest(files, Origin::external);
  EXPECT_EQ(r.programs.size(), 1u);
  ASSERT_EQ(r.errors.size(), 3u);
  EXPECT_NE(r.errors[0].reason.find("oversize"), std::string::npos);
  EXPECT_NE(r.errors[1].reason.find("extension"), std::string::npos);
  EXPECT_NE(r.errors[2].reason.find("unreadable"), std::string::npos);
}

TEST(Corpus, CppSourcesKeepTheirLanguage) {
  TempDir dir;
  CorpusStore store(dir / "c");
  spit(dir / "x.cpp", "int main() { return 0; }\n");
  std::vector<fs::path> files{dir / "x.cpp"};
  auto r = store.ingest(files, Origin::whitefox);
  ASSERT_EQ(r.programs.size(), 1u);
  EXPECT_EQ(r.programs[0].language, Language::cpp);
  EXPECT_EQ(r.programs[0].source_path.extension(), ".cpp");
}

TEST(Corpus, TransitionTableIsExactlyTheLifecycle) {
  auto legal = [](ProgramStatus a, ProgramStatus b) {
    using S = ProgramStatus;
    if (a == S::raw) return b == S::statically_invalid || b == S::dynamically_invalid || b == S::valid;
    if (a == S::statically_invalid || a == S::dynamically_invalid) return b != S::raw;
    return false;
  };
  for (auto a : kAll)
    for (auto b : kAll) EXPECT_EQ(is_legal_transition(a, b), legal(a, b)) << to_string(a) << "->" << to_string(b);
  EXPECT_TRUE(is_terminal(ProgramStatus::valid));
  EXPECT_TRUE(is_terminal(ProgramStatus::crash_only));
  EXPECT_FALSE(is_terminal(ProgramStatus::statically_invalid));
}

TEST(Corpus, TransitionsMoveFilesAndEnforceTheAttemptBound) {
  TempDir dir;
  CorpusStore store(dir / "c");
  auto id = store.ingest(write_sources(dir, 1), Origin::blackbox).programs[0].id;

  EXPECT_THROW(store.transition(id, ProgramStatus::crash_only, "x"), CorpusError);
  auto p = store.transition(id, ProgramStatus::statically_invalid, "o1");
  EXPECT_EQ(p.source_path.parent_path(), "work");
  EXPECT_EQ(p.last_outcome_ref, "o1");
  EXPECT_THROW(store.transition(id, ProgramStatus::crash_only, "x"), CorpusError);
  store.record_attempt(id);
  store.record_attempt(id);
  EXPECT_THROW(store.record_attempt(id), CorpusError);
  p = store.transition(id, ProgramStatus::crash_only, "o2");
  EXPECT_EQ(p.source_path.parent_path(), "crash_only");
  EXPECT_THROW(store.transition(id, ProgramStatus::valid, "x"), CorpusError);
  EXPECT_THROW(store.record_attempt(id), CorpusError);
  EXPECT_TRUE(store.seed_bank().empty());
  expect_conserved(store);
}

TEST(Corpus, ReplaceSourceUpdatesHashAndText) {
  TempDir dir;
  CorpusStore store(dir / "c");
  auto id = store.ingest(write_sources(dir, 1), Origin::blackbox).programs[0].id;
  store.transition(id, ProgramStatus::dynamically_invalid, "o");
  auto p = store.replace_source(id, "int main(void){return 7;}\n");
  EXPECT_EQ(p.sha256, sha256_hex("int main(void){return 7;}\n"));
  store.transition(id, ProgramStatus::valid, "o2");
  EXPECT_EQ(store.read_source(id), "int main(void){return 7;}\n");
  EXPECT_EQ(store.seed_bank().size(), 1u);
}

TEST(Corpus, ReopeningReplaysTheJournal) {
  TempDir dir;
  ProgramIndex before;
  {
    CorpusStore store(dir / "c");
    auto ids = store.ingest(write_sources(dir, 4), Origin::blackbox).programs;
    store.transition(ids[0].id, ProgramStatus::valid, "a");
    store.transition(ids[1].id, ProgramStatus::statically_invalid, "b");
    store.record_attempt(ids[1].id);
    store.replace_source(ids[1].id, "int main(void){return 42;}\n");
    store.transition(ids[2].id, ProgramStatus::dynamically_invalid, "c");
    before = store.index();
  }
  CorpusStore reopened(dir / "c");
  EXPECT_EQ(reopened.index(), before);
  EXPECT_EQ(CorpusStore::replay(reopened.journal_path()), before);
  expect_conserved(reopened);
  // New ingests continue the sequence.
  auto more = reopened.ingest(write_sources(dir, 1, "q"), Origin::blackbox);
  EXPECT_EQ(more.programs[0].id.substr(13), "000005");
}

TEST(Corpus, TornJournalTailIsDropped) {
  TempDir dir;
  ProgramIndex before;
  {
    CorpusStore store(dir / "c");
    store.ingest(write_sources(dir, 2), Origin::blackbox);
    before = store.index();
  }
  {
    std::ofstream j(dir / "c/corpus.journal", std::ios::app);
    j << R"({"seq":99,"event":"transition","id":)";
  }
  CorpusStore reopened(dir / "c");
  EXPECT_EQ(reopened.index(), before);
  auto id = before.begin()->first;
  reopened.transition(id, ProgramStatus::valid, "x");
  CorpusStore again(dir / "c");
  EXPECT_EQ(again.find(id)->status, ProgramStatus::valid);
}

TEST(Corpus, FileMovedBeforeItsRecordIsRestored) {
  TempDir dir;
  std::string id;
  {
    CorpusStore store(dir / "c");
    id = store.ingest(write_sources(dir, 1), Origin::blackbox).programs[0].id;
  }
  // Simulates a crash after rename() but before the journal append.
  fs::rename(dir / ("c/incoming/" + id + ".c"), dir / ("c/valid/" + id + ".c"));
  CorpusStore reopened(dir / "c");
  EXPECT_EQ(reopened.find(id)->status, ProgramStatus::raw);
  EXPECT_TRUE(fs::exists(dir / ("c/incoming/" + id + ".c")));
  expect_conserved(reopened);
}

TEST(Corpus, UnjournaledFilesAreSetAside) {
  TempDir dir;
  {
    CorpusStore store(dir / "c");
    store.ingest(write_sources(dir, 1), Origin::blackbox);
  }
  spit(dir / "c/incoming/ffffffffffff-000002.c", "int main(void){return 0;}\n");
  spit(dir / "c/work/x.c.tmp", "partial");
  CorpusStore reopened(dir / "c");
  expect_conserved(reopened);
  EXPECT_TRUE(fs::exists(dir / "c/orphaned/ffffffffffff-000002.c"));
}

TEST(Corpus, StaleHashAfterInterruptedRewriteIsResynced) {
  TempDir dir;
  std::string id;
  {
    CorpusStore store(dir / "c");
    id = store.ingest(write_sources(dir, 1), Origin::blackbox).programs[0].id;
  }
  spit(dir / ("c/incoming/" + id + ".c"), "int main(void){return 9;}\n");
  CorpusStore reopened(dir / "c");
  EXPECT_EQ(reopened.find(id)->sha256, sha256_hex("int main(void){return 9;}\n"));
  EXPECT_EQ(CorpusStore::replay(reopened.journal_path()).at(id).sha256, reopened.find(id)->sha256);
}

TEST(Corpus, ConcurrentMutationsOfDistinctProgramsAllLand) {
  TempDir dir;
  CorpusStore store(dir / "c");
  auto programs = store.ingest(write_sources(dir, 40), Origin::blackbox).programs;
  std::vector<std::jthread> threads;
  for (int t = 0; t < 4; ++t)
    threads.emplace_back([&, t] {
      for (std::size_t i = t; i < programs.size(); i += 4) {
        store.transition(programs[i].id, ProgramStatus::statically_invalid, "s");
        store.record_attempt(programs[i].id);
        store.transition(programs[i].id, i % 2 ? ProgramStatus::valid : ProgramStatus::dynamically_invalid, "d");
      }
    });
  threads.clear();
  EXPECT_EQ(CorpusStore::replay(store.journal_path()), store.index());
  EXPECT_EQ(store.counts()[ProgramStatus::valid], 20u);
  expect_conserved(store);
}

TEST(Corpus, ProgramsComeBackInIngestionOrder) {
  TempDir dir;
  CorpusStore store(dir / "c");
  auto ingested = store.ingest(write_sources(dir, 12), Origin::blackbox).programs;
  auto listed = store.programs();
  ASSERT_EQ(listed.size(), ingested.size());
  for (std::size_t i = 0; i < listed.size(); ++i) EXPECT_EQ(listed[i].id, ingested[i].id);
}

}  // namespace
}  // namespace refuzz
