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
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace refuzz {

enum class Language { c, cpp };
enum class Origin { blackbox, fuzz4all, whitefox, external };
enum class ProgramStatus { raw, statically_invalid, dynamically_invalid, valid, crash_only };

const char* to_string(Language l);
const char* to_string(Origin o);
const char* to_string(ProgramStatus s);
std::optional<Language> language_from_string(std::string_view s);
std::optional<Origin> origin_from_string(std::string_view s);
std::optional<ProgramStatus> status_from_string(std::string_view s);

/// Raw -> {SI, DI, Valid}; SI, DI -> {SI, DI, Valid, CrashOnly}; Valid and
/// CrashOnly are terminal.
bool is_legal_transition(ProgramStatus from, ProgramStatus to);
bool is_terminal(ProgramStatus s);

struct TestProgram {
  std::string id;
  std::filesystem::path source_path;  ///< relative to the store root
  Language language = Language::c;
  Origin origin = Origin::external;
  ProgramStatus status = ProgramStatus::raw;
  std::string created_at;
  int repair_attempts = 0;
  std::optional<std::string> last_outcome_ref;
  std::string sha256;
  /// Id of the earlier program with byte-identical content, if any.
  std::optional<std::string> duplicate_of;

  bool operator==(const TestProgram&) const = default;
};

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct IngestError {
  std::filesystem::path path;
  std::string reason;
};

struct IngestResult {
  std::vector<TestProgram> programs;
  std::vector<IngestError> errors;
};

struct CorpusOptions {
  std::uintmax_t max_file_bytes = 1u << 20;
  int max_attempts = 2;
};

using ProgramIndex = std::map<std::string, TestProgram>;

// On-disk test-program store.
//
//   <root>/incoming/    freshly ingested (Raw)
//   <root>/work/        classified invalid, under repair
//   <root>/valid/       seed bank
//   <root>/crash_only/  quarantine
//   <root>/corpus.journal
//
// The journal is the source of truth: one JSON object per line, appended
// after the filesystem change it describes. Opening a store replays it,
// moves any file left behind by an interrupted run back to where its
// journaled status says it belongs, and sets aside unjournaled files in
// <root>/orphaned/.
//
// Thread-safe. Concurrent mutations of the same id are rejected.
class CorpusStore {
 public:
  explicit CorpusStore(std::filesystem::path root, CorpusOptions options = {});
  ~CorpusStore();
  CorpusStore(const CorpusStore&) = delete;
  CorpusStore& operator=(const CorpusStore&) = delete;

  const std::filesystem::path& root() const;
  const CorpusOptions& options() const;

  IngestResult ingest(std::span<const std::filesystem::path> paths, Origin origin);

  TestProgram transition(const std::string& id, ProgramStatus next, const std::string& outcome_ref);
  /// Counts one consumed repair attempt.
  TestProgram record_attempt(const std::string& id);
  /// Replaces the program text in place (atomic rename).
  TestProgram replace_source(const std::string& id, std::string_view text);

  std::vector<TestProgram> seed_bank() const;
  std::vector<TestProgram> programs() const;
  std::optional<TestProgram> find(const std::string& id) const;
  std::string read_source(const std::string& id) const;
  std::filesystem::path source_file(const std::string& id) const;
  std::map<ProgramStatus, std::size_t> counts() const;
  std::size_t size() const;
  ProgramIndex index() const;

  std::filesystem::path journal_path() const;

  /// Rebuilds an index from a journal file alone. A torn final line from a
  /// killed writer is ignored.
  static ProgramIndex replay(const std::filesystem::path& journal);

  /// Layout directory a status maps to: "incoming", "work", "valid" or "crash_only".
  static const char* directory_for(ProgramStatus s);

 private:
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace refuzz
