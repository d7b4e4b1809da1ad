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

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <system_error>

#include "json.hpp"
#include "refuzz/hash.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace refuzz {
namespace {

constexpr const char* kJournalName = "corpus.journal";
constexpr std::array kLayout{"incoming", "work", "valid", "crash_only"};
constexpr const char* kOrphanDir = "orphaned";

std::string utc_now() {
  auto now = std::chrono::system_clock::now();
  auto secs = std::chrono::system_clock::to_time_t(now);
  auto millis = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  ::gmtime_r(&secs, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(millis));
  return out;
}

std::optional<Language> language_for(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".c") return Language::c;
  if (ext == ".cc" || ext == ".cpp" || ext == ".cxx" || ext == ".c++") return Language::cpp;
  return std::nullopt;
}

const char* extension_for(Language l) { return l == Language::c ? ".c" : ".cpp"; }

fs::path relative_path_for(const std::string& id, Language lang, ProgramStatus s) {
  return fs::path(CorpusStore::directory_for(s)) / (id + extension_for(lang));
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CorpusError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& p, std::string_view text) {
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CorpusError("cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw CorpusError("short write to " + tmp.string());
  }
  fs::rename(tmp, p);
}

// Applies one journal record to an index. Returns false for records that
// reference unknown ids.
bool apply_record(ProgramIndex& index, const json& rec) {
  const auto event = rec.at("event").get<std::string>();
  const auto id = rec.at("id").get<std::string>();
  if (event == "ingest") {
    TestProgram p;
    p.id = id;
    p.source_path = rec.at("source_path").get<std::string>();
    p.language = language_from_string(rec.at("language").get<std::string>()).value_or(Language::c);
    p.origin = origin_from_string(rec.at("origin").get<std::string>()).value_or(Origin::external);
    p.status = ProgramStatus::raw;
    p.created_at = rec.at("timestamp").get<std::string>();
    p.sha256 = rec.at("sha256").get<std::string>();
    if (rec.contains("duplicate_of") && !rec["duplicate_of"].is_null())
      p.duplicate_of = rec["duplicate_of"].get<std::string>();
    index[id] = std::move(p);
    return true;
  }
  auto it = index.find(id);
  if (it == index.end()) return false;
  TestProgram& p = it->second;
  if (event == "transition") {
    auto status = status_from_string(rec.at("status").get<std::string>());
    if (!status) return false;
    p.status = *status;
    p.source_path = relative_path_for(p.id, p.language, p.status);
    if (rec.contains("outcome_ref") && !rec["outcome_ref"].is_null())
      p.last_outcome_ref = rec["outcome_ref"].get<std::string>();
  } else if (event == "attempt") {
    p.repair_attempts = rec.at("repair_attempts").get<int>();
  } else if (event == "source") {
    p.sha256 = rec.at("sha256").get<std::string>();
  } else {
    return false;
  }
  return true;
}

}  // namespace

const char* to_string(Language l) { return l == Language::c ? "C" : "C++"; }

const char* to_string(Origin o) {
  switch (o) {
    case Origin::blackbox: return "blackbox";
    case Origin::fuzz4all: return "fuzz4all";
    case Origin::whitefox: return "whitefox";
    case Origin::external: return "external";
  }
  return "external";
}

const char* to_string(ProgramStatus s) {
  switch (s) {
    case ProgramStatus::raw: return "Raw";
    case ProgramStatus::statically_invalid: return "StaticallyInvalid";
    case ProgramStatus::dynamically_invalid: return "DynamicallyInvalid";
    case ProgramStatus::valid: return "Valid";
    case ProgramStatus::crash_only: return "CrashOnly";
  }
  return "Raw";
}

std::optional<Language> language_from_string(std::string_view s) {
  if (s == "C") return Language::c;
  if (s == "C++") return Language::cpp;
  return std::nullopt;
}

std::optional<Origin> origin_from_string(std::string_view s) {
  for (auto o : {Origin::blackbox, Origin::fuzz4all, Origin::whitefox, Origin::external})
    if (s == to_string(o)) return o;
  return std::nullopt;
}

std::optional<ProgramStatus> status_from_string(std::string_view s) {
  for (auto v : {ProgramStatus::raw, ProgramStatus::statically_invalid, ProgramStatus::dynamically_invalid,
                 ProgramStatus::valid, ProgramStatus::crash_only})
    if (s == to_string(v)) return v;
  return std::nullopt;
}

bool is_terminal(ProgramStatus s) { return s == ProgramStatus::valid || s == ProgramStatus::crash_only; }

bool is_legal_transition(ProgramStatus from, ProgramStatus to) {
  switch (from) {
    case ProgramStatus::raw:
      return to == ProgramStatus::statically_invalid || to == ProgramStatus::dynamically_invalid ||
             to == ProgramStatus::valid;
    case ProgramStatus::statically_invalid:
    case ProgramStatus::dynamically_invalid:
      return to != ProgramStatus::raw;
    case ProgramStatus::valid:
    case ProgramStatus::crash_only:
      return false;
  }
  return false;
}

const char* CorpusStore::directory_for(ProgramStatus s) {
  switch (s) {
    case ProgramStatus::raw: return "incoming";
    case ProgramStatus::statically_invalid:
    case ProgramStatus::dynamically_invalid: return "work";
    case ProgramStatus::valid: return "valid";
    case ProgramStatus::crash_only: return "crash_only";
  }
  return "incoming";
}

struct CorpusStore::State {
  fs::path root;
  CorpusOptions options;
  mutable std::mutex mu;
  ProgramIndex index;
  std::map<std::string, std::string> first_by_hash;  // sha256 -> earliest id
  std::set<std::string> in_flight;
  std::uint64_t next_seq = 1;
  std::uint64_t ingested = 0;
  int journal_fd = -1;

  // Caller holds `mu`.
  void append(json rec) {
    rec["seq"] = next_seq++;
    if (!rec.contains("timestamp")) rec["timestamp"] = utc_now();
    std::string line = rec.dump() + "\n";
    const char* p = line.data();
    std::size_t left = line.size();
    while (left > 0) {
      ssize_t n = ::write(journal_fd, p, left);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw CorpusError(std::string("journal write failed: ") + std::strerror(errno));
      }
      p += n;
      left -= static_cast<std::size_t>(n);
    }
  }

  json base_record(const TestProgram& p, const char* event) const {
    return json{{"id", p.id},
                {"event", event},
                {"status", to_string(p.status)},
                {"outcome_ref", p.last_outcome_ref ? json(*p.last_outcome_ref) : json(nullptr)},
                {"origin", to_string(p.origin)},
                {"sha256", p.sha256}};
  }

  // Reserves `id` for exclusive mutation; released by the guard.
  struct Claim {
    State& s;
    std::string id;
    Claim(State& state, std::string claimed) : s(state), id(std::move(claimed)) {}
    Claim(const Claim&) = delete;
    Claim& operator=(const Claim&) = delete;
    ~Claim() {
      std::lock_guard lock(s.mu);
      s.in_flight.erase(id);
    }
  };

  TestProgram claim(const std::string& id, std::optional<Claim>& guard) {
    std::lock_guard lock(mu);
    auto it = index.find(id);
    if (it == index.end()) throw CorpusError("unknown program id " + id);
    if (!in_flight.insert(id).second) throw CorpusError("concurrent mutation of " + id + " rejected");
    guard.emplace(*this, id);
    return it->second;
  }
};

CorpusStore::CorpusStore(fs::path root, CorpusOptions options) : state_(std::make_unique<State>()) {
  state_->root = std::move(root);
  state_->options = options;
  for (const char* dir : kLayout) fs::create_directories(state_->root / dir);

  const fs::path journal = journal_path();
  std::uint64_t last_seq = 0;
  if (fs::exists(journal)) {
    // Drop a torn tail so later appends start on a fresh line.
    std::string content = read_file(journal);
    if (!content.empty() && content.back() != '\n') {
      fs::resize_file(journal, content.rfind('\n') == std::string::npos ? 0 : content.rfind('\n') + 1);
    }
    state_->index = replay(journal);
    std::istringstream in(read_file(journal));
    for (std::string line; std::getline(in, line);) {
      auto rec = json::parse(line, nullptr, false);
      if (rec.is_discarded()) continue;
      last_seq = std::max<std::uint64_t>(last_seq, rec.value("seq", 0ull));
      if (rec.value("event", "") == "ingest") ++state_->ingested;
    }
  }
  state_->next_seq = last_seq + 1;
  state_->journal_fd = ::open(journal.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (state_->journal_fd < 0) throw CorpusError("cannot open journal " + journal.string());

  for (const auto& [id, p] : state_->index) {
    state_->first_by_hash.try_emplace(p.sha256, id);
    // Bring the file back to where the journal says it lives.
    const fs::path want = state_->root / p.source_path;
    if (fs::exists(want)) continue;
    for (const char* dir : kLayout) {
      fs::path candidate = state_->root / dir / p.source_path.filename();
      if (fs::exists(candidate)) {
        fs::rename(candidate, want);
        break;
      }
    }
    if (!fs::exists(want)) throw CorpusError("source of " + id + " missing from every layout directory");
  }

  // A crash between a source rewrite and its journal record leaves the
  // journaled hash stale.
  for (auto& [id, p] : state_->index) {
    std::string actual = sha256_hex(read_file(state_->root / p.source_path));
    if (actual == p.sha256) continue;
    p.sha256 = std::move(actual);
    state_->append(state_->base_record(p, "source"));
  }

  // Files the journal never heard of (a crash between write and append, or
  // a leftover temporary) are moved aside so the layout mirrors the index.
  std::set<fs::path> known;
  for (const auto& [id, p] : state_->index) known.insert(p.source_path);
  for (const char* dir : kLayout) {
    for (const auto& e : fs::directory_iterator(state_->root / dir)) {
      fs::path rel = fs::path(dir) / e.path().filename();
      if (known.count(rel)) continue;
      fs::create_directories(state_->root / kOrphanDir);
      fs::rename(e.path(), state_->root / kOrphanDir / e.path().filename());
    }
  }
}

CorpusStore::~CorpusStore() {
  if (state_ && state_->journal_fd >= 0) ::close(state_->journal_fd);
}

const fs::path& CorpusStore::root() const { return state_->root; }
const CorpusOptions& CorpusStore::options() const { return state_->options; }
fs::path CorpusStore::journal_path() const { return state_->root / kJournalName; }

IngestResult CorpusStore::ingest(std::span<const fs::path> paths, Origin origin) {
  IngestResult result;
  for (const auto& path : paths) {
    std::error_code ec;
    auto size = fs::file_size(path, ec);
    if (ec) {
      result.errors.push_back({path, "unreadable: " + ec.message()});
      continue;
    }
    if (size > state_->options.max_file_bytes) {
      result.errors.push_back({path, "oversize: " + std::to_string(size) + " bytes exceeds cap of " +
                                         std::to_string(state_->options.max_file_bytes)});
      continue;
    }
    auto lang = language_for(path);
    if (!lang) {
      result.errors.push_back({path, "unsupported extension"});
      continue;
    }
    std::string text;
    try {
      text = read_file(path);
    } catch (const CorpusError& e) {
      result.errors.push_back({path, e.what()});
      continue;
    }

    std::lock_guard lock(state_->mu);
    TestProgram p;
    p.sha256 = sha256_hex(text);
    char seq[32];
    std::snprintf(seq, sizeof seq, "%06llu", static_cast<unsigned long long>(++state_->ingested));
    p.id = p.sha256.substr(0, 12) + "-" + seq;
    p.language = *lang;
    p.origin = origin;
    p.status = ProgramStatus::raw;
    p.created_at = utc_now();
    p.source_path = relative_path_for(p.id, p.language, p.status);
    if (auto dup = state_->first_by_hash.find(p.sha256); dup != state_->first_by_hash.end())
      p.duplicate_of = dup->second;
    else
      state_->first_by_hash.emplace(p.sha256, p.id);

    write_file_atomic(state_->root / p.source_path, text);
    json rec = state_->base_record(p, "ingest");
    rec["timestamp"] = p.created_at;
    rec["source_path"] = p.source_path.string();
    rec["language"] = to_string(p.language);
    rec["duplicate_of"] = p.duplicate_of ? json(*p.duplicate_of) : json(nullptr);
    state_->append(std::move(rec));
    state_->index[p.id] = p;
    result.programs.push_back(std::move(p));
  }
  return result;
}

TestProgram CorpusStore::transition(const std::string& id, ProgramStatus next, const std::string& outcome_ref) {
  std::optional<State::Claim> guard;
  TestProgram p = state_->claim(id, guard);
  if (!is_legal_transition(p.status, next))
    throw CorpusError(std::string("illegal transition ") + to_string(p.status) + " -> " + to_string(next) +
                      " for " + id);
  if (next == ProgramStatus::crash_only && p.repair_attempts != state_->options.max_attempts)
    throw CorpusError("quarantine of " + id + " before exhausting repair attempts");

  const fs::path from = state_->root / p.source_path;
  p.status = next;
  p.source_path = relative_path_for(p.id, p.language, next);
  p.last_outcome_ref = outcome_ref;
  const fs::path to = state_->root / p.source_path;
  if (from != to) fs::rename(from, to);

  std::lock_guard lock(state_->mu);
  state_->append(state_->base_record(p, "transition"));
  state_->index[id] = p;
  return p;
}

TestProgram CorpusStore::record_attempt(const std::string& id) {
  std::optional<State::Claim> guard;
  TestProgram p = state_->claim(id, guard);
  if (is_terminal(p.status)) throw CorpusError("cannot repair terminal program " + id);
  if (p.repair_attempts >= state_->options.max_attempts)
    throw CorpusError("repair attempt bound exceeded for " + id);
  ++p.repair_attempts;
  std::lock_guard lock(state_->mu);
  json rec = state_->base_record(p, "attempt");
  rec["repair_attempts"] = p.repair_attempts;
  state_->append(std::move(rec));
  state_->index[id] = p;
  return p;
}

TestProgram CorpusStore::replace_source(const std::string& id, std::string_view text) {
  std::optional<State::Claim> guard;
  TestProgram p = state_->claim(id, guard);
  if (is_terminal(p.status)) throw CorpusError("cannot modify terminal program " + id);
  write_file_atomic(state_->root / p.source_path, text);
  p.sha256 = sha256_hex(text);
  std::lock_guard lock(state_->mu);
  state_->append(state_->base_record(p, "source"));
  state_->index[id] = p;
  return p;
}

std::vector<TestProgram> CorpusStore::seed_bank() const {
  std::vector<TestProgram> out;
  for (auto& p : programs())
    if (p.status == ProgramStatus::valid) out.push_back(p);
  return out;
}

std::vector<TestProgram> CorpusStore::programs() const {
  std::lock_guard lock(state_->mu);
  std::vector<TestProgram> out;
  out.reserve(state_->index.size());
  for (const auto& [id, p] : state_->index) out.push_back(p);
  // Ingestion order: the id suffix is the zero-padded sequence number.
  std::sort(out.begin(), out.end(), [](const TestProgram& a, const TestProgram& b) {
    return a.id.substr(13) < b.id.substr(13);
  });
  return out;
}

std::optional<TestProgram> CorpusStore::find(const std::string& id) const {
  std::lock_guard lock(state_->mu);
  auto it = state_->index.find(id);
  if (it == state_->index.end()) return std::nullopt;
  return it->second;
}

fs::path CorpusStore::source_file(const std::string& id) const {
  auto p = find(id);
  if (!p) throw CorpusError("unknown program id " + id);
  return state_->root / p->source_path;
}

std::string CorpusStore::read_source(const std::string& id) const { return read_file(source_file(id)); }

std::map<ProgramStatus, std::size_t> CorpusStore::counts() const {
  std::map<ProgramStatus, std::size_t> out;
  for (auto s : {ProgramStatus::raw, ProgramStatus::statically_invalid, ProgramStatus::dynamically_invalid,
                 ProgramStatus::valid, ProgramStatus::crash_only})
    out[s] = 0;
  std::lock_guard lock(state_->mu);
  for (const auto& [id, p] : state_->index) ++out[p.status];
  return out;
}

std::size_t CorpusStore::size() const {
  std::lock_guard lock(state_->mu);
  return state_->index.size();
}

ProgramIndex CorpusStore::index() const {
  std::lock_guard lock(state_->mu);
  return state_->index;
}

ProgramIndex CorpusStore::replay(const fs::path& journal) {
  ProgramIndex index;
  std::ifstream in(journal, std::ios::binary);
  if (!in) return index;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t pos = 0;
  while (pos < content.size()) {
    auto nl = content.find('\n', pos);
    if (nl == std::string::npos) break;  // torn tail
    std::string_view line(content.data() + pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    auto rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
      std::cerr << "corpus: skipping malformed journal line\n";
      continue;
    }
    try {
      if (!apply_record(index, rec)) std::cerr << "corpus: skipping journal record for unknown id\n";
    } catch (const json::exception& e) {
      std::cerr << "corpus: skipping journal record: " << e.what() << "\n";
    }
  }
  return index;
}

}  // namespace refuzz
