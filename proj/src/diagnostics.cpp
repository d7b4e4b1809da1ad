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

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

namespace refuzz {
namespace {

struct Line {
  std::size_t begin = 0;  // offset of first byte
  std::size_t end = 0;    // offset one past the last byte, newline excluded
  std::string_view text;  // without trailing '\r'
};

std::vector<Line> split_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    std::string_view body = text.substr(pos, end - pos);
    if (!body.empty() && body.back() == '\r') body.remove_suffix(1);
    lines.push_back({pos, end, body});
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool all_digits(std::string_view s) {
  return !s.empty() && s.size() <= 9 &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

int to_int(std::string_view s) {
  int v = 0;
  for (char c : s) v = v * 10 + (c - '0');
  return v;
}

bool starts_with(std::string_view s, std::string_view p) { return s.substr(0, p.size()) == p; }

struct Location {
  std::optional<std::string> file;
  std::optional<int> line;
  std::optional<int> column;
};

// "path:line:col", "path:line" or a bare path. Returns nullopt unless at
// least a line number is present.
std::optional<Location> parse_location(std::string_view s) {
  auto last = s.rfind(':');
  if (last == std::string_view::npos) return std::nullopt;
  std::string_view tail = s.substr(last + 1);
  if (!all_digits(tail)) return std::nullopt;
  std::string_view head = s.substr(0, last);
  Location loc;
  auto prev = head.rfind(':');
  if (prev != std::string_view::npos && all_digits(head.substr(prev + 1))) {
    loc.line = to_int(head.substr(prev + 1));
    loc.column = to_int(tail);
    head = head.substr(0, prev);
  } else {
    loc.line = to_int(tail);
  }
  if (head.empty()) return std::nullopt;
  if (head != "<unknown>") loc.file = std::string(head);
  return loc;
}

// ---------------------------------------------------------------------------
// Compiler logs

struct KindRule {
  std::string_view needle;
  std::string_view kind;
};

constexpr std::array kCompilerKinds{
    KindRule{"use of undeclared identifier", "undeclared-identifier"},
    KindRule{"call to undeclared function", "implicit-function-declaration"},
    KindRule{"implicit declaration of function", "implicit-function-declaration"},
    KindRule{"unknown type name", "unknown-type-name"},
    KindRule{"invalid instruction mnemonic", "inline-asm"},
    KindRule{"invalid operand for instruction", "inline-asm"},
    KindRule{"unknown directive", "inline-asm"},
    KindRule{"file not found", "file-not-found"},
    KindRule{"undefined reference to", "undefined-reference"},
    KindRule{"conflicting types", "conflicting-types"},
    KindRule{"redefinition of", "redefinition"},
    KindRule{"incompatible", "incompatible-types"},
    KindRule{"too few arguments", "argument-count"},
    KindRule{"too many arguments", "argument-count"},
    KindRule{"expected", "syntax"},
};

std::string compiler_kind(std::string_view message) {
  // Clang and GCC append the controlling flag: "... [-Wint-conversion]".
  if (!message.empty() && message.back() == ']') {
    auto open = message.rfind('[');
    if (open != std::string_view::npos) {
      std::string_view flags = message.substr(open + 1, message.size() - open - 2);
      auto comma = flags.rfind(',');
      std::string_view flag = comma == std::string_view::npos ? flags : flags.substr(comma + 1);
      if (starts_with(flag, "-W") && flag.size() > 2) return std::string(flag.substr(2));
    }
  }
  for (const auto& rule : kCompilerKinds)
    if (message.find(rule.needle) != std::string_view::npos) return std::string(rule.kind);
  return "other";
}

struct SeverityToken {
  std::string_view token;
  Severity severity;
};

constexpr std::array kSeverityTokens{
    SeverityToken{": fatal error: ", Severity::fatal},
    SeverityToken{": error: ", Severity::error},
    SeverityToken{": warning: ", Severity::warning},
};

std::optional<Diagnostic> parse_compiler_line(std::string_view text) {
  for (const auto& [token, severity] : kSeverityTokens) {
    auto at = text.find(token);
    if (at == std::string_view::npos) continue;
    std::string_view prefix = text.substr(0, at);
    std::string_view message = text.substr(at + token.size());
    Diagnostic d;
    d.source = DiagSource::compiler;
    d.message = std::string(message);
    if (auto loc = parse_location(prefix)) {
      d.severity = severity;
      d.file = loc->file;
      d.line = loc->line;
      d.column = loc->column;
      d.kind = compiler_kind(message);
      return d;
    }
    // Driver or linker: "clang: error: ...", "collect2: error: ...".
    if (severity != Severity::warning && !prefix.empty() &&
        prefix.find_first_of(" \t:") == std::string_view::npos) {
      d.severity = Severity::fatal;
      bool linker = message.find("linker") != std::string_view::npos ||
                    message.find("ld returned") != std::string_view::npos;
      d.kind = linker ? "linker-error" : "driver-error";
      return d;
    }
  }
  // "file.c:(.text+0x15): undefined reference to `sym'"
  if (auto at = text.find(": undefined reference to "); at != std::string_view::npos) {
    Diagnostic d;
    d.source = DiagSource::compiler;
    d.severity = Severity::fatal;
    d.kind = "undefined-reference";
    d.message = std::string(text.substr(at + 2));
    return d;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Sanitizer logs

struct Header {
  DiagSource source;
  std::string description;  // text after "XSanitizer: "
};

std::optional<DiagSource> tool_source(std::string_view tool) {
  if (tool == "Address" || tool == "Leak") return DiagSource::asan;
  if (tool == "UndefinedBehavior") return DiagSource::ubsan;
  if (tool == "Memory") return DiagSource::msan;
  if (tool == "Thread") return DiagSource::tsan;
  return std::nullopt;
}

// "==123==ERROR: AddressSanitizer: ..." or "WARNING: ThreadSanitizer: ...".
std::optional<Header> parse_header(std::string_view text) {
  std::string_view rest = text;
  if (starts_with(rest, "==")) {
    auto close = rest.find("==", 2);
    if (close == std::string_view::npos || !all_digits(rest.substr(2, close - 2))) return std::nullopt;
    rest.remove_prefix(close + 2);
  }
  if (starts_with(rest, "ERROR: ")) rest.remove_prefix(7);
  else if (starts_with(rest, "WARNING: ")) rest.remove_prefix(9);
  else return std::nullopt;
  auto marker = rest.find("Sanitizer: ");
  if (marker == std::string_view::npos) return std::nullopt;
  std::string_view tool = rest.substr(0, marker);
  if (tool.empty() || !std::all_of(tool.begin(), tool.end(), [](unsigned char c) { return std::isalpha(c); }))
    return std::nullopt;
  auto source = tool_source(tool);
  // Unknown tools still get a record so nothing is silently dropped.
  return Header{source.value_or(DiagSource::asan), std::string(rest.substr(marker + 11))};
}

bool is_summary(std::string_view text) {
  return starts_with(text, "SUMMARY: ") && text.find("Sanitizer: ") != std::string_view::npos;
}

std::string_view first_word(std::string_view s) {
  s = trim(s);
  auto end = s.find_first_of(" \t(");
  std::string_view w = s.substr(0, end);
  while (!w.empty() && (w.back() == ':' || w.back() == ',')) w.remove_suffix(1);
  return w;
}

bool looks_like_kind(std::string_view w) {
  if (w.empty()) return false;
  bool has_dash = w.find('-') != std::string_view::npos;
  bool all_upper = std::all_of(w.begin(), w.end(), [](unsigned char c) { return std::isupper(c); });
  bool alnum = std::all_of(w.begin(), w.end(),
                           [](unsigned char c) { return std::isalnum(c) || c == '-' || c == '_'; });
  return alnum && (has_dash || all_upper);
}

constexpr std::array kPhraseKinds{
    KindRule{"detected memory leaks", "memory-leak"},
    KindRule{"data race", "data-race"},
    KindRule{"thread leak", "thread-leak"},
};

std::string sanitizer_kind(std::string_view description, std::string_view summary) {
  if (auto w = first_word(description); looks_like_kind(w)) return std::string(w);
  if (!summary.empty()) {
    auto at = summary.find("Sanitizer: ");
    if (at != std::string_view::npos) {
      if (auto w = first_word(summary.substr(at + 11)); looks_like_kind(w)) return std::string(w);
    }
  }
  for (const auto& rule : kPhraseKinds)
    if (starts_with(trim(description), rule.needle)) return std::string(rule.kind);
  return "unclassified";
}

constexpr std::array kUbsanKinds{
    KindRule{"division by zero", "division by zero"},
    KindRule{"signed integer overflow", "signed integer overflow"},
    KindRule{"unsigned integer overflow", "unsigned integer overflow"},
    KindRule{"out of bounds for type", "index out of bounds"},
    KindRule{"shift exponent", "shift out of bounds"},
    KindRule{"left shift of", "shift out of bounds"},
    KindRule{"null pointer", "null pointer use"},
    KindRule{"misaligned address", "misaligned address"},
    KindRule{"is not a valid value for type", "invalid value load"},
    KindRule{"outside the range of representable values", "float cast overflow"},
    KindRule{"pointer overflow", "pointer overflow"},
    KindRule{"offset to null pointer", "pointer overflow"},
    KindRule{"reached the end of a value-returning function", "missing return"},
    KindRule{"reached an unreachable program point", "unreachable"},
    KindRule{"variable length array bound", "vla bound not positive"},
    KindRule{"passing zero to", "invalid builtin use"},
};

std::string ubsan_kind(std::string_view message) {
  for (const auto& rule : kUbsanKinds)
    if (message.find(rule.needle) != std::string_view::npos) return std::string(rule.kind);
  return "unclassified";
}

// "#3 0x55d1 in main /src/a.c:4:10", "#0 0x55d1  (/bin/a+0xdb) (BuildId: ..)",
// TSan: "#0 <null> <null> (race.bin+0xcc1c4)" or "#0 work /src/r.c:4 (r+0x12)".
std::optional<StackFrame> parse_frame(std::string_view text) {
  std::string_view s = trim(text);
  if (s.size() < 2 || s[0] != '#') return std::nullopt;
  std::size_t i = 1;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i == 1 || i > 10 || (i < s.size() && s[i] != ' ')) return std::nullopt;
  StackFrame f;
  f.index = to_int(s.substr(1, i - 1));
  s = trim(s.substr(i));
  if (starts_with(s, "0x")) {
    auto end = s.find(' ');
    f.pc = std::string(s.substr(0, end));
    s = end == std::string_view::npos ? std::string_view{} : trim(s.substr(end));
  }
  if (starts_with(s, "in ")) {
    s = trim(s.substr(3));
    auto end = s.find(' ');
    f.symbol = std::string(s.substr(0, end));
    s = end == std::string_view::npos ? std::string_view{} : trim(s.substr(end));
  } else if (!s.empty() && s[0] != '(') {
    auto end = s.find(' ');
    std::string_view sym = s.substr(0, end);
    if (sym != "<null>") f.symbol = std::string(sym);
    s = end == std::string_view::npos ? std::string_view{} : trim(s.substr(end));
    if (starts_with(s, "<null> ")) s = trim(s.substr(7));
  }
  if (!s.empty()) f.location = std::string(s);
  return f;
}

void locate_from_frames(Diagnostic& d) {
  for (const auto& f : d.frames) {
    if (!f.location) continue;
    std::string_view loc = *f.location;
    if (loc.empty() || loc[0] == '(') continue;
    if (auto parsed = parse_location(first_word(loc.substr(0, loc.find(' '))))) {
      d.file = parsed->file;
      d.line = parsed->line;
      d.column = parsed->column;
      return;
    }
  }
}

// First run of frames starting at #0; later stacks (allocation, free,
// thread creation) are left in the excerpt only.
std::vector<StackFrame> first_stack(const std::vector<Line>& lines, std::size_t from, std::size_t to) {
  std::vector<StackFrame> frames;
  for (std::size_t i = from; i < to; ++i) {
    auto f = parse_frame(lines[i].text);
    if (!f) {
      if (!frames.empty() && !parse_header(lines[i].text)) {
        // Tolerate runtime chatter such as symbolizer warnings inside the stack.
        std::string_view t = lines[i].text;
        if (starts_with(t, "==") && t.find("==WARNING: ") != std::string_view::npos) continue;
        break;
      }
      continue;
    }
    if (frames.empty() ? f->index != 0 : f->index != frames.back().index + 1) {
      if (!frames.empty()) break;
      continue;
    }
    frames.push_back(std::move(*f));
  }
  return frames;
}

std::string excerpt(std::string_view text, const std::vector<Line>& lines, std::size_t first, std::size_t last) {
  return std::string(text.substr(lines[first].begin, lines[last].end - lines[first].begin));
}

bool is_runtime_chatter(std::string_view t) {
  // "==1042==WARNING: invalid path to external symbolizer!"
  return starts_with(t, "==") && !parse_header(t);
}

// "file:line:col: runtime error: message"
std::optional<std::pair<Location, std::string_view>> parse_runtime_error(std::string_view text) {
  static constexpr std::string_view kToken = ": runtime error: ";
  auto at = text.find(kToken);
  if (at == std::string_view::npos) return std::nullopt;
  std::string_view prefix = text.substr(0, at);
  Location loc;
  if (prefix != "<unknown>") {
    auto parsed = parse_location(prefix);
    if (!parsed) return std::nullopt;
    loc = *parsed;
  }
  return std::pair{loc, text.substr(at + kToken.size())};
}

ErrorLog finish(std::string_view text, std::size_t cap, std::vector<Diagnostic> diags) {
  ErrorLog log;
  log.verbatim = std::string(truncate_head(text, cap, log.truncated));
  log.diagnostics = std::move(diags);
  return log;
}

}  // namespace

std::size_t ErrorLog::repair_trigger_count() const {
  return static_cast<std::size_t>(std::count_if(diagnostics.begin(), diagnostics.end(),
                                                [](const Diagnostic& d) { return d.triggers_repair(); }));
}

std::size_t ErrorLog::count(Severity s) const {
  return static_cast<std::size_t>(std::count_if(diagnostics.begin(), diagnostics.end(),
                                                [s](const Diagnostic& d) { return d.severity == s; }));
}

std::string_view truncate_head(std::string_view text, std::size_t cap, bool& truncated) {
  truncated = text.size() > cap;
  if (!truncated) return text;
  std::string_view head = text.substr(0, cap);
  auto nl = head.rfind('\n');
  return nl == std::string_view::npos ? head : head.substr(0, nl + 1);
}

ErrorLog parse_compiler_log(std::string_view text, std::size_t cap) {
  std::vector<Diagnostic> diags;
  for (const auto& line : split_lines(text)) {
    if (auto d = parse_compiler_line(line.text)) {
      d->raw_excerpt = std::string(text.substr(line.begin, line.end - line.begin));
      diags.push_back(std::move(*d));
    }
  }
  return finish(text, cap, std::move(diags));
}

ErrorLog parse_sanitizer_log(std::string_view text, std::size_t cap) {
  const auto lines = split_lines(text);
  std::vector<Diagnostic> diags;
  std::size_t i = 0;
  while (i < lines.size()) {
    if (auto header = parse_header(lines[i].text)) {
      std::size_t last = i;
      std::string_view summary;
      std::size_t j = i + 1;
      for (; j < lines.size(); ++j) {
        if (parse_header(lines[j].text)) break;
        last = j;
        if (is_summary(lines[j].text)) {
          summary = lines[j].text;
          break;
        }
      }
      // Without a SUMMARY the block runs to the next header or the end;
      // trailing blank lines are not part of it.
      while (last > i && trim(lines[last].text).empty()) --last;
      Diagnostic d;
      d.source = header->source;
      d.severity = Severity::runtime_error;
      d.kind = sanitizer_kind(header->description, summary);
      d.message = std::string(trim(header->description));
      d.frames = first_stack(lines, i + 1, last + 1);
      locate_from_frames(d);
      d.raw_excerpt = excerpt(text, lines, i, last);
      diags.push_back(std::move(d));
      i = last + 1;
      continue;
    }
    if (auto rt = parse_runtime_error(lines[i].text)) {
      auto& [loc, message] = *rt;
      std::size_t last = i;
      std::size_t j = i + 1;
      for (; j < lines.size(); ++j) {
        std::string_view t = lines[j].text;
        if (parse_frame(t) || is_runtime_chatter(t) || trim(t).empty()) continue;
        if (starts_with(t, "SUMMARY: UndefinedBehaviorSanitizer:")) last = j;
        break;
      }
      if (last == i) {
        // No SUMMARY: keep the stack lines that directly follow.
        for (std::size_t k = i + 1; k < j; ++k)
          if (parse_frame(lines[k].text) || is_runtime_chatter(lines[k].text)) last = k;
          else break;
      }
      Diagnostic d;
      d.source = DiagSource::ubsan;
      d.severity = Severity::runtime_error;
      d.kind = ubsan_kind(message);
      d.message = std::string(message);
      d.file = loc.file;
      d.line = loc.line;
      d.column = loc.column;
      d.frames = first_stack(lines, i + 1, last + 1);
      d.raw_excerpt = excerpt(text, lines, i, last);
      diags.push_back(std::move(d));
      i = last + 1;
      continue;
    }
    ++i;
  }
  return finish(text, cap, std::move(diags));
}

const char* to_string(DiagSource s) {
  switch (s) {
    case DiagSource::compiler: return "compiler";
    case DiagSource::asan: return "asan";
    case DiagSource::ubsan: return "ubsan";
    case DiagSource::msan: return "msan";
    case DiagSource::tsan: return "tsan";
  }
  return "compiler";
}

const char* to_string(Severity s) {
  switch (s) {
    case Severity::error: return "error";
    case Severity::warning: return "warning";
    case Severity::fatal: return "fatal";
    case Severity::runtime_error: return "runtime_error";
  }
  return "error";
}

std::optional<DiagSource> diag_source_from_string(std::string_view s) {
  for (auto v : {DiagSource::compiler, DiagSource::asan, DiagSource::ubsan, DiagSource::msan, DiagSource::tsan})
    if (s == to_string(v)) return v;
  return std::nullopt;
}

std::optional<Severity> severity_from_string(std::string_view s) {
  for (auto v : {Severity::error, Severity::warning, Severity::fatal, Severity::runtime_error})
    if (s == to_string(v)) return v;
  return std::nullopt;
}

namespace {

template <typename T>
void put_optional(nlohmann::json& j, const char* key, const std::optional<T>& v) {
  j[key] = v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <typename T>
std::optional<T> get_optional(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

}  // namespace

void to_json(nlohmann::json& j, const StackFrame& f) {
  j = nlohmann::json::object();
  j["index"] = f.index;
  put_optional(j, "pc", f.pc);
  put_optional(j, "symbol", f.symbol);
  put_optional(j, "location", f.location);
}

void from_json(const nlohmann::json& j, StackFrame& f) {
  f.index = j.at("index").get<int>();
  f.pc = get_optional<std::string>(j, "pc");
  f.symbol = get_optional<std::string>(j, "symbol");
  f.location = get_optional<std::string>(j, "location");
}

void to_json(nlohmann::json& j, const Diagnostic& d) {
  j = nlohmann::json::object();
  j["source"] = to_string(d.source);
  j["severity"] = to_string(d.severity);
  j["kind"] = d.kind;
  j["message"] = d.message;
  put_optional(j, "file", d.file);
  put_optional(j, "line", d.line);
  put_optional(j, "column", d.column);
  j["frames"] = d.frames;
  j["raw_excerpt"] = d.raw_excerpt;
}

void from_json(const nlohmann::json& j, Diagnostic& d) {
  auto source = diag_source_from_string(j.at("source").get<std::string>());
  auto severity = severity_from_string(j.at("severity").get<std::string>());
  if (!source || !severity) throw nlohmann::json::other_error::create(501, "bad diagnostic enum", &j);
  d.source = *source;
  d.severity = *severity;
  d.kind = j.at("kind").get<std::string>();
  d.message = j.value("message", "");
  d.file = get_optional<std::string>(j, "file");
  d.line = get_optional<int>(j, "line");
  d.column = get_optional<int>(j, "column");
  d.frames = j.value("frames", std::vector<StackFrame>{});
  d.raw_excerpt = j.value("raw_excerpt", "");
}

void to_json(nlohmann::json& j, const ErrorLog& log) {
  j = nlohmann::json{{"verbatim", log.verbatim}, {"diagnostics", log.diagnostics}, {"truncated", log.truncated}};
}

void from_json(const nlohmann::json& j, ErrorLog& log) {
  log.verbatim = j.at("verbatim").get<std::string>();
  log.diagnostics = j.at("diagnostics").get<std::vector<Diagnostic>>();
  log.truncated = j.at("truncated").get<bool>();
}

}  // namespace refuzz
