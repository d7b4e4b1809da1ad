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

#include "refuzz/llm_client.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <fstream>
#include <set>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "refuzz/hash.hpp"

namespace refuzz {
namespace {

using Clock = std::chrono::steady_clock;

std::int64_t millis_since(Clock::time_point t0) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
}

void cap_response(CompletionResponse& r, std::size_t cap) {
  if (r.text.size() <= cap) return;
  r.text.resize(cap);
  r.truncated = true;
}

// ---------------------------------------------------------------------------
// Code extraction

struct TextLine {
  std::size_t begin;
  std::size_t end;  // excludes '\n'
};

std::vector<TextLine> lines_of(std::string_view text) {
  std::vector<TextLine> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      if (pos < text.size()) out.push_back({pos, text.size()});
      break;
    }
    out.push_back({pos, nl});
    pos = nl + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool is_closing_fence(std::string_view line) {
  line = trim(line);
  return line.size() >= 3 && std::all_of(line.begin(), line.end(), [](char c) { return c == '`'; });
}

std::optional<std::string_view> opening_fence_info(std::string_view line) {
  std::string_view t = line;
  while (!t.empty() && (t.front() == ' ' || t.front() == '\t')) t.remove_prefix(1);
  if (t.substr(0, 3) != "```") return std::nullopt;
  t.remove_prefix(3);
  while (!t.empty() && t.front() == '`') t.remove_prefix(1);
  return trim(t);
}

bool accepted_info(std::string_view info) {
  std::string lower(info);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  return lower.empty() || lower == "c" || lower == "cpp" || lower == "c++";
}

std::optional<std::string> fenced_block(std::string_view text, const std::vector<TextLine>& lines) {
  for (std::size_t i = 0; i < lines.size(); ++i) {
    auto info = opening_fence_info(text.substr(lines[i].begin, lines[i].end - lines[i].begin));
    if (!info) continue;
    std::size_t close = i + 1;
    while (close < lines.size() &&
           !is_closing_fence(text.substr(lines[close].begin, lines[close].end - lines[close].begin)))
      ++close;
    if (accepted_info(*info)) {
      std::size_t content_begin = std::min(lines[i].end + 1, text.size());
      if (close >= lines.size()) return std::string(text.substr(content_begin));
      std::size_t content_end = lines[close].begin == content_begin ? content_begin : lines[close].begin - 1;
      return std::string(text.substr(content_begin, content_end - content_begin));
    }
    i = close;  // skip a block in some other language
  }
  return std::nullopt;
}

const std::set<std::string_view> kTypeStarters{
    "int",    "void",   "char",    "short",  "long",   "float", "double", "signed",   "unsigned", "struct",
    "union",  "enum",   "typedef", "static", "const",  "extern", "_Bool", "bool",     "size_t",   "inline",
    "uint8_t", "uint16_t", "uint32_t", "uint64_t", "int8_t", "int16_t", "int32_t", "int64_t", "volatile"};

std::string_view first_identifier(std::string_view line) {
  std::size_t n = 0;
  while (n < line.size() && (std::isalnum(static_cast<unsigned char>(line[n])) || line[n] == '_')) ++n;
  return line.substr(0, n);
}

bool starts_code_region(std::string_view line) {
  if (line.substr(0, 8) == "#include") return true;
  return kTypeStarters.count(first_identifier(line)) > 0;
}

bool looks_like_prose(std::string_view line) {
  std::string_view t = trim(line);
  if (t.empty() || !std::isalpha(static_cast<unsigned char>(t.front()))) return false;
  if (kTypeStarters.count(first_identifier(t))) return false;
  char last = t.back();
  return !(last == ';' || last == '{' || last == '}' || last == ')' || last == ',' || last == '\\');
}

// Brace delta of one line, ignoring string/char literals and // comments.
int brace_delta(std::string_view line) {
  int delta = 0;
  char quote = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quote) {
      if (c == '\\') ++i;
      else if (c == quote) quote = 0;
      continue;
    }
    if (c == '"' || c == '\'') quote = c;
    else if (c == '/' && i + 1 < line.size() && line[i + 1] == '/') break;
    else if (c == '{') ++delta;
    else if (c == '}') --delta;
  }
  return delta;
}

std::optional<std::string> unfenced_region(std::string_view text, const std::vector<TextLine>& lines) {
  auto line_at = [&](std::size_t k) { return text.substr(lines[k].begin, lines[k].end - lines[k].begin); };
  std::size_t best_begin = 0, best_len = 0;
  std::size_t s = 0;
  while (s < lines.size()) {
    if (!starts_code_region(line_at(s))) {
      ++s;
      continue;
    }
    int depth = 0;
    bool opened = false;
    std::optional<std::size_t> end;
    for (std::size_t j = s; j < lines.size(); ++j) {
      std::string_view l = line_at(j);
      if (depth == 0 && j > s && looks_like_prose(l)) break;
      depth += brace_delta(l);
      if (depth < 0) break;
      if (depth > 0) opened = true;
      if (opened && depth == 0) end = j;
    }
    if (end && *end - s + 1 >= 3 && *end - s + 1 > best_len) {
      best_begin = s;
      best_len = *end - s + 1;
    }
    s = end ? *end + 1 : s + 1;
  }
  if (best_len == 0) return std::nullopt;
  std::size_t from = lines[best_begin].begin;
  std::size_t to = lines[best_begin + best_len - 1].end;
  return std::string(text.substr(from, to - from));
}

}  // namespace

void ModelConfig::validate() const {
  if (endpoint.empty()) throw std::invalid_argument("model.endpoint must not be empty");
  if (temperature < 0) throw std::invalid_argument("model.temperature must be >= 0");
  if (transport_retries < 0 || transport_retries > 2)
    throw std::invalid_argument("model.transport_retries must be in [0, 2]");
  if (max_in_flight < 1) throw std::invalid_argument("model.max_in_flight must be >= 1");
  if (request_timeout_s <= 0) throw std::invalid_argument("model.request_timeout_s must be positive");
  if (max_prompt_bytes == 0) throw std::invalid_argument("model.max_prompt_bytes must be positive");
}

OllamaModel::OllamaModel(int max_in_flight) : slots_(std::clamp(max_in_flight, 1, 64)) {}

CompletionResponse OllamaModel::complete(const CompletionRequest& req) {
  if (req.prompt.empty()) throw std::invalid_argument("empty prompt");
  const ModelConfig& cfg = req.config;
  nlohmann::json body{{"model", cfg.model_name},
                      {"prompt", req.prompt},
                      {"stream", false},
                      {"options", {{"temperature", cfg.temperature}}}};
  const std::string payload = body.dump();

  slots_.acquire();
  struct Release {
    std::counting_semaphore<64>& s;
    ~Release() { s.release(); }
  } release{slots_};

  const auto started = Clock::now();
  std::string last_error;
  for (int attempt = 0; attempt <= cfg.transport_retries; ++attempt) {
    httplib::Client client(cfg.endpoint);
    auto secs = static_cast<time_t>(cfg.request_timeout_s);
    client.set_connection_timeout(std::min<time_t>(secs, 10), 0);
    client.set_read_timeout(secs, 0);
    client.set_write_timeout(secs, 0);
    auto res = client.Post("/api/generate", payload, "application/json");
    if (!res) {
      last_error = "request to " + cfg.endpoint + " failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      last_error = "HTTP " + std::to_string(res->status) + " from " + cfg.endpoint;
      continue;
    }
    auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_object() || !parsed.contains("response") ||
        !parsed["response"].is_string())
      throw ProtocolError("malformed generate response from " + cfg.endpoint);
    CompletionResponse out;
    out.text = parsed["response"].get<std::string>();
    out.backend = Backend::live;
    out.latency_ms = millis_since(started);
    cap_response(out, cfg.max_response_bytes);
    return out;
  }
  throw TransportError(last_error);
}

void MockModel::add_prompt(std::string prompt_sha256, std::string response) {
  std::lock_guard lock(mu_);
  by_prompt_[std::move(prompt_sha256)] = std::move(response);
}

void MockModel::add_keyed(std::string key_sha256, std::string response) {
  std::lock_guard lock(mu_);
  by_key_[std::move(key_sha256)] = std::move(response);
}

void MockModel::load_cassette(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open cassette " + path.string());
  auto doc = nlohmann::json::parse(in);
  if (!doc.is_array()) throw std::runtime_error("cassette must be a JSON array: " + path.string());
  for (const auto& rec : doc) {
    std::string text = rec.at("response_text").get<std::string>();
    if (rec.contains("prompt_sha256")) add_prompt(rec["prompt_sha256"].get<std::string>(), text);
    if (rec.contains("source_sha256")) add_keyed(rec["source_sha256"].get<std::string>(), text);
  }
}

CompletionResponse MockModel::complete(const CompletionRequest& req) {
  if (req.prompt.empty()) throw std::invalid_argument("empty prompt");
  ++calls_;
  const auto started = Clock::now();
  std::optional<std::string> text;
  {
    std::lock_guard lock(mu_);
    if (auto it = by_prompt_.find(sha256_hex(req.prompt)); it != by_prompt_.end()) text = it->second;
    if (!text && key_fn_) {
      if (auto key = key_fn_(req.prompt)) {
        if (auto it = by_key_.find(sha256_hex(*key)); it != by_key_.end()) text = it->second;
      }
    }
  }
  if (!text && responder_) text = responder_(req.prompt);
  if (!text) throw TransportError("mock backend has no response for prompt " + sha256_hex(req.prompt));
  CompletionResponse out;
  out.text = std::move(*text);
  out.backend = Backend::mock;
  out.latency_ms = millis_since(started);
  cap_response(out, req.config.max_response_bytes);
  return out;
}

std::optional<std::string> extract_code(std::string_view text) {
  const auto lines = lines_of(text);
  if (auto block = fenced_block(text, lines)) return block;
  return unfenced_region(text, lines);
}

}  // namespace refuzz
