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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace refuzz {

struct ModelConfig {
  std::string endpoint = "http://127.0.0.1:11434";
  std::string model_name = "llama3.2";
  double temperature = 0.2;
  std::size_t max_response_bytes = 256u << 10;
  /// Prompts above this are still sent whole but flagged in the trace.
  std::size_t max_prompt_bytes = 128u << 10;
  double request_timeout_s = 120.0;
  /// Retries of a failed HTTP exchange. Unrelated to repair attempts.
  int transport_retries = 1;
  int max_in_flight = 2;

  void validate() const;
};

struct CompletionRequest {
  std::string prompt;
  ModelConfig config;
};

enum class Backend { live, mock };

struct CompletionResponse {
  std::string text;
  std::int64_t latency_ms = 0;
  Backend backend = Backend::mock;
  bool truncated = false;
};

/// No completion was obtained: connection refused, non-2xx, timeout.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The server answered but the body was not a usable completion.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  virtual CompletionResponse complete(const CompletionRequest& req) = 0;
};

// Ollama-style generate endpoint: POST <endpoint>/api/generate with
// {model, prompt, stream:false, options:{temperature}}, reading `response`.
class OllamaModel : public LanguageModel {
 public:
  explicit OllamaModel(int max_in_flight = 2);
  CompletionResponse complete(const CompletionRequest& req) override;

 private:
  std::counting_semaphore<64> slots_;
};

// Replays canned responses. Lookup order: exact prompt hash, then the hash
// of a caller-defined key derived from the prompt (the repair loop keys on
// the program under repair, whose logs carry pids and addresses), then the
// fallback responder. Never touches the network.
class MockModel : public LanguageModel {
 public:
  using KeyFn = std::function<std::optional<std::string>(std::string_view prompt)>;
  using Responder = std::function<std::optional<std::string>(std::string_view prompt)>;

  MockModel() = default;

  void add_prompt(std::string prompt_sha256, std::string response);
  void add_keyed(std::string key_sha256, std::string response);
  void set_key_fn(KeyFn fn) { key_fn_ = std::move(fn); }
  void set_responder(Responder fn) { responder_ = std::move(fn); }

  /// Cassette: JSON array of {prompt_sha256 | source_sha256, response_text}.
  void load_cassette(const std::filesystem::path& path);

  CompletionResponse complete(const CompletionRequest& req) override;

  std::size_t calls() const { return calls_.load(); }

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string> by_prompt_;
  std::map<std::string, std::string> by_key_;
  KeyFn key_fn_;
  Responder responder_;
  std::atomic<std::size_t> calls_{0};
};

/// First fenced block tagged ``, `c` or `cpp`; failing that, the longest
/// brace-balanced region of at least three lines that starts with
/// `#include` or a type keyword.
std::optional<std::string> extract_code(std::string_view text);

}  // namespace refuzz
