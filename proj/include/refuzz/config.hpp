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

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "refuzz/generator.hpp"
#include "refuzz/llm_client.hpp"
#include "refuzz/repair.hpp"
#include "refuzz/validator.hpp"

namespace refuzz {

enum class BackendChoice { live, mock };

// Everything the front end can configure. Precedence, lowest first:
// built-in defaults, the config file, REFUZZ_MODEL_ENDPOINT, command-line flags.
struct Config {
  ToolchainConfig toolchain;
  /// Unset means <corpus root>/runs.
  std::optional<std::filesystem::path> work_dir;
  ModelConfig model;
  BackendChoice backend = BackendChoice::live;
  std::filesystem::path cassette;
  RepairPolicy repair;
  std::filesystem::path keywords_file;
  int keywords_per_prompt = 3;
  int generate_count = 10;
  std::uint64_t seed = 0;
  /// Unset means the built-in LLVM map.
  std::optional<std::filesystem::path> component_map;
  std::filesystem::path corpus_root = "corpus";
  int workers = 0;  ///< 0: one per logical core
  std::uintmax_t max_file_bytes = 1u << 20;

  Config();

  ToolchainConfig effective_toolchain() const;
  int effective_workers() const;
  /// Throws ConfigError.
  void validate() const;
};

/// Sets one dotted key such as `toolchain.timeout_s`. Throws ConfigError.
void apply_setting(Config& cfg, std::string_view key, std::string_view value);

/// key=value lines; `#` comments and blank lines are ignored.
void apply_config_text(Config& cfg, std::string_view text, std::string_view origin = "<config>");
void apply_config_file(Config& cfg, const std::filesystem::path& path);
void apply_environment(Config& cfg);

/// Every key in a form apply_config_text accepts.
std::string render_config(const Config& cfg);

/// "16G", "512M", "1024" (bytes); K/M/G/T are powers of 1024.
std::uint64_t parse_size(std::string_view text);
std::string format_size(std::uint64_t bytes);

}  // namespace refuzz
