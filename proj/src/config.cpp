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

#include "refuzz/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace refuzz {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
  throw ConfigError(std::string(key) + ": expected " + std::string(expected) + ", got '" + std::string(value) + "'");
}

template <typename Int>
Int to_int(std::string_view key, std::string_view value) {
  Int v{};
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || end != value.data() + value.size()) bad_value(key, value, "an integer");
  return v;
}

double to_double(std::string_view key, std::string_view value) {
  double v = 0;
  auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || end != value.data() + value.size()) bad_value(key, value, "a number");
  return v;
}

std::vector<std::string> split(std::string_view value, char sep) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    auto next = value.find(sep, pos);
    if (next == std::string_view::npos) next = value.size();
    auto part = trim(value.substr(pos, next - pos));
    if (!part.empty()) out.emplace_back(part);
    pos = next + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

SanitizerProfile profile_for(std::string_view key, std::string_view name) {
  auto kind = sanitizer_from_string(name);
  if (!kind) bad_value(key, name, "address_undefined, memory or thread");
  switch (*kind) {
    case SanitizerKind::address_undefined: return SanitizerProfile::address_undefined();
    case SanitizerKind::memory: return SanitizerProfile::memory();
    case SanitizerKind::thread: return SanitizerProfile::thread();
  }
  return SanitizerProfile::address_undefined();
}

std::string format_double(double v) {
  std::ostringstream ss;
  ss << v;
  return ss.str();
}

}  // namespace

Config::Config() {
#ifdef REFUZZ_DEFAULT_KEYWORDS
  keywords_file = REFUZZ_DEFAULT_KEYWORDS;
#endif
}

ToolchainConfig Config::effective_toolchain() const {
  ToolchainConfig t = toolchain;
  t.work_dir = work_dir ? *work_dir : corpus_root / "runs";
  return t;
}

int Config::effective_workers() const {
  if (workers > 0) return workers;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void Config::validate() const {
  toolchain.validate();
  try {
    model.validate();
    repair.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (keywords_per_prompt < 1) throw ConfigError("generator.keywords_per_prompt must be at least 1");
  if (generate_count < 0) throw ConfigError("generator.count must not be negative");
  if (workers < 0) throw ConfigError("corpus.workers must not be negative");
  if (backend == BackendChoice::mock && cassette.empty()) throw ConfigError("the mock backend needs model.cassette");
}

std::uint64_t parse_size(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw ConfigError("empty size");
  std::uint64_t scale = 1;
  char suffix = static_cast<char>(std::toupper(static_cast<unsigned char>(text.back())));
  if (suffix == 'B' && text.size() > 1) {
    text.remove_suffix(1);
    suffix = static_cast<char>(std::toupper(static_cast<unsigned char>(text.back())));
  }
  switch (suffix) {
    case 'K': scale = 1ull << 10; break;
    case 'M': scale = 1ull << 20; break;
    case 'G': scale = 1ull << 30; break;
    case 'T': scale = 1ull << 40; break;
    default: break;
  }
  if (scale != 1) text.remove_suffix(1);
  std::uint64_t n = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc() || end != text.data() + text.size() || n > UINT64_MAX / scale)
    throw ConfigError("bad size '" + std::string(text) + "'");
  return n * scale;
}

std::string format_size(std::uint64_t bytes) {
  static constexpr std::pair<char, std::uint64_t> units[] = {{'T', 1ull << 40}, {'G', 1ull << 30},
                                                             {'M', 1ull << 20}, {'K', 1ull << 10}};
  for (auto [suffix, scale] : units)
    if (bytes != 0 && bytes % scale == 0) return std::to_string(bytes / scale) + suffix;
  return std::to_string(bytes);
}

void apply_setting(Config& cfg, std::string_view key, std::string_view raw) {
  const std::string_view v = trim(raw);
  auto& t = cfg.toolchain;
  auto& m = cfg.model;

  if (key == "toolchain.compiler") t.compiler_path = v;
  else if (key == "toolchain.cxx_compiler") t.cxx_compiler_path = v;
  else if (key == "toolchain.base_flags") t.base_flags = split(v, ' ');
  else if (key == "toolchain.link_flags") t.link_flags = split(v, ' ');
  else if (key == "toolchain.opt_level") t.opt_level = v;
  else if (key == "toolchain.sanitizers") {
    t.sanitizer_profiles.clear();
    for (const auto& name : split(v, ',')) t.sanitizer_profiles.push_back(profile_for(key, name));
  } else if (key == "toolchain.timeout_s") t.timeout_s = to_double(key, v);
  else if (key == "toolchain.memory_limit") t.memory_limit_bytes = parse_size(v);
  else if (key == "toolchain.determinism_runs") t.determinism_runs = to_int<int>(key, v);
  else if (key == "toolchain.work_dir") {
    if (v.empty()) cfg.work_dir.reset();
    else cfg.work_dir = std::filesystem::path(v);
  } else if (key == "model.endpoint") m.endpoint = v;
  else if (key == "model.name") m.model_name = v;
  else if (key == "model.temperature") m.temperature = to_double(key, v);
  else if (key == "model.max_response_bytes") m.max_response_bytes = parse_size(v);
  else if (key == "model.max_prompt_bytes") m.max_prompt_bytes = parse_size(v);
  else if (key == "model.request_timeout_s") m.request_timeout_s = to_double(key, v);
  else if (key == "model.transport_retries") m.transport_retries = to_int<int>(key, v);
  else if (key == "model.max_in_flight") m.max_in_flight = to_int<int>(key, v);
  else if (key == "model.backend") {
    if (v == "live") cfg.backend = BackendChoice::live;
    else if (v == "mock") cfg.backend = BackendChoice::mock;
    else bad_value(key, v, "live or mock");
  } else if (key == "model.cassette") cfg.cassette = v;
  else if (key == "repair.max_attempts") cfg.repair.max_attempts = to_int<int>(key, v);
  else if (key == "repair.opt_level_arg") cfg.repair.opt_level_arg = v;
  else if (key == "generator.keywords_file") cfg.keywords_file = v;
  else if (key == "generator.keywords_per_prompt") cfg.keywords_per_prompt = to_int<int>(key, v);
  else if (key == "generator.count") cfg.generate_count = to_int<int>(key, v);
  else if (key == "generator.seed") cfg.seed = to_int<std::uint64_t>(key, v);
  else if (key == "coverage.map") {
    if (v.empty()) cfg.component_map.reset();
    else cfg.component_map = std::filesystem::path(v);
  } else if (key == "corpus.root") cfg.corpus_root = v;
  else if (key == "corpus.workers") cfg.workers = to_int<int>(key, v);
  else if (key == "corpus.max_file_bytes") cfg.max_file_bytes = parse_size(v);
  else throw ConfigError("unknown setting '" + std::string(key) + "'");
}

void apply_config_text(Config& cfg, std::string_view text, std::string_view origin) {
  std::size_t pos = 0, no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++no;
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(std::string(origin) + ":" + std::to_string(no) + ": expected key=value");
    try {
      apply_setting(cfg, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(no) + ": " + e.what());
    }
  }
}

void apply_config_file(Config& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str(), path.string());
}

void apply_environment(Config& cfg) {
  if (const char* endpoint = std::getenv("REFUZZ_MODEL_ENDPOINT"); endpoint && *endpoint)
    cfg.model.endpoint = endpoint;
}

std::string render_config(const Config& cfg) {
  const auto& t = cfg.toolchain;
  const auto& m = cfg.model;
  std::vector<std::string> sanitizers;
  for (const auto& p : t.sanitizer_profiles) sanitizers.emplace_back(to_string(p.kind));
  std::ostringstream out;
  out << "toolchain.compiler=" << t.compiler_path << "\n"
      << "toolchain.cxx_compiler=" << t.cxx_compiler_path << "\n"
      << "toolchain.base_flags=" << join(t.base_flags, " ") << "\n"
      << "toolchain.link_flags=" << join(t.link_flags, " ") << "\n"
      << "toolchain.opt_level=" << t.opt_level << "\n"
      << "toolchain.sanitizers=" << join(sanitizers, ",") << "\n"
      << "toolchain.timeout_s=" << format_double(t.timeout_s) << "\n"
      << "toolchain.memory_limit=" << format_size(t.memory_limit_bytes) << "\n"
      << "toolchain.determinism_runs=" << t.determinism_runs << "\n"
      << "toolchain.work_dir=" << (cfg.work_dir ? cfg.work_dir->string() : "") << "\n"
      << "model.endpoint=" << m.endpoint << "\n"
      << "model.name=" << m.model_name << "\n"
      << "model.temperature=" << format_double(m.temperature) << "\n"
      << "model.max_response_bytes=" << format_size(m.max_response_bytes) << "\n"
      << "model.max_prompt_bytes=" << format_size(m.max_prompt_bytes) << "\n"
      << "model.request_timeout_s=" << format_double(m.request_timeout_s) << "\n"
      << "model.transport_retries=" << m.transport_retries << "\n"
      << "model.max_in_flight=" << m.max_in_flight << "\n"
      << "model.backend=" << (cfg.backend == BackendChoice::mock ? "mock" : "live") << "\n"
      << "model.cassette=" << cfg.cassette.string() << "\n"
      << "repair.max_attempts=" << cfg.repair.max_attempts << "\n"
      << "repair.opt_level_arg=" << cfg.repair.opt_level_arg << "\n"
      << "generator.keywords_file=" << cfg.keywords_file.string() << "\n"
      << "generator.keywords_per_prompt=" << cfg.keywords_per_prompt << "\n"
      << "generator.count=" << cfg.generate_count << "\n"
      << "generator.seed=" << cfg.seed << "\n"
      << "coverage.map=" << (cfg.component_map ? cfg.component_map->string() : "") << "\n"
      << "corpus.root=" << cfg.corpus_root.string() << "\n"
      << "corpus.workers=" << cfg.workers << "\n"
      << "corpus.max_file_bytes=" << format_size(cfg.max_file_bytes) << "\n";
  return out.str();
}

}  // namespace refuzz
