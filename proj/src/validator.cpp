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

#include "refuzz/validator.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <string_view>

#include "refuzz/process.hpp"

namespace fs = std::filesystem;

namespace refuzz {
namespace {

std::chrono::milliseconds timeout_of(const ToolchainConfig& cfg) {
  return std::chrono::milliseconds(static_cast<std::int64_t>(cfg.timeout_s * 1000.0));
}

// Each invocation gets a fresh run-<n> directory under
// <work_dir>/<program-id>/<phase>/, so runs never share files.
fs::path fresh_run_dir(const ToolchainConfig& cfg, const std::string& program_id, const std::string& phase,
                       std::string& run_name) {
  fs::path base = fs::absolute(cfg.work_dir / program_id / phase);
  fs::create_directories(base);
  for (int n = 1;; ++n) {
    run_name = "run-" + std::to_string(n);
    fs::path dir = base / run_name;
    if (fs::create_directory(dir)) return dir;
  }
}

void write_text(const fs::path& p, std::string_view text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

const char* source_name(Language l) { return l == Language::c ? "prog.c" : "prog.cpp"; }

std::vector<std::string> compile_command(const ProgramSource& program, const ToolchainConfig& cfg,
                                         std::span<const std::string> extra) {
  std::vector<std::string> argv{program.language == Language::c ? cfg.compiler_path : cfg.cxx_compiler_path};
  argv.insert(argv.end(), cfg.base_flags.begin(), cfg.base_flags.end());
  argv.push_back(cfg.opt_level);
  argv.insert(argv.end(), extra.begin(), extra.end());
  argv.push_back(source_name(program.language));
  argv.push_back("-o");
  argv.push_back("prog");
  argv.insert(argv.end(), cfg.link_flags.begin(), cfg.link_flags.end());
  return argv;
}

ProcessResult compile(const ProgramSource& program, const ToolchainConfig& cfg, const fs::path& dir,
                      std::span<const std::string> extra) {
  write_text(dir / source_name(program.language), program.text);
  ProcessSpec spec;
  spec.argv = compile_command(program, cfg, extra);
  spec.cwd = dir;
  spec.limits.timeout = timeout_of(cfg);
  spec.limits.memory_limit_bytes = cfg.memory_limit_bytes;
  spec.limits.limit_address_space = true;
  return run_process(spec);
}

std::string exit_trailer(const ProcessResult& r) {
  switch (r.termination) {
    case Termination::exited: return "[exit] code " + std::to_string(r.exit_code) + "\n";
    case Termination::signaled: return "[exit] signal " + std::to_string(r.signal) + "\n";
    case Termination::timed_out: return "[exit] killed after timeout\n";
    case Termination::memory_exceeded: return "[exit] killed after exceeding memory limit\n";
    case Termination::spawn_failed: return "[exit] spawn failed: " + r.spawn_error + "\n";
  }
  return {};
}

void persist(ValidationOutcome& o, const fs::path& dir) {
  o.log_path = dir / "outcome.log";
  write_text(o.log_path, o.error_log.verbatim);
  nlohmann::json j = o;
  write_text(dir / "outcome.json", j.dump(2));
}

ValidationOutcome run_profile(const ProgramSource& program, const ToolchainConfig& cfg,
                              const SanitizerProfile& profile) {
  ValidationOutcome o;
  o.program_id = program.id;
  o.phase = Phase::dynamic_check;
  o.profile = profile.kind;
  std::string run_name;
  const std::string phase_dir = std::string("dynamic-") + to_string(profile.kind);
  fs::path dir = fresh_run_dir(cfg, program.id, phase_dir, run_name);
  o.id = program.id + "/" + phase_dir + "/" + run_name;

  ProcessResult build = compile(program, cfg, dir, profile.compile_flags);
  if (build.termination != Termination::exited || build.exit_code != 0) {
    o.verdict = Verdict::tool_error;
    o.detail = build.termination == Termination::spawn_failed
                   ? build.spawn_error
                   : "instrumented build failed (" + std::string(to_string(build.termination)) + ")";
    o.error_log = parse_compiler_log(build.stderr_text + exit_trailer(build));
    o.wall_time_ms = build.wall_time.count();
    persist(o, dir);
    return o;
  }

  ProcessSpec spec;
  spec.argv = {(dir / "prog").string()};
  spec.env = profile.runtime_env;
  spec.cwd = dir;
  spec.limits.timeout = timeout_of(cfg);
  spec.limits.memory_limit_bytes = cfg.memory_limit_bytes;
  spec.limits.limit_address_space = false;  // shadow memory needs the address space

  const int runs = std::max(1, cfg.determinism_runs);
  ProcessResult first;
  std::string determinism_note;
  std::int64_t elapsed = 0;
  std::uint64_t peak = 0;
  for (int k = 0; k < runs; ++k) {
    ProcessResult r = run_process(spec);
    elapsed += r.wall_time.count();
    if (r.peak_rss_bytes) peak = std::max(peak, *r.peak_rss_bytes);
    if (k == 0) {
      first = std::move(r);
      if (first.termination == Termination::timed_out || first.termination == Termination::memory_exceeded ||
          first.termination == Termination::spawn_failed)
        break;
      continue;
    }
    if (r.stdout_text != first.stdout_text || r.exit_code != first.exit_code ||
        r.termination != first.termination) {
      determinism_note = "[determinism] run " + std::to_string(k + 1) + " disagrees with run 1\n";
      break;
    }
  }
  fs::remove(dir / "prog");

  o.wall_time_ms = elapsed;
  o.peak_memory_bytes = peak;
  if (first.termination == Termination::exited) o.exit_code = first.exit_code;
  o.error_log = parse_sanitizer_log(first.interleaved + exit_trailer(first) + determinism_note);

  switch (first.termination) {
    case Termination::spawn_failed:
      o.verdict = Verdict::tool_error;
      o.detail = first.spawn_error;
      break;
    case Termination::timed_out:
      o.verdict = Verdict::hang;
      break;
    case Termination::memory_exceeded:
      o.verdict = Verdict::resource_exceeded;
      break;
    case Termination::signaled:
      o.verdict = Verdict::fail;
      break;
    case Termination::exited:
      o.verdict = o.error_log.count(Severity::runtime_error) > 0 || !determinism_note.empty() ? Verdict::fail
                                                                                              : Verdict::pass;
      break;
  }
  persist(o, dir);
  return o;
}

}  // namespace

SanitizerProfile SanitizerProfile::address_undefined() {
  return {SanitizerKind::address_undefined,
          {"-g", "-fno-omit-frame-pointer", "-fsanitize=address,undefined"},
          {"ASAN_OPTIONS=detect_leaks=0:abort_on_error=0", "UBSAN_OPTIONS=print_stacktrace=1:halt_on_error=1"}};
}

SanitizerProfile SanitizerProfile::memory() {
  return {SanitizerKind::memory,
          {"-g", "-fno-omit-frame-pointer", "-fsanitize=memory"},
          {"MSAN_OPTIONS=halt_on_error=1"}};
}

SanitizerProfile SanitizerProfile::thread() {
  return {SanitizerKind::thread, {"-g", "-fsanitize=thread"}, {"TSAN_OPTIONS=halt_on_error=1"}};
}

const char* to_string(SanitizerKind k) {
  switch (k) {
    case SanitizerKind::address_undefined: return "address_undefined";
    case SanitizerKind::memory: return "memory";
    case SanitizerKind::thread: return "thread";
  }
  return "address_undefined";
}

std::optional<SanitizerKind> sanitizer_from_string(std::string_view s) {
  for (auto k : {SanitizerKind::address_undefined, SanitizerKind::memory, SanitizerKind::thread})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

const char* to_string(Phase p) { return p == Phase::static_check ? "static" : "dynamic"; }

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::hang: return "hang";
    case Verdict::resource_exceeded: return "resource_exceeded";
    case Verdict::tool_error: return "tool_error";
  }
  return "tool_error";
}

std::optional<Verdict> verdict_from_string(std::string_view s) {
  for (auto v : {Verdict::pass, Verdict::fail, Verdict::hang, Verdict::resource_exceeded, Verdict::tool_error})
    if (s == to_string(v)) return v;
  return std::nullopt;
}

void ToolchainConfig::validate() const {
  if (!(timeout_s > 0)) throw ConfigError("toolchain.timeout_s must be positive");
  if (memory_limit_bytes == 0) throw ConfigError("toolchain.memory_limit_bytes must be positive");
  static const std::regex opt(R"(-O[0123sz])");
  if (!std::regex_match(opt_level, opt)) throw ConfigError("toolchain.opt_level must match -O[0123sz]: " + opt_level);
  if (determinism_runs < 1) throw ConfigError("toolchain.determinism_runs must be at least 1");
  for (const auto& p : sanitizer_profiles) {
    bool address = false, memory = false;
    for (const auto& f : p.compile_flags) {
      if (f.rfind("-fsanitize=", 0) != 0) continue;
      address |= f.find("address") != std::string::npos;
      memory |= f.find("memory") != std::string::npos;
    }
    if (address && memory)
      throw ConfigError(std::string("profile ") + to_string(p.kind) + " combines address and memory sanitizers");
  }
}

void to_json(nlohmann::json& j, const ValidationOutcome& o) {
  j = nlohmann::json{{"id", o.id},
                     {"program_id", o.program_id},
                     {"phase", to_string(o.phase)},
                     {"verdict", to_string(o.verdict)},
                     {"exit_code", o.exit_code ? nlohmann::json(*o.exit_code) : nlohmann::json(nullptr)},
                     {"wall_time_ms", o.wall_time_ms},
                     {"peak_memory_bytes",
                      o.peak_memory_bytes ? nlohmann::json(*o.peak_memory_bytes) : nlohmann::json(nullptr)},
                     {"profile", o.profile ? nlohmann::json(to_string(*o.profile)) : nlohmann::json(nullptr)},
                     {"detail", o.detail},
                     {"log_path", o.log_path.string()},
                     {"error_log", o.error_log}};
}

void from_json(const nlohmann::json& j, ValidationOutcome& o) {
  o = ValidationOutcome{};
  j.at("id").get_to(o.id);
  j.at("program_id").get_to(o.program_id);
  o.phase = j.at("phase").get<std::string>() == "static" ? Phase::static_check : Phase::dynamic_check;
  auto verdict = verdict_from_string(j.at("verdict").get<std::string>());
  if (!verdict) throw std::invalid_argument("unknown verdict " + j.at("verdict").dump());
  o.verdict = *verdict;
  if (!j.at("exit_code").is_null()) o.exit_code = j["exit_code"].get<int>();
  o.wall_time_ms = j.at("wall_time_ms").get<std::int64_t>();
  if (!j.at("peak_memory_bytes").is_null()) o.peak_memory_bytes = j["peak_memory_bytes"].get<std::uint64_t>();
  if (!j.at("profile").is_null()) o.profile = sanitizer_from_string(j["profile"].get<std::string>());
  j.at("detail").get_to(o.detail);
  j.at("error_log").get_to(o.error_log);
  if (j.contains("log_path")) o.log_path = j["log_path"].get<std::string>();
}

ValidationOutcome validate_static(const ProgramSource& program, const ToolchainConfig& cfg) {
  ValidationOutcome o;
  o.program_id = program.id;
  o.phase = Phase::static_check;
  std::string run_name;
  fs::path dir = fresh_run_dir(cfg, program.id, "static", run_name);
  o.id = program.id + "/static/" + run_name;

  ProcessResult r = compile(program, cfg, dir, {});
  fs::remove(dir / "prog");
  o.wall_time_ms = r.wall_time.count();
  o.peak_memory_bytes = r.peak_rss_bytes;
  if (r.termination == Termination::exited) o.exit_code = r.exit_code;
  o.error_log = parse_compiler_log(r.stderr_text);

  switch (r.termination) {
    case Termination::spawn_failed:
      o.verdict = Verdict::tool_error;
      o.detail = r.spawn_error;
      break;
    case Termination::timed_out:
      o.verdict = Verdict::hang;
      break;
    case Termination::memory_exceeded:
      o.verdict = Verdict::resource_exceeded;
      break;
    case Termination::signaled:
      o.verdict = Verdict::fail;
      break;
    case Termination::exited:
      o.verdict = r.exit_code == 0 ? Verdict::pass : Verdict::fail;
      break;
  }
  persist(o, dir);
  return o;
}

std::vector<ValidationOutcome> validate_dynamic(const ProgramSource& program, const ToolchainConfig& cfg) {
  std::vector<ValidationOutcome> out;
  out.reserve(cfg.sanitizer_profiles.size());
  for (const auto& profile : cfg.sanitizer_profiles) out.push_back(run_profile(program, cfg, profile));
  return out;
}

ProgramStatus classify(const ValidationOutcome& static_outcome, std::span<const ValidationOutcome> dynamic_outcomes) {
  if (static_outcome.verdict == Verdict::tool_error)
    throw ToolError("static check of " + static_outcome.program_id + ": " + static_outcome.detail);
  for (const auto& d : dynamic_outcomes)
    if (d.verdict == Verdict::tool_error)
      throw ToolError("dynamic check of " + d.program_id + ": " + d.detail);
  if (static_outcome.verdict != Verdict::pass) return ProgramStatus::statically_invalid;
  for (const auto& d : dynamic_outcomes)
    if (d.verdict != Verdict::pass) return ProgramStatus::dynamically_invalid;
  return ProgramStatus::valid;
}

}  // namespace refuzz
