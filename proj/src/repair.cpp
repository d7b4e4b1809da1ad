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

#include "refuzz/repair.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "refuzz/hash.hpp"

namespace refuzz {
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

std::int64_t elapsed_ms(Clock::time_point since) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - since).count();
}

void write_file(const fs::path& p, std::string_view text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("cannot write " + p.string());
}

std::string_view trim_trailing_newlines(std::string_view s) {
  while (!s.empty() && s.back() == '\n') s.remove_suffix(1);
  return s;
}

struct Check {
  std::vector<ValidationOutcome> outcomes;  // static first
  ProgramStatus status = ProgramStatus::raw;

  const ValidationOutcome* first_failure() const {
    for (const auto& o : outcomes)
      if (o.verdict != Verdict::pass) return &o;
    return nullptr;
  }

  std::string outcome_ref() const {
    if (const auto* f = first_failure()) return f->id;
    return outcomes.empty() ? std::string() : outcomes.back().id;
  }

  std::string failure_log() const {
    std::string log;
    for (const auto& o : outcomes) {
      if (o.verdict == Verdict::pass) continue;
      if (!o.error_log.verbatim.empty()) {
        log += o.error_log.verbatim;
        if (log.back() != '\n') log += '\n';
      } else {
        log += std::string("[") + to_string(o.phase) + "] " + to_string(o.verdict) + "\n";
      }
    }
    return log;
  }
};

Check run_checks(ProgramValidator& validator, const ProgramSource& program) {
  Check c;
  c.outcomes.push_back(validator.check_static(program));
  std::vector<ValidationOutcome> dynamic;
  if (c.outcomes.front().verdict == Verdict::pass) dynamic = validator.check_dynamic(program);
  c.status = classify(c.outcomes.front(), dynamic);
  c.outcomes.insert(c.outcomes.end(), dynamic.begin(), dynamic.end());
  return c;
}

std::optional<Verdict> dynamic_verdict(const Check& c) {
  if (c.outcomes.size() < 2) return std::nullopt;
  for (std::size_t i = 1; i < c.outcomes.size(); ++i)
    if (c.outcomes[i].verdict != Verdict::pass) return c.outcomes[i].verdict;
  return Verdict::pass;
}

std::string source_file_name(Language l) { return l == Language::cpp ? "candidate.cpp" : "candidate.c"; }

}  // namespace

void RepairPolicy::validate() const {
  if (max_attempts < 1) throw std::invalid_argument("repair.max_attempts must be at least 1");
  if (opt_level_arg.empty()) throw std::invalid_argument("repair.opt_level_arg must not be empty");
}

std::string build_prompt(std::string_view source, std::string_view log, ErrorClass error_class,
                         std::string_view opt_level_arg) {
  if (source.empty()) throw std::invalid_argument("cannot build a repair prompt for an empty program");
  std::string out = "Given the following C program and its compilation error log with ";
  out += opt_level_arg;
  out += " optimisation level, analyze and correct the program to resolve ";
  out += error_class == ErrorClass::compilation_errors ? "compilation errors" : "sanitizer errors";
  out += ".\n";
  out += source;
  if (out.back() != '\n') out += '\n';
  out += kErrorLogDelimiter;
  out += '\n';
  out += log;
  return out;
}

std::optional<std::string> program_section(std::string_view prompt) {
  auto start = prompt.find('\n');
  if (start == std::string_view::npos) return std::nullopt;
  std::string marker = "\n" + std::string(kErrorLogDelimiter) + "\n";
  auto end = prompt.find(marker, start);
  if (end == std::string_view::npos) return std::nullopt;
  return std::string(trim_trailing_newlines(prompt.substr(start + 1, end - start)));
}

std::string cassette_key(std::string_view source) { return sha256_hex(trim_trailing_newlines(source)); }

RepairTrace refuzz_one(RepairContext& ctx, const std::string& program_id) {
  const auto started = Clock::now();
  CorpusStore& store = ctx.store;
  auto program = store.find(program_id);
  if (!program) throw CorpusError("unknown program id " + program_id);
  if (is_terminal(program->status))
    throw std::invalid_argument("program " + program_id + " is already " + to_string(program->status));

  const fs::path traces_root = ctx.traces_dir.empty() ? store.root() / "traces" : ctx.traces_dir;
  const fs::path trace_dir = traces_root / program_id;
  const std::string original = store.read_source(program_id);
  write_file(trace_dir / (program->language == Language::cpp ? "original.cpp" : "original.c"), original);

  RepairTrace trace;
  trace.program_id = program_id;
  trace.final_status = program->status;
  ProgramSource working{program_id, program->language, original};

  auto settle = [&](const Check& c) {
    if (c.status == ProgramStatus::valid && working.text != original) store.replace_source(program_id, working.text);
    store.transition(program_id, c.status, c.outcome_ref());
    trace.final_status = c.status;
  };

  try {
    Check check = run_checks(ctx.validator, working);
    trace.initial_status = check.status;
    trace.initial_outcomes = check.outcomes;
    settle(check);

    int used = program->repair_attempts;
    while (check.status != ProgramStatus::valid) {
      if (used >= ctx.policy.max_attempts) {
        store.transition(program_id, ProgramStatus::crash_only, check.outcome_ref());
        trace.final_status = ProgramStatus::crash_only;
        break;
      }
      const auto attempt_started = Clock::now();
      RepairAttempt attempt;
      attempt.error_class = check.status == ProgramStatus::statically_invalid ? ErrorClass::compilation_errors
                                                                              : ErrorClass::sanitizer_errors;
      attempt.prompt = build_prompt(working.text, check.failure_log(), attempt.error_class, ctx.policy.opt_level_arg);
      attempt.prompt_over_budget = attempt.prompt.size() > ctx.model_config.max_prompt_bytes;
      CompletionResponse response = ctx.model.complete({attempt.prompt, ctx.model_config});

      store.record_attempt(program_id);
      attempt.attempt_index = ++used;
      const fs::path attempt_dir = trace_dir / ("attempt-" + std::to_string(attempt.attempt_index));
      write_file(attempt_dir / "prompt.txt", attempt.prompt);
      write_file(attempt_dir / "response.txt", response.text);
      attempt.response_ref = fs::relative(attempt_dir / "response.txt", store.root()).generic_string();

      if (auto candidate = extract_code(response.text); candidate && !candidate->empty()) {
        attempt.extracted = true;
        if (candidate->back() != '\n') candidate->push_back('\n');
        write_file(attempt_dir / source_file_name(working.language), *candidate);
        working.text = std::move(*candidate);
        check = run_checks(ctx.validator, working);
        attempt.outcomes = check.outcomes;
        attempt.reverify_static = check.outcomes.front().verdict;
        attempt.reverify_dynamic = dynamic_verdict(check);
        settle(check);
      }
      write_file(attempt_dir / "outcomes.json", nlohmann::json(attempt.outcomes).dump(2));
      attempt.wall_time_ms = elapsed_ms(attempt_started);
      trace.attempts.push_back(std::move(attempt));
    }
  } catch (const ToolError& e) {
    trace.incomplete = true;
    trace.incomplete_reason = std::string("tool error: ") + e.what();
  } catch (const TransportError& e) {
    trace.incomplete = true;
    trace.incomplete_reason = std::string("model unavailable: ") + e.what();
  } catch (const ProtocolError& e) {
    trace.incomplete = true;
    trace.incomplete_reason = std::string("model protocol error: ") + e.what();
  }
  if (trace.incomplete) {
    if (auto now = store.find(program_id)) trace.final_status = now->status;
  }
  trace.total_time_ms = elapsed_ms(started);
  write_file(trace_dir / "trace.json", nlohmann::json(trace).dump(2));
  return trace;
}

CampaignResult refuzz_corpus(RepairContext& ctx, int workers) {
  ctx.policy.validate();
  if (ctx.store.options().max_attempts != ctx.policy.max_attempts)
    throw std::invalid_argument("corpus attempt bound " + std::to_string(ctx.store.options().max_attempts) +
                                " differs from repair policy " + std::to_string(ctx.policy.max_attempts));

  CampaignResult result;
  std::vector<std::string> pending;
  for (const auto& p : ctx.store.programs()) {
    ++result.total;
    if (p.status == ProgramStatus::valid) ++result.pre_valid;
    else if (!is_terminal(p.status)) pending.push_back(p.id);
  }

  result.traces.resize(pending.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < pending.size(); i = next++) {
      try {
        result.traces[i] = refuzz_one(ctx, pending[i]);
      } catch (const std::exception& e) {
        RepairTrace& t = result.traces[i];
        t.program_id = pending[i];
        t.incomplete = true;
        t.incomplete_reason = e.what();
        if (auto p = ctx.store.find(pending[i])) t.final_status = p->status;
      }
    }
  };
  const std::size_t n = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), 1,
                                                std::max<std::size_t>(pending.size(), 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t k = 1; k < n; ++k) pool.emplace_back(work);
    work();
  }

  result.stats = compute_stats(result.traces, result.pre_valid, result.total);
  write_file(ctx.store.root() / "stats.json", nlohmann::json(result.stats).dump(2) + "\n");
  return result;
}

}  // namespace refuzz
