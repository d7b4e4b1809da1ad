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

#include "refuzz/cli.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "refuzz/config.hpp"
#include "refuzz/corpus.hpp"
#include "refuzz/coverage.hpp"
#include "refuzz/generator.hpp"
#include "refuzz/repair.hpp"
#include "refuzz/report.hpp"

namespace refuzz {
namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Invocation {
  std::optional<fs::path> config_file;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::optional<std::string> opt_level;
  std::optional<std::string> prompt_opt_level;
  std::vector<std::string> sets;
  bool print_config = false;
  std::string format = "text";

  std::string origin = "external";
  std::vector<std::string> inputs;
  std::string before, after, trace, label;
};

void setting(CLI::App* app, Invocation& inv, const std::string& flag, std::string key, const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&inv, key = std::move(key)](const std::string& v) { inv.overrides.emplace_back(key, v); }, help);
}

void add_common(CLI::App* app, Invocation& inv, bool corpus = true) {
  app->add_option("--config", inv.config_file, "key=value configuration file");
  app->add_option("--set", inv.sets, "Override one setting, KEY=VALUE (repeatable)");
  app->add_flag("--print-config", inv.print_config, "Print the effective configuration and exit");
  app->add_option("--format", inv.format, "Output format")
      ->check(CLI::IsMember({"text", "json", "markdown", "md"}));
  if (corpus) setting(app, inv, "--corpus", "corpus.root", "Corpus root directory");
}

void add_toolchain(CLI::App* app, Invocation& inv) {
  setting(app, inv, "--compiler", "toolchain.compiler", "C compiler");
  setting(app, inv, "--cxx-compiler", "toolchain.cxx_compiler", "C++ compiler");
  app->add_option("--opt-level", inv.opt_level, "Optimisation level for checking, e.g. -O0");
  setting(app, inv, "--timeout", "toolchain.timeout_s", "Per-process timeout in seconds");
  setting(app, inv, "--mem-limit", "toolchain.memory_limit", "Per-process memory limit, e.g. 16G");
  setting(app, inv, "--sanitizers", "toolchain.sanitizers",
          "Comma list of address_undefined, memory, thread");
  setting(app, inv, "--determinism-runs", "toolchain.determinism_runs", "Runs per sanitizer profile");
  setting(app, inv, "--work-dir", "toolchain.work_dir", "Scratch directory for validation runs");
}

void add_model(CLI::App* app, Invocation& inv) {
  setting(app, inv, "--backend", "model.backend", "live or mock");
  setting(app, inv, "--cassette", "model.cassette", "Recorded responses for the mock backend");
  setting(app, inv, "--endpoint", "model.endpoint", "Model server URL");
  setting(app, inv, "--model", "model.name", "Model name");
  setting(app, inv, "--temperature", "model.temperature", "Sampling temperature");
  setting(app, inv, "--max-in-flight", "model.max_in_flight", "Concurrent model requests");
  setting(app, inv, "--transport-retries", "model.transport_retries", "Retries of a failed request (0-2)");
}

// CLI11 reads "-O0" as a short flag, so glue optimisation levels onto
// their option before parsing.
std::vector<std::string> normalise(std::vector<std::string> args) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if ((args[i] == "--opt-level" || args[i] == "--prompt-opt-level") && i + 1 < args.size() &&
        args[i + 1].rfind("-O", 0) == 0) {
      out.push_back(args[i] + "=" + args[i + 1]);
      ++i;
    } else {
      out.push_back(args[i]);
    }
  }
  return out;
}

Config load_config(const Invocation& inv) {
  Config cfg;
  if (inv.config_file) apply_config_file(cfg, *inv.config_file);
  apply_environment(cfg);
  for (const auto& [key, value] : inv.overrides) apply_setting(cfg, key, value);
  for (const auto& kv : inv.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (inv.opt_level) {
    apply_setting(cfg, "toolchain.opt_level", *inv.opt_level);
    apply_setting(cfg, "repair.opt_level_arg", *inv.opt_level);
  }
  if (inv.prompt_opt_level) apply_setting(cfg, "repair.opt_level_arg", *inv.prompt_opt_level);
  cfg.validate();
  return cfg;
}

Format format_of(const Invocation& inv) { return format_from_string(inv.format).value_or(Format::text); }

CorpusOptions corpus_options(const Config& cfg) {
  CorpusOptions o;
  o.max_file_bytes = cfg.max_file_bytes;
  o.max_attempts = cfg.repair.max_attempts;
  return o;
}

std::unique_ptr<LanguageModel> make_model(const Config& cfg) {
  if (cfg.backend == BackendChoice::live) return std::make_unique<OllamaModel>(cfg.model.max_in_flight);
  auto mock = std::make_unique<MockModel>();
  mock->load_cassette(cfg.cassette);
  mock->set_key_fn([](std::string_view prompt) { return program_section(prompt); });
  return mock;
}

std::string render_counts(const std::map<ProgramStatus, std::size_t>& counts, std::size_t tool_errors, Format f) {
  const ProgramStatus order[] = {ProgramStatus::raw, ProgramStatus::statically_invalid,
                                 ProgramStatus::dynamically_invalid, ProgramStatus::valid, ProgramStatus::crash_only};
  auto count_of = [&](ProgramStatus s) {
    auto it = counts.find(s);
    return it == counts.end() ? std::size_t{0} : it->second;
  };
  std::size_t total = 0;
  for (auto s : order) total += count_of(s);
  if (f == Format::json) {
    nlohmann::json j{{"total", total}, {"tool_errors", tool_errors}};
    for (auto s : order) j["counts"][to_string(s)] = count_of(s);
    return j.dump(2) + "\n";
  }
  std::ostringstream out;
  if (f == Format::markdown) {
    out << "| Status | Programs |\n|---|---:|\n";
    for (auto s : order) out << "| " << to_string(s) << " | " << count_of(s) << " |\n";
    out << "| total | " << total << " |\n";
  } else {
    for (auto s : order) out << to_string(s) << " " << count_of(s) << "\n";
    out << "total " << total << "\n";
  }
  out << (f == Format::markdown ? "\nTool errors: " : "tool errors ") << tool_errors << "\n";
  return out.str();
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> out;
  for (const auto& in : inputs) {
    fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p))
        if (e.is_regular_file()) found.push_back(e.path());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

int cmd_ingest(const Config& cfg, const Invocation& inv, std::ostream& out, std::ostream& err) {
  auto origin = origin_from_string(inv.origin);
  if (!origin) throw UsageError("unknown origin '" + inv.origin + "'");
  CorpusStore store(cfg.corpus_root, corpus_options(cfg));
  auto paths = expand_inputs(inv.inputs);
  IngestResult r = store.ingest(paths, *origin);
  for (const auto& e : r.errors) err << "refuzz: skipped " << e.path.string() << ": " << e.reason << "\n";
  std::size_t duplicates = std::count_if(r.programs.begin(), r.programs.end(),
                                         [](const TestProgram& p) { return p.duplicate_of.has_value(); });
  if (format_of(inv) == Format::json) {
    nlohmann::json ids = nlohmann::json::array();
    for (const auto& p : r.programs) ids.push_back(p.id);
    out << nlohmann::json{{"ingested", ids}, {"duplicates", duplicates}, {"errors", r.errors.size()}}.dump(2) << "\n";
  } else {
    out << "ingested " << r.programs.size() << " programs (" << duplicates << " duplicates), " << r.errors.size()
        << " skipped\n";
  }
  return r.errors.empty() ? kExitOk : kExitToolErrors;
}

int cmd_generate(const Config& cfg, const Invocation& inv, std::ostream& out, std::ostream&) {
  GenSpec spec;
  spec.keyword_pool = load_keywords(cfg.keywords_file);
  spec.keywords_per_prompt = cfg.keywords_per_prompt;
  spec.count = cfg.generate_count;
  spec.seed = cfg.seed;
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  CorpusStore store(cfg.corpus_root, corpus_options(cfg));
  auto model = make_model(cfg);
  GenerationResult r = generate(spec, *model, cfg.model, store);
  if (format_of(inv) == Format::json) {
    out << nlohmann::json{{"ingested", r.programs.size()},
                          {"extraction_failures", r.extraction_failures},
                          {"transport_errors", r.transport_errors},
                          {"ingest_errors", r.ingest_errors}}
               .dump(2)
        << "\n";
  } else {
    out << "generated " << r.programs.size() << " programs; " << r.extraction_failures
        << " responses without code; " << r.transport_errors << " transport errors\n";
  }
  return r.transport_errors + r.ingest_errors > 0 ? kExitToolErrors : kExitOk;
}

int cmd_validate(const Config& cfg, const Invocation& inv, std::ostream& out, std::ostream& err) {
  CorpusStore store(cfg.corpus_root, corpus_options(cfg));
  ToolchainValidator validator(cfg.effective_toolchain());
  std::size_t tool_errors = 0;
  for (const auto& p : store.programs()) {
    if (is_terminal(p.status)) continue;
    ProgramSource source{p.id, p.language, store.read_source(p.id)};
    try {
      ValidationOutcome st = validator.check_static(source);
      std::vector<ValidationOutcome> dyn;
      if (st.verdict == Verdict::pass) dyn = validator.check_dynamic(source);
      ProgramStatus status = classify(st, dyn);
      std::string ref = st.id;
      for (const auto& d : dyn)
        if (d.verdict != Verdict::pass) {
          ref = d.id;
          break;
        }
      store.transition(p.id, status, ref);
    } catch (const ToolError& e) {
      ++tool_errors;
      err << "refuzz: " << e.what() << "\n";
    }
  }
  out << render_counts(store.counts(), tool_errors, format_of(inv));
  return tool_errors ? kExitToolErrors : kExitOk;
}

int cmd_refuzz(const Config& cfg, const Invocation& inv, std::ostream& out, std::ostream& err) {
  CorpusStore store(cfg.corpus_root, corpus_options(cfg));
  ToolchainValidator validator(cfg.effective_toolchain());
  auto model = make_model(cfg);
  RepairContext ctx{store, validator, *model, cfg.model, cfg.repair, {}};
  int workers = cfg.effective_workers();
  if (cfg.workers == 0) workers = std::min(workers, cfg.model.max_in_flight);
  CampaignResult result = refuzz_corpus(ctx, workers);
  for (const auto& t : result.traces)
    if (t.incomplete) err << "refuzz: " << t.program_id << " incomplete: " << t.incomplete_reason << "\n";
  out << render(result.stats, format_of(inv));
  return result.stats.tool_errors ? kExitToolErrors : kExitOk;
}

int cmd_stats(const Config& cfg, const Invocation& inv, std::ostream& out, std::ostream& err) {
  CorpusStore store(cfg.corpus_root, corpus_options(cfg));
  const fs::path traces_dir = store.root() / "traces";
  std::vector<RepairTrace> traces;
  std::size_t pre_valid = 0;
  for (const auto& p : store.programs()) {
    const fs::path file = traces_dir / p.id / "trace.json";
    if (!fs::exists(file)) {
      if (p.status == ProgramStatus::valid) ++pre_valid;
      continue;
    }
    std::ifstream in(file);
    try {
      traces.push_back(nlohmann::json::parse(in).get<RepairTrace>());
    } catch (const std::exception& e) {
      err << "refuzz: unreadable trace " << file.string() << ": " << e.what() << "\n";
      return kExitToolErrors;
    }
  }
  out << render(compute_stats(traces, pre_valid, store.size()), format_of(inv));
  return kExitOk;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Tracefile load_trace(const std::string& path, std::ostream& err) {
  std::vector<LcovWarning> warnings;
  Tracefile t = parse_lcov(read_file(path), &warnings);
  for (const auto& w : warnings) err << path << ":" << w.line << ": warning: " << w.message << "\n";
  return t;
}

int cmd_coverage(const Config& cfg, const Invocation& inv, std::ostream& out, std::ostream& err) {
  ComponentMap map = cfg.component_map ? ComponentMap::load(*cfg.component_map) : ComponentMap::llvm_default();
  const Format f = format_of(inv);
  if (!inv.trace.empty()) {
    if (!inv.before.empty() || !inv.after.empty()) throw UsageError("--trace cannot be combined with --before/--after");
    out << render(component_table(load_trace(inv.trace, err), map), f);
    return kExitOk;
  }
  if (inv.before.empty() || inv.after.empty()) throw UsageError("coverage needs --trace, or both --before and --after");
  CoverageTable before = component_table(load_trace(inv.before, err), map);
  CoverageTable after = component_table(load_trace(inv.after, err), map);
  LabeledDelta d{inv.label, delta(before, after)};
  out << render(std::span<const LabeledDelta>(&d, 1), f);
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Validate and repair LLM-generated compiler test programs", "refuzz"};
  app.require_subcommand(0, 1);
  Invocation inv;

  auto* ingest = app.add_subcommand("ingest", "Add program files to a corpus");
  add_common(ingest, inv);
  ingest->add_option("--origin", inv.origin, "blackbox, fuzz4all, whitefox or external");
  ingest->add_option("inputs", inv.inputs, "Program files or directories")->required();

  auto* gen = app.add_subcommand("generate", "Generate programs from keyword prompts");
  add_common(gen, inv);
  add_model(gen, inv);
  setting(gen, inv, "--count", "generator.count", "Number of prompts");
  setting(gen, inv, "--seed", "generator.seed", "Keyword sampling seed");
  setting(gen, inv, "--keywords", "generator.keywords_file", "Keyword pool file");
  setting(gen, inv, "--keywords-per-prompt", "generator.keywords_per_prompt", "Keywords per prompt");

  auto* val = app.add_subcommand("validate", "Classify corpus programs without repairing them");
  add_common(val, inv);
  add_toolchain(val, inv);

  auto* ref = app.add_subcommand("refuzz", "Repair invalid corpus programs with the model");
  add_common(ref, inv);
  add_toolchain(ref, inv);
  add_model(ref, inv);
  setting(ref, inv, "--attempts", "repair.max_attempts", "Repair attempts per program");
  ref->add_option("--prompt-opt-level", inv.prompt_opt_level, "Optimisation level named in repair prompts");
  setting(ref, inv, "--workers", "corpus.workers", "Worker threads (default: logical cores)");

  auto* cov = app.add_subcommand("coverage", "Per-component function coverage from lcov tracefiles");
  add_common(cov, inv, false);
  cov->add_option("--before", inv.before, "Tracefile before refuzzing");
  cov->add_option("--after", inv.after, "Tracefile after refuzzing");
  cov->add_option("--trace", inv.trace, "Single tracefile to tabulate");
  cov->add_option("--label", inv.label, "Column label for the campaign");
  setting(cov, inv, "--map", "coverage.map", "Component map file (glob = component)");

  auto* st = app.add_subcommand("stats", "Campaign statistics from stored traces");
  add_common(st, inv);

  std::vector<std::string> args = normalise(raw_args);
  if (!args.empty()) args.erase(args.begin());
  std::reverse(args.begin(), args.end());  // CLI11 consumes a reversed vector

  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    const auto selected = app.get_subcommands();
    out << (selected.empty() ? app.help() : selected.back()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const auto selected = app.get_subcommands();
    err << "refuzz: " << e.what() << "\n" << (selected.empty() ? app.help() : selected.back()->help());
    return kExitUsage;
  }

  const auto selected = app.get_subcommands();
  if (selected.empty()) {
    err << "refuzz: a subcommand is required\n" << app.help();
    return kExitUsage;
  }
  CLI::App* cmd = selected.front();

  Config cfg;
  try {
    cfg = load_config(inv);
  } catch (const ConfigError& e) {
    err << "refuzz: " << e.what() << "\n" << cmd->help();
    return kExitUsage;
  }
  if (inv.print_config) {
    out << render_config(cfg);
    return kExitOk;
  }

  try {
    if (cmd == ingest) return cmd_ingest(cfg, inv, out, err);
    if (cmd == gen) return cmd_generate(cfg, inv, out, err);
    if (cmd == val) return cmd_validate(cfg, inv, out, err);
    if (cmd == ref) return cmd_refuzz(cfg, inv, out, err);
    if (cmd == cov) return cmd_coverage(cfg, inv, out, err);
    return cmd_stats(cfg, inv, out, err);
  } catch (const UsageError& e) {
    err << "refuzz: " << e.what() << "\n" << cmd->help();
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "refuzz: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "refuzz: " << e.what() << "\n";
    return kExitToolErrors;
  }
}

}  // namespace refuzz
