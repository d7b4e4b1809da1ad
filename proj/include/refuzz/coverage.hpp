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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "refuzz/report.hpp"

namespace refuzz {

struct FunctionRecord {
  std::optional<std::uint64_t> line;      ///< from FN
  std::optional<std::uint64_t> end_line;  ///< lcov 2.x FN:start,end,name
  std::optional<std::uint64_t> hits;      ///< from FNDA

  bool operator==(const FunctionRecord&) const = default;
};

struct FileCoverage {
  std::string source_path;
  std::uint64_t functions_found = 0;
  std::uint64_t functions_hit = 0;
  std::map<std::string, FunctionRecord> functions;

  bool operator==(const FileCoverage&) const = default;
};

struct Tracefile {
  std::vector<FileCoverage> records;

  std::uint64_t functions_found() const;
  std::uint64_t functions_hit() const;
  bool operator==(const Tracefile&) const = default;
};

struct LcovWarning {
  std::size_t line = 0;  ///< 1-based
  std::string message;
};

/// SF/FN/FNDA/FNF/FNH/end_of_record. FNF and FNH win when present;
/// otherwise counts are derived from the function records. Other record
/// types are ignored. Malformed lines are reported and skipped.
Tracefile parse_lcov(std::string_view text, std::vector<LcovWarning>* warnings = nullptr);

/// Function records only; FNF and FNH are always written.
std::string render_lcov(const Tracefile& trace);

inline constexpr std::string_view kOtherComponent = "other";

struct ComponentRule {
  std::string glob;
  std::string component;
};

// First matching rule wins. Globs use fnmatch(3) without FNM_PATHNAME, so
// `*` crosses directory separators; a relative path is also tried with a
// leading '/'.
class ComponentMap {
 public:
  ComponentMap() = default;
  explicit ComponentMap(std::vector<ComponentRule> rules) : rules_(std::move(rules)) {}

  /// Rules for an LLVM/Clang source tree.
  static ComponentMap llvm_default();
  /// `glob = component` lines; `#` comments and blank lines skipped.
  static ComponentMap parse(std::string_view text);
  static ComponentMap load(const std::filesystem::path& path);

  std::string component_for(std::string_view path) const;
  /// Components in rule order, each once.
  std::vector<std::string> components() const;
  const std::vector<ComponentRule>& rules() const { return rules_; }

 private:
  std::vector<ComponentRule> rules_;
};

struct ComponentRow {
  std::string component;
  std::uint64_t functions_found = 0;
  std::uint64_t functions_hit = 0;
  /// Absent when nothing was found.
  std::optional<std::int64_t> percent_tenths;

  std::optional<double> percent() const;
  bool operator==(const ComponentRow&) const = default;
};

struct CoverageTable {
  /// Every mapped component in rule order, then "other" if anything fell through.
  std::vector<ComponentRow> rows;

  const ComponentRow* find(std::string_view component) const;
  std::uint64_t functions_found() const;
};

CoverageTable component_table(const Tracefile& trace, const ComponentMap& map);

/// Builds a row with the given counts.
ComponentRow make_row(std::string component, std::uint64_t found, std::uint64_t hit);

enum class DeltaFlag { ok, undefined_percent, missing_before, missing_after };

const char* to_string(DeltaFlag f);

struct DeltaRow {
  std::string component;
  std::optional<std::int64_t> before_tenths;
  std::optional<std::int64_t> after_tenths;
  std::optional<std::int64_t> delta_tenths;
  DeltaFlag flag = DeltaFlag::ok;
};

struct DeltaTable {
  std::vector<DeltaRow> rows;

  const DeltaRow* find(std::string_view component) const;
};

/// after - before per component, in the order of `before` then any
/// components only `after` has.
DeltaTable delta(const CoverageTable& before, const CoverageTable& after);

/// "+21.2", "-0.4", "0.0", or the em dash for undefined.
std::string format_signed_tenths(std::optional<std::int64_t> tenths);
std::string format_tenths(std::optional<std::int64_t> tenths);

std::string render(const CoverageTable& table, Format format);

struct LabeledDelta {
  std::string label;
  DeltaTable table;
};

/// Component rows with a B / A / delta column group per campaign.
std::string render(std::span<const LabeledDelta> deltas, Format format);

}  // namespace refuzz
