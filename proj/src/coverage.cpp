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

#include "refuzz/coverage.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace refuzz {
namespace {

constexpr const char* kUndefined = "—";

std::optional<std::uint64_t> parse_count(std::string_view s) {
  std::uint64_t v = 0;
  if (s.empty()) return std::nullopt;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

class LcovParser {
 public:
  explicit LcovParser(std::vector<LcovWarning>* warnings) : warnings_(warnings) {}

  void line(std::size_t no, std::string_view text) {
    no_ = no;
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    if (trim(text).empty()) return;
    if (text == "end_of_record") {
      if (!cur_) warn("end_of_record outside a record");
      else finish();
      return;
    }
    auto colon = text.find(':');
    if (colon == std::string_view::npos) {
      warn("unrecognised line");
      return;
    }
    std::string_view tag = text.substr(0, colon);
    std::string_view value = text.substr(colon + 1);
    if (tag == "SF") {
      if (cur_) {
        warn("SF before end_of_record; closing the previous record");
        finish();
      }
      cur_.emplace();
      cur_->source_path = std::string(value);
      return;
    }
    if (tag != "FN" && tag != "FNDA" && tag != "FNF" && tag != "FNH") return;
    if (!cur_) {
      warn(std::string(tag) + " record outside SF");
      return;
    }
    if (tag == "FN") fn(value);
    else if (tag == "FNDA") fnda(value);
    else {
      auto n = parse_count(value);
      if (!n) warn("bad " + std::string(tag) + " count");
      else if (tag == "FNF") fnf_ = n;
      else fnh_ = n;
    }
  }

  Tracefile finish_all() {
    if (cur_) {
      warn("missing end_of_record at end of input");
      finish();
    }
    return std::move(trace_);
  }

 private:
  void warn(std::string message) {
    if (warnings_) warnings_->push_back({no_, std::move(message)});
  }

  void fn(std::string_view value) {
    auto comma = value.find(',');
    auto start = comma == std::string_view::npos ? std::nullopt : parse_count(value.substr(0, comma));
    if (!start) {
      warn("malformed FN record");
      return;
    }
    std::string_view rest = value.substr(comma + 1);
    std::optional<std::uint64_t> end;
    if (auto c2 = rest.find(','); c2 != std::string_view::npos) {
      if (auto e = parse_count(rest.substr(0, c2))) {
        end = e;
        rest = rest.substr(c2 + 1);
      }
    }
    if (rest.empty()) {
      warn("FN record without a function name");
      return;
    }
    auto& f = cur_->functions[std::string(rest)];
    f.line = start;
    f.end_line = end;
  }

  void fnda(std::string_view value) {
    auto comma = value.find(',');
    auto count = comma == std::string_view::npos ? std::nullopt : parse_count(value.substr(0, comma));
    if (!count || comma + 1 >= value.size()) {
      warn("malformed FNDA record");
      return;
    }
    auto& f = cur_->functions[std::string(value.substr(comma + 1))];
    f.hits = f.hits.value_or(0) + *count;
  }

  void finish() {
    FileCoverage& c = *cur_;
    if (fnf_) {
      c.functions_found = *fnf_;
    } else {
      c.functions_found = c.functions.size();
    }
    if (fnh_) {
      c.functions_hit = *fnh_;
    } else {
      c.functions_hit = static_cast<std::uint64_t>(std::count_if(
          c.functions.begin(), c.functions.end(), [](const auto& kv) { return kv.second.hits.value_or(0) > 0; }));
    }
    if (c.functions_hit > c.functions_found) {
      warn("functions hit exceeds functions found in " + c.source_path + "; clamping");
      c.functions_hit = c.functions_found;
    }
    trace_.records.push_back(std::move(c));
    cur_.reset();
    fnf_.reset();
    fnh_.reset();
  }

  std::vector<LcovWarning>* warnings_;
  std::size_t no_ = 0;
  Tracefile trace_;
  std::optional<FileCoverage> cur_;
  std::optional<std::uint64_t> fnf_, fnh_;
};

std::vector<std::string> columns_for(std::span<const LabeledDelta> deltas) {
  std::vector<std::string> names;
  for (const auto& d : deltas)
    for (const auto& r : d.table.rows)
      if (std::find(names.begin(), names.end(), r.component) == names.end()) names.push_back(r.component);
  return names;
}

nlohmann::json tenths_json(std::optional<std::int64_t> t) {
  return t ? nlohmann::json(static_cast<double>(*t) / 10.0) : nlohmann::json(nullptr);
}

// Columns taken by UTF-8 text, one per code point.
std::size_t display_width(const std::string& s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string aligned(const std::vector<std::vector<std::string>>& table) {
  std::vector<std::size_t> width;
  for (const auto& row : table) {
    width.resize(std::max(width.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], display_width(row[c]));
  }
  std::string out;
  for (const auto& row : table) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += "  ";
      std::string fill(width[c] - display_width(row[c]), ' ');
      line += c == 0 ? row[c] + fill : fill + row[c];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

std::string markdown(const std::vector<std::vector<std::string>>& table) {
  std::string out;
  for (std::size_t r = 0; r < table.size(); ++r) {
    out += "|";
    for (const auto& cell : table[r]) out += " " + cell + " |";
    out += "\n";
    if (r == 0) {
      out += "|---|";
      for (std::size_t c = 1; c < table[r].size(); ++c) out += "---:|";
      out += "\n";
    }
  }
  return out;
}

}  // namespace

std::uint64_t Tracefile::functions_found() const {
  std::uint64_t n = 0;
  for (const auto& r : records) n += r.functions_found;
  return n;
}

std::uint64_t Tracefile::functions_hit() const {
  std::uint64_t n = 0;
  for (const auto& r : records) n += r.functions_hit;
  return n;
}

Tracefile parse_lcov(std::string_view text, std::vector<LcovWarning>* warnings) {
  LcovParser parser(warnings);
  std::size_t no = 0, pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    parser.line(++no, text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return parser.finish_all();
}

std::string render_lcov(const Tracefile& trace) {
  std::ostringstream out;
  for (const auto& r : trace.records) {
    out << "SF:" << r.source_path << "\n";
    for (const auto& [name, f] : r.functions) {
      if (!f.line) continue;
      out << "FN:" << *f.line;
      if (f.end_line) out << "," << *f.end_line;
      out << "," << name << "\n";
    }
    for (const auto& [name, f] : r.functions)
      if (f.hits) out << "FNDA:" << *f.hits << "," << name << "\n";
    out << "FNF:" << r.functions_found << "\nFNH:" << r.functions_hit << "\nend_of_record\n";
  }
  return out.str();
}

ComponentMap ComponentMap::llvm_default() {
  return ComponentMap({
      {"*/clang/lib/Parse/*", "Frontend (Parser)"},
      {"*/clang/lib/Lex/*", "Frontend (Parser)"},
      {"*/clang/lib/Sema/*", "AST & Semantics"},
      {"*/clang/lib/AST/*", "AST & Semantics"},
      {"*/clang/lib/CodeGen/*", "IR Generation"},
      {"*/llvm/lib/Transforms/Scalar/LoopUnroll*", "Loop Opt."},
      {"*/llvm/lib/Transforms/Utils/LoopUnroll*", "Loop Opt."},
      {"*/llvm/lib/Transforms/Scalar/LICM*", "Loop Opt."},
      {"*/llvm/lib/Transforms/Scalar/Loop*", "Loop Opt."},
      {"*/llvm/lib/Transforms/Vectorize/*", "Vectorization"},
      {"*/llvm/lib/Transforms/IPO/Inliner*", "Inlining"},
      {"*/llvm/lib/Transforms/IPO/AlwaysInliner*", "Inlining"},
      {"*/llvm/lib/Transforms/Utils/InlineFunction*", "Inlining"},
      {"*/llvm/lib/Transforms/Scalar/DCE*", "DCE"},
      {"*/llvm/lib/Transforms/Scalar/ADCE*", "DCE"},
      {"*/llvm/lib/Transforms/IPO/GlobalDCE*", "DCE"},
      {"*/llvm/lib/Transforms/IPO/DeadArgumentElimination*", "DCE"},
      {"*/llvm/lib/Transforms/*", "Opt. Passes"},
      {"*/llvm/lib/CodeGen/*", "Backend Code Gen."},
      {"*/llvm/lib/Target/*", "Backend Code Gen."},
  });
}

ComponentMap ComponentMap::parse(std::string_view text) {
  std::vector<ComponentRule> rules;
  std::size_t no = 0, pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    ++no;
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("component map line " + std::to_string(no) + ": expected `glob = component`");
    std::string_view glob = trim(line.substr(0, eq));
    std::string_view component = trim(line.substr(eq + 1));
    if (glob.empty() || component.empty())
      throw std::invalid_argument("component map line " + std::to_string(no) + ": empty glob or component");
    rules.push_back({std::string(glob), std::string(component)});
  }
  return ComponentMap(std::move(rules));
}

ComponentMap ComponentMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read component map " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string ComponentMap::component_for(std::string_view path) const {
  const std::string p(path);
  const std::string rooted = p.empty() || p.front() != '/' ? "/" + p : p;
  for (const auto& r : rules_)
    if (fnmatch(r.glob.c_str(), p.c_str(), 0) == 0 || fnmatch(r.glob.c_str(), rooted.c_str(), 0) == 0)
      return r.component;
  return std::string(kOtherComponent);
}

std::vector<std::string> ComponentMap::components() const {
  std::vector<std::string> out;
  for (const auto& r : rules_)
    if (std::find(out.begin(), out.end(), r.component) == out.end()) out.push_back(r.component);
  return out;
}

std::optional<double> ComponentRow::percent() const {
  if (!percent_tenths) return std::nullopt;
  return static_cast<double>(*percent_tenths) / 10.0;
}

const ComponentRow* CoverageTable::find(std::string_view component) const {
  for (const auto& r : rows)
    if (r.component == component) return &r;
  return nullptr;
}

std::uint64_t CoverageTable::functions_found() const {
  std::uint64_t n = 0;
  for (const auto& r : rows) n += r.functions_found;
  return n;
}

ComponentRow make_row(std::string component, std::uint64_t found, std::uint64_t hit) {
  return {std::move(component), found, hit, percent_tenths(hit, found)};
}

CoverageTable component_table(const Tracefile& trace, const ComponentMap& map) {
  std::vector<std::string> names = map.components();
  std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> sums;
  bool fell_through = false;
  for (const auto& rec : trace.records) {
    std::string c = map.component_for(rec.source_path);
    if (c == kOtherComponent) fell_through = true;
    sums[c].first += rec.functions_found;
    sums[c].second += rec.functions_hit;
  }
  if (fell_through && std::find(names.begin(), names.end(), kOtherComponent) == names.end())
    names.emplace_back(kOtherComponent);
  CoverageTable table;
  for (const auto& n : names) {
    auto [found, hit] = sums[n];
    table.rows.push_back(make_row(n, found, hit));
  }
  return table;
}

const char* to_string(DeltaFlag f) {
  switch (f) {
    case DeltaFlag::ok: return "ok";
    case DeltaFlag::undefined_percent: return "undefined_percent";
    case DeltaFlag::missing_before: return "missing_before";
    case DeltaFlag::missing_after: return "missing_after";
  }
  return "ok";
}

const DeltaRow* DeltaTable::find(std::string_view component) const {
  for (const auto& r : rows)
    if (r.component == component) return &r;
  return nullptr;
}

DeltaTable delta(const CoverageTable& before, const CoverageTable& after) {
  DeltaTable out;
  for (const auto& b : before.rows) {
    DeltaRow row{b.component, b.percent_tenths, std::nullopt, std::nullopt, DeltaFlag::ok};
    const ComponentRow* a = after.find(b.component);
    if (!a) {
      row.flag = DeltaFlag::missing_after;
    } else {
      row.after_tenths = a->percent_tenths;
      if (row.before_tenths && row.after_tenths) row.delta_tenths = *row.after_tenths - *row.before_tenths;
      else row.flag = DeltaFlag::undefined_percent;
    }
    out.rows.push_back(std::move(row));
  }
  for (const auto& a : after.rows)
    if (!before.find(a.component))
      out.rows.push_back({a.component, std::nullopt, a.percent_tenths, std::nullopt, DeltaFlag::missing_before});
  return out;
}

std::string format_tenths(std::optional<std::int64_t> tenths) {
  if (!tenths) return kUndefined;
  std::int64_t v = *tenths;
  std::string sign = v < 0 ? "-" : "";
  if (v < 0) v = -v;
  return sign + std::to_string(v / 10) + "." + std::to_string(v % 10);
}

std::string format_signed_tenths(std::optional<std::int64_t> tenths) {
  if (!tenths) return kUndefined;
  if (*tenths > 0) return "+" + format_tenths(tenths);
  return format_tenths(tenths);
}

std::string render(const CoverageTable& table, Format format) {
  if (format == Format::json) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : table.rows)
      rows.push_back({{"component", r.component},
                      {"functions_found", r.functions_found},
                      {"functions_hit", r.functions_hit},
                      {"percent", tenths_json(r.percent_tenths)}});
    return rows.dump(2) + "\n";
  }
  std::vector<std::vector<std::string>> cells{{"Component", "Found", "Hit", "Coverage (%)"}};
  for (const auto& r : table.rows)
    cells.push_back({r.component, std::to_string(r.functions_found), std::to_string(r.functions_hit),
                     format_tenths(r.percent_tenths)});
  return format == Format::markdown ? markdown(cells) : aligned(cells);
}

std::string render(std::span<const LabeledDelta> deltas, Format format) {
  if (format == Format::json) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& d : deltas) {
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& r : d.table.rows)
        rows.push_back({{"component", r.component},
                        {"before", tenths_json(r.before_tenths)},
                        {"after", tenths_json(r.after_tenths)},
                        {"delta", tenths_json(r.delta_tenths)},
                        {"flag", to_string(r.flag)}});
      out.push_back({{"label", d.label}, {"rows", rows}});
    }
    return out.dump(2) + "\n";
  }
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"Component"};
  for (const auto& d : deltas) {
    std::string prefix = d.label.empty() ? "" : d.label + " ";
    header.push_back(prefix + "(B)");
    header.push_back(prefix + "(A)");
    header.push_back(prefix + "Δ");
  }
  cells.push_back(header);
  for (const auto& name : columns_for(deltas)) {
    std::vector<std::string> row{name};
    for (const auto& d : deltas) {
      const DeltaRow* r = d.table.find(name);
      row.push_back(format_tenths(r ? r->before_tenths : std::nullopt));
      row.push_back(format_tenths(r ? r->after_tenths : std::nullopt));
      row.push_back(format_signed_tenths(r ? r->delta_tenths : std::nullopt));
    }
    cells.push_back(row);
  }
  return format == Format::markdown ? markdown(cells) : aligned(cells);
}

}  // namespace refuzz
