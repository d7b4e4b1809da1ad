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

#include "refuzz/report.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace refuzz {
namespace {

constexpr const char* kUndefined = "—";

std::string one_decimal(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::string rate_cell(const std::optional<double>& r) { return r ? one_decimal(*r) + "%" : kUndefined; }

std::string time_cell(const std::optional<double>& t) { return t ? one_decimal(*t) + " s" : kUndefined; }

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> read_optional(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<double>();
}

// Columns taken by UTF-8 text, one per code point.
std::size_t display_width(const std::string& s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string pad(std::string s, std::size_t width, bool right) {
  const std::size_t shown = display_width(s);
  if (shown >= width) return s;
  std::string fill(width - shown, ' ');
  return right ? fill + s : s + fill;
}

std::vector<std::string> row_cells(const StatsRow& row) {
  const auto& s = row.stats;
  return {row.label,
          "(" + std::to_string(s.valid_before) + ") " + rate_cell(s.rate_before),
          "(" + std::to_string(s.valid_after) + ") " + rate_cell(s.rate_after),
          std::to_string(s.total_tests),
          std::to_string(s.crash_only),
          std::to_string(s.tool_errors),
          time_cell(s.mean_time_per_test_s)};
}

const std::vector<std::string> kHeader{"Campaign", "B Valid", "A Valid", "# Tests", "CrashOnly", "Tool errors",
                                       "Time/Test"};

}  // namespace

CampaignStats compute_stats(std::span<const RepairTrace> traces, std::size_t pre_valid, std::size_t total) {
  if (traces.size() + pre_valid > total)
    throw std::invalid_argument("campaign total " + std::to_string(total) + " is smaller than traced + pre-valid");
  CampaignStats s;
  s.total_tests = total;
  s.valid_before = pre_valid;
  s.valid_after = pre_valid;
  std::uint64_t time_ms = 0;
  for (const auto& t : traces) {
    time_ms += static_cast<std::uint64_t>(std::max<std::int64_t>(t.total_time_ms, 0));
    if (t.initial_status == ProgramStatus::valid) ++s.valid_before;
    if (t.incomplete) ++s.tool_errors;
    else if (t.final_status == ProgramStatus::valid) ++s.valid_after;
    else ++s.crash_only;
  }
  s.crash_only += total - traces.size() - pre_valid;
  s.rate_before = percent_1dp(s.valid_before, total);
  s.rate_after = percent_1dp(s.valid_after, total);
  if (!traces.empty()) {
    const std::uint64_t n = traces.size();
    s.mean_time_per_test_s = static_cast<double>((2 * time_ms + 100 * n) / (200 * n)) / 10.0;
  }
  return s;
}

std::optional<Format> format_from_string(std::string_view s) {
  if (s == "text" || s == "txt") return Format::text;
  if (s == "json") return Format::json;
  if (s == "markdown" || s == "md") return Format::markdown;
  return std::nullopt;
}

void to_json(nlohmann::json& j, const CampaignStats& s) {
  j = nlohmann::json{{"total_tests", s.total_tests},
                     {"valid_before", s.valid_before},
                     {"valid_after", s.valid_after},
                     {"crash_only", s.crash_only},
                     {"tool_errors", s.tool_errors},
                     {"rate_before", optional_number(s.rate_before)},
                     {"rate_after", optional_number(s.rate_after)},
                     {"mean_time_per_test_s", optional_number(s.mean_time_per_test_s)}};
}

void from_json(const nlohmann::json& j, CampaignStats& s) {
  j.at("total_tests").get_to(s.total_tests);
  j.at("valid_before").get_to(s.valid_before);
  j.at("valid_after").get_to(s.valid_after);
  j.at("crash_only").get_to(s.crash_only);
  j.at("tool_errors").get_to(s.tool_errors);
  s.rate_before = read_optional(j, "rate_before");
  s.rate_after = read_optional(j, "rate_after");
  s.mean_time_per_test_s = read_optional(j, "mean_time_per_test_s");
}

std::string render(const CampaignStats& stats, Format format) {
  switch (format) {
    case Format::json: return nlohmann::json(stats).dump(2) + "\n";
    case Format::markdown: {
      StatsRow row{"campaign", stats};
      return render_rows(std::span<const StatsRow>(&row, 1), format);
    }
    case Format::text: break;
  }
  std::string out;
  auto line = [&](const char* label, const std::string& value) { out += pad(label, 16, false) + value + "\n"; };
  line("total tests", std::to_string(stats.total_tests));
  line("valid before", std::to_string(stats.valid_before) + " (" + rate_cell(stats.rate_before) + ")");
  line("valid after", std::to_string(stats.valid_after) + " (" + rate_cell(stats.rate_after) + ")");
  line("crash-only", std::to_string(stats.crash_only));
  line("tool errors", std::to_string(stats.tool_errors));
  line("time per test", time_cell(stats.mean_time_per_test_s));
  return out;
}

std::string render_rows(std::span<const StatsRow> rows, Format format) {
  if (format == Format::json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) arr.push_back({{"label", r.label}, {"stats", r.stats}});
    return arr.dump(2) + "\n";
  }
  std::vector<std::vector<std::string>> table{kHeader};
  for (const auto& r : rows) table.push_back(row_cells(r));

  std::string out;
  if (format == Format::markdown) {
    auto emit = [&](const std::vector<std::string>& cells) {
      out += "|";
      for (const auto& c : cells) out += " " + c + " |";
      out += "\n";
    };
    emit(table[0]);
    out += "|---|---:|---:|---:|---:|---:|---:|\n";
    for (std::size_t i = 1; i < table.size(); ++i) emit(table[i]);
    return out;
  }

  std::vector<std::size_t> width(kHeader.size(), 0);
  for (const auto& cells : table)
    for (std::size_t c = 0; c < cells.size(); ++c) width[c] = std::max(width[c], display_width(cells[c]));
  for (const auto& cells : table) {
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += "  ";
      out += pad(cells[c], width[c], c != 0);
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    out += "\n";
  }
  return out;
}

}  // namespace refuzz
