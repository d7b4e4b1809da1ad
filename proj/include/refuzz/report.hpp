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
#include <optional>
#include <span>
#include <string>

#include "json.hpp"
#include "refuzz/percent.hpp"
#include "refuzz/trace.hpp"

namespace refuzz {

// Rates and mean time are absent when there is nothing to divide by.
struct CampaignStats {
  std::size_t total_tests = 0;
  std::size_t valid_before = 0;
  std::size_t valid_after = 0;
  std::size_t crash_only = 0;
  std::size_t tool_errors = 0;
  std::optional<double> rate_before;
  std::optional<double> rate_after;
  std::optional<double> mean_time_per_test_s;

  bool operator==(const CampaignStats&) const = default;
};

/// `pre_valid` programs were already Valid and were not refuzzed; `total`
/// counts every program in the corpus. Programs neither traced nor
/// pre-valid are counted as crash-only (they were quarantined earlier).
CampaignStats compute_stats(std::span<const RepairTrace> traces, std::size_t pre_valid, std::size_t total);

enum class Format { text, json, markdown };
std::optional<Format> format_from_string(std::string_view s);

void to_json(nlohmann::json& j, const CampaignStats& s);
void from_json(const nlohmann::json& j, CampaignStats& s);

std::string render(const CampaignStats& stats, Format format);

struct StatsRow {
  std::string label;
  CampaignStats stats;
};

/// Several campaigns side by side, one row each.
std::string render_rows(std::span<const StatsRow> rows, Format format);

}  // namespace refuzz
