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

namespace refuzz {

/// 100 * part / whole in tenths of a percent, rounded half-up.
inline std::optional<std::int64_t> percent_tenths(std::uint64_t part, std::uint64_t whole) {
  if (whole == 0) return std::nullopt;
  return static_cast<std::int64_t>((2000 * part + whole) / (2 * whole));
}

inline std::optional<double> percent_1dp(std::uint64_t part, std::uint64_t whole) {
  auto t = percent_tenths(part, whole);
  if (!t) return std::nullopt;
  return static_cast<double>(*t) / 10.0;
}

}  // namespace refuzz
