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

#include <ostream>
#include <string>
#include <vector>

namespace refuzz {

inline constexpr int kExitOk = 0;
/// The command ran to completion but some work hit infrastructure faults,
/// or a runtime failure stopped it.
inline constexpr int kExitToolErrors = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the `refuzz` binary. argv[0] is the program name.
int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace refuzz
