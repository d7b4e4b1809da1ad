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

#include <atomic>
#include <mutex>
#include <string>
#include <vector>

#include "refuzz/repair.hpp"

namespace refuzz::testing {

// Decides validity from markers in the program text, so repair logic can be
// exercised without a compiler:
//   SYNTAX_BUG  static check fails with a compiler-style log
//   UB_BUG      ASan+UBSan profile fails with an ASan-style report
//   SPIN_BUG    dynamic check hangs
//   TOOL_FAULT  static check is a tool error
class MarkerValidator : public ProgramValidator {
 public:
  ValidationOutcome check_static(const ProgramSource& p) override {
    ValidationOutcome o = base(p, Phase::static_check, "static");
    ++static_calls;
    if (p.text.find("TOOL_FAULT") != std::string::npos) {
      o.verdict = Verdict::tool_error;
      o.detail = "compiler not found";
    } else if (p.text.find("SYNTAX_BUG") != std::string::npos) {
      o.verdict = Verdict::fail;
      o.error_log = parse_compiler_log("prog.c:1:1: error: use of undeclared identifier 'SYNTAX_BUG'\n");
    } else {
      o.verdict = Verdict::pass;
    }
    return o;
  }

  std::vector<ValidationOutcome> check_dynamic(const ProgramSource& p) override {
    ++dynamic_calls;
    ValidationOutcome asan = base(p, Phase::dynamic_check, "dynamic-address_undefined");
    asan.profile = SanitizerKind::address_undefined;
    ValidationOutcome msan = base(p, Phase::dynamic_check, "dynamic-memory");
    msan.profile = SanitizerKind::memory;
    asan.verdict = msan.verdict = Verdict::pass;
    if (p.text.find("UB_BUG") != std::string::npos) {
      asan.verdict = Verdict::fail;
      asan.error_log = parse_sanitizer_log(
          "==1==ERROR: AddressSanitizer: stack-buffer-overflow on address 0x1 at pc 0x2 bp 0x3 sp 0x4\n"
          "    #0 0x2 in main prog.c:3:5\n"
          "SUMMARY: AddressSanitizer: stack-buffer-overflow prog.c:3:5 in main\n");
    }
    if (p.text.find("SPIN_BUG") != std::string::npos) msan.verdict = Verdict::hang;
    return {asan, msan};
  }

  std::atomic<int> static_calls{0};
  std::atomic<int> dynamic_calls{0};

 private:
  ValidationOutcome base(const ProgramSource& p, Phase phase, const std::string& dir) {
    ValidationOutcome o;
    o.program_id = p.id;
    o.phase = phase;
    o.id = p.id + "/" + dir + "/run-" + std::to_string(++counter_);
    return o;
  }
  std::atomic<int> counter_{0};
};

inline std::string fenced(const std::string& code) { return "Here is the corrected program:\n```c\n" + code + "```\n"; }

}  // namespace refuzz::testing
