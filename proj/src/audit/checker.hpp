/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "analysis/layout.hpp"
#include "wasm/module.hpp"

namespace wssp::audit {

enum class VerdictValue { Pass, Fail, Unknown };

const char* verdict_name(VerdictValue v);

struct Verdict {
  VerdictValue value = VerdictValue::Unknown;
  std::string rationale;
};

struct Evidence {
  std::string site;
  std::string description;
};

struct GuardLocation {
  enum class Kind { Global, LinearMemory, NotFound };
  Kind kind = Kind::NotFound;
  uint32_t index = 0;    // Global
  uint32_t address = 0;  // LinearMemory
};

struct RobustnessReport {
  Verdict p1;
  Verdict p2a;
  Verdict p2b;
  Verdict p3;
  GuardLocation guard_location;
  analysis::LayoutReport layout;
  std::map<std::string, std::vector<Evidence>> evidence;  // "P1".."P3"
};

// Guard reference storage: a global named __stack_chk_guard, the guard
// access feeding a detected canary-check comparison, or not found.
GuardLocation locate_guard(const wasm::WasmModule& m);

// P1: randomness-failure fallback must abort, not degrade to a
// deterministic guard.
Verdict check_p1(const wasm::WasmModule& m, std::vector<Evidence>* evidence = nullptr);

// P2a: guard not reachable by a contiguous ascending overflow.
// P2b: guard storage not writable by guest stores.
std::pair<Verdict, Verdict> check_p2(const wasm::WasmModule& m,
                                     std::vector<Evidence>* evidence = nullptr);

// P3: the fail path traps immediately, touching nothing on the way.
Verdict check_p3(const wasm::WasmModule& m, std::vector<Evidence>* evidence = nullptr);

RobustnessReport audit(const wasm::WasmModule& m);

// CLI contract: 0 all pass, 2 any fail, 3 unknown without fails.
int exit_code_for(const RobustnessReport& report);

}  // namespace wssp::audit
