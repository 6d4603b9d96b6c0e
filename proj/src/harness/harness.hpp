/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wasm/module.hpp"

namespace wssp::harness {

enum class RandomMode { Host, Fixed, Fail };

struct RunSpec {
  std::vector<uint8_t> module_bytes;  // used by run(); run_module() takes a decoded module
  RandomMode random_mode = RandomMode::Host;
  std::vector<uint8_t> fixed_bytes;  // Fixed mode pattern, cycled per request
  std::chrono::milliseconds timeout{20000};
  std::vector<uint8_t> stdin_bytes;  // accepted for parity; fd_read is stubbed NOSYS
  std::vector<std::string> argv{"guest"};
  std::vector<std::string> env;
  uint64_t fuel = 0;  // 0 = unlimited; exhaustion classifies as Timeout
  bool capture_guard = false;          // read "__ssp_debug_guard" export after the run
  std::optional<uint32_t> probe_addr;  // read an i32 from linear memory after the run
  std::string fail_symbol = "__stack_chk_fail";
  std::string init_symbol = "__ssp_init";
};

enum class OutcomeCategory { Silent, MemoryFault, SspFault, Timeout, StartupAbort };

const char* category_name(OutcomeCategory c);
std::optional<OutcomeCategory> category_from_name(const std::string& s);

struct RunOutcome {
  OutcomeCategory category = OutcomeCategory::Silent;
  uint32_t exit_code = 0;
  std::vector<uint8_t> stdout_bytes;
  std::vector<uint8_t> stderr_bytes;
  std::string trap_kind;  // populated for trap-classified outcomes
  std::string symbol;     // innermost attributable frame symbol
  std::chrono::milliseconds duration{0};
  std::optional<uint32_t> guard_value;
  std::optional<uint32_t> probe_value;
};

// Module is invalid for the embedded engine (decode, validation, imports, ...).
class EngineReject : public std::runtime_error {
 public:
  explicit EngineReject(const std::string& reason) : std::runtime_error(reason) {}
};

class HarnessError : public std::runtime_error {
 public:
  explicit HarnessError(const std::string& reason) : std::runtime_error(reason) {}
};

RunOutcome run(const RunSpec& spec);
RunOutcome run_module(const wasm::WasmModule& m, const RunSpec& spec);

struct MatrixEntry {
  std::string name;
  std::string flavor;  // none | legacy | hardened
  std::string mode;    // fixed | fail | host
  RunSpec spec;
  std::optional<OutcomeCategory> expected;
  const wasm::WasmModule* module = nullptr;  // optional, skips decode
};

struct EvalReport {
  struct Row {
    std::string name;
    std::string flavor;
    std::string mode;
    std::optional<OutcomeCategory> category;  // empty on per-entry error
    std::string error;
    int64_t duration_ms = 0;
    std::optional<OutcomeCategory> expected;
    bool match = true;
  };
  std::vector<Row> rows;
  std::map<std::string, std::map<std::string, uint64_t>> summary;  // flavor -> category -> count
  size_t mismatches = 0;
};

// Entries run independently; a failing entry is reported in its row and
// never aborts the matrix.
EvalReport run_matrix(const std::vector<MatrixEntry>& entries, unsigned jobs = 1);

}  // namespace wssp::harness
