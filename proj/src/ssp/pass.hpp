/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "analysis/layout.hpp"
#include "wasm/module.hpp"

namespace wssp::ssp {

enum class SelectionMode { All, Heuristic };
enum class Flavor { Hardened, Legacy };
enum class InitHook { StartSection, PrependToStart, PrependToExport };

struct SspConfig {
  SelectionMode mode = SelectionMode::All;
  uint32_t heuristic_threshold = 8;  // bytes; frames below are skipped in Heuristic mode
  uint32_t canary_slot_bytes = 16;   // frame growth, canary in the low 4 bytes
  std::string guard_global_name = "__stack_chk_guard";
  std::string fail_func_name = "__stack_chk_fail";
  std::string init_func_name = "__ssp_init";
  InitHook init_hook = InitHook::StartSection;  // falls forward when a start exists
  bool wipe_scratch = true;
  bool debug_export = false;  // additionally export the guard as "__ssp_debug_guard"
  std::optional<uint32_t> sp_override;
};

struct SkippedFunction {
  uint32_t func_index;
  std::string reason;  // "below-threshold" | "unrecognized-frame"
};

struct InstrumentationSummary {
  uint32_t functions_instrumented = 0;
  std::vector<SkippedFunction> functions_skipped;
  uint32_t functions_frameless = 0;
  uint32_t guard_global_index = 0;  // hardened flavor
  uint32_t init_func_index = 0;
  uint32_t fail_func_index = 0;
  int64_t size_delta_bytes = 0;
  std::optional<uint32_t> guard_slot_address;  // legacy flavor
  Flavor flavor = Flavor::Hardened;
};

class InstrumentError : public std::runtime_error {
 public:
  enum class Kind {
    NoStackPointer,
    AmbiguousStackPointer,
    RandomImportConflict,
    FrameRewriteConflict,
    AlreadyInstrumented,
    ImportNotFound,
    InvalidModule,
    NoMemory,
    NoInitHook,
  };
  InstrumentError(Kind kind, const std::string& reason)
      : std::runtime_error(reason), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Hardened instrumentation: guard reference value in a mutable global,
// startup initialization from WASI random_get that traps on failure.
std::pair<wasm::WasmModule, InstrumentationSummary> instrument(
    const wasm::WasmModule& m, const SspConfig& cfg,
    const std::vector<analysis::FrameInfo>& frames);

// Baseline scheme for audits and PoCs: guard in a fixed linear-memory slot,
// deterministic multiply fallback when random_get fails.
std::pair<wasm::WasmModule, InstrumentationSummary> legacy_instrument(
    const wasm::WasmModule& m, const SspConfig& cfg,
    const std::vector<analysis::FrameInfo>& frames);

// Detects the stack pointer and frames, then instruments.
std::pair<wasm::WasmModule, InstrumentationSummary> instrument_auto(const wasm::WasmModule& m,
                                                                    const SspConfig& cfg,
                                                                    Flavor flavor);

// Init body for the hardened flavor: scratch on the shadow stack, trap when
// random_get reports an error, guard loaded little-endian, scratch wiped.
wasm::FuncBody build_init_function(const SspConfig& cfg, uint32_t sp_global,
                                   uint32_t random_get_index, uint32_t guard_global_index);

// Replaces the random_get import with a local function returning errno 1.
wasm::WasmModule inject_fault_random(const wasm::WasmModule& m);

// Placement rule for the legacy guard slot; shared with the corpus
// generator's ground-truth tables.
uint32_t legacy_guard_address(const wasm::WasmModule& m);

constexpr uint32_t kLegacyFallbackMultiplier = 1103515245;

}  // namespace wssp::ssp
