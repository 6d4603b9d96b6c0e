/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wasm/module.hpp"

namespace wssp::analysis {

enum class LayoutKind { StackFirst, NoStackFirst, Unknown };

const char* layout_kind_name(LayoutKind k);

struct AddrRange {
  uint32_t lo = 0;
  uint32_t hi = 0;  // exclusive
  bool operator==(const AddrRange&) const = default;
};

struct LayoutReport {
  std::optional<uint32_t> sp_global;
  std::optional<uint32_t> sp_initial;
  LayoutKind layout = LayoutKind::Unknown;
  std::optional<AddrRange> data_range;
  std::optional<AddrRange> stack_region;
  std::vector<std::string> evidence;
  bool ambiguous_sp = false;
};

enum class FramePattern { TeeSet, GetSubSet, Unrecognized };

const char* frame_pattern_name(FramePattern p);

// Shadow-stack frame facts for one defined function. `recognized` is only
// set when the prologue and every epilogue agree on the frame size and every
// exit path restores the stack pointer; anything else is flagged, never
// guessed.
struct FrameInfo {
  uint32_t func_index = 0;  // function index space
  uint32_t sp_global = 0;
  uint32_t frame_size = 0;
  std::optional<uint32_t> frame_local;
  std::pair<uint32_t, uint32_t> prologue_span{0, 0};  // inclusive instruction indices
  std::vector<std::pair<uint32_t, uint32_t>> epilogue_sites;
  bool recognized = false;
  bool uses_sp = false;
  FramePattern pattern = FramePattern::Unrecognized;
};

// Precedence: a mutable i32 global named "__stack_pointer" (name section or
// export), else the unique mutable i32 global driving a standard prologue.
// Multiple prologue candidates set *ambiguous and return absent.
std::optional<uint32_t> find_stack_pointer(const wasm::WasmModule& m, bool* ambiguous = nullptr);

std::vector<FrameInfo> detect_frames(const wasm::WasmModule& m, uint32_t sp_global);

LayoutReport classify_layout(const wasm::WasmModule& m);

// Whether a contiguous ascending write starting at some stack buffer can
// reach target_addr; nullopt when the layout is unknown.
std::optional<bool> reachable_by_ascending_overflow(const LayoutReport& report,
                                                    uint32_t target_addr);

}  // namespace wssp::analysis
