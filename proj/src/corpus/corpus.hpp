/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "analysis/layout.hpp"
#include "harness/harness.hpp"
#include "wasm/module.hpp"

namespace wssp::corpus {

// Declared facts about a generated guest: what analyses must find and what
// every (flavor, random mode) run must produce.
struct GuestTemplate {
  std::string name;
  analysis::LayoutKind layout = analysis::LayoutKind::StackFirst;
  std::map<std::string, int64_t> parameters;
  // expected[flavor][mode] -> category; flavors: none|legacy|hardened,
  // modes: fixed|fail (host only where determinism allows)
  std::map<std::string, std::map<std::string, harness::OutcomeCategory>> expected;
  uint32_t sp_global = 0;
  std::map<uint32_t, uint32_t> frame_sizes;  // uninstrumented function index -> bytes
  std::optional<uint32_t> legacy_guard_slot;
  std::optional<std::string> expected_stdout;  // fixed-entropy Silent runs
  uint32_t timeout_ms = 0;                     // 0 = harness default
};

struct Guest {
  std::string name;
  wasm::WasmModule module;
  GuestTemplate tmpl;
};

Guest gen_guest_A(uint32_t buffer_size, uint32_t overflow_len, analysis::LayoutKind layout);
Guest gen_guest_B_bypass(uint32_t attack_value, analysis::LayoutKind layout);
std::vector<Guest> gen_benign_suite();

// Minimal module arranged per the requested layout; nullopt drops the stack
// pointer entirely (classification must come back unknown).
wasm::WasmModule gen_layout_fixture(std::optional<analysis::LayoutKind> layout);

// The full shipped lineup: benign suite, overflow sweep points, bypass PoCs,
// the heap negative control, a spinner, and an out-of-bounds write.
std::vector<Guest> default_corpus();

void write_corpus(const std::vector<Guest>& guests, const std::filesystem::path& dir);
std::vector<Guest> load_corpus(const std::filesystem::path& dir);
std::string manifest_json_text(const std::vector<Guest>& guests);

}  // namespace wssp::corpus
