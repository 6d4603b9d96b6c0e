/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <optional>

#include "wasm/module.hpp"

namespace wssp::wasm {

// Immediate layout of opcodes carried opaquely. Core spec 1.0 only; bytes
// outside the 1.0 opcode space are rejected by the decoder.
enum class ImmClass : uint8_t {
  Illegal,
  None,
  MemArg,  // align + offset LEBs
  F32,     // 4 raw bytes
  F64,     // 8 raw bytes
};

// Structured opcodes: decoded into typed Instr fields, re-encoded
// canonically, executable by the embedded engine.
std::optional<Op> structured_op(uint8_t byte);

// Immediate class for opcodes that are not structured.
ImmClass opaque_imm_class(uint8_t byte);

bool is_valtype_byte(uint8_t byte);

}  // namespace wssp::wasm
