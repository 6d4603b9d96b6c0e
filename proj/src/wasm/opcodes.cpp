/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "wasm/opcodes.hpp"

namespace wssp::wasm {

bool is_valtype_byte(uint8_t byte) {
  return byte == 0x7F || byte == 0x7E || byte == 0x7D || byte == 0x7C;
}

std::optional<Op> structured_op(uint8_t byte) {
  switch (byte) {
    case 0x00: return Op::Unreachable;
    case 0x01: return Op::Nop;
    case 0x02: return Op::Block;
    case 0x03: return Op::Loop;
    case 0x04: return Op::If;
    case 0x05: return Op::Else;
    case 0x0B: return Op::End;
    case 0x0C: return Op::Br;
    case 0x0D: return Op::BrIf;
    case 0x0E: return Op::BrTable;
    case 0x0F: return Op::Return;
    case 0x10: return Op::Call;
    case 0x11: return Op::CallIndirect;
    case 0x1A: return Op::Drop;
    case 0x1B: return Op::Select;
    case 0x20: return Op::LocalGet;
    case 0x21: return Op::LocalSet;
    case 0x22: return Op::LocalTee;
    case 0x23: return Op::GlobalGet;
    case 0x24: return Op::GlobalSet;
    case 0x28: return Op::I32Load;
    case 0x2C: return Op::I32Load8S;
    case 0x2D: return Op::I32Load8U;
    case 0x2E: return Op::I32Load16S;
    case 0x2F: return Op::I32Load16U;
    case 0x36: return Op::I32Store;
    case 0x3A: return Op::I32Store8;
    case 0x3B: return Op::I32Store16;
    case 0x3F: return Op::MemorySize;
    case 0x40: return Op::MemoryGrow;
    case 0x41: return Op::I32Const;
    case 0x42: return Op::I64Const;
    case 0x45: return Op::I32Eqz;
    case 0x46: return Op::I32Eq;
    case 0x47: return Op::I32Ne;
    case 0x48: return Op::I32LtS;
    case 0x49: return Op::I32LtU;
    case 0x4A: return Op::I32GtS;
    case 0x4B: return Op::I32GtU;
    case 0x4C: return Op::I32LeS;
    case 0x4D: return Op::I32LeU;
    case 0x4E: return Op::I32GeS;
    case 0x4F: return Op::I32GeU;
    case 0x6A: return Op::I32Add;
    case 0x6B: return Op::I32Sub;
    case 0x6C: return Op::I32Mul;
    case 0x6D: return Op::I32DivS;
    case 0x6E: return Op::I32DivU;
    case 0x6F: return Op::I32RemS;
    case 0x70: return Op::I32RemU;
    case 0x71: return Op::I32And;
    case 0x72: return Op::I32Or;
    case 0x73: return Op::I32Xor;
    case 0x74: return Op::I32Shl;
    case 0x75: return Op::I32ShrS;
    case 0x76: return Op::I32ShrU;
    default: return std::nullopt;
  }
}

ImmClass opaque_imm_class(uint8_t byte) {
  // i64/f32/f64 loads and stores
  if (byte == 0x29 || byte == 0x2A || byte == 0x2B) return ImmClass::MemArg;
  if (byte >= 0x30 && byte <= 0x35) return ImmClass::MemArg;
  if (byte >= 0x37 && byte <= 0x39) return ImmClass::MemArg;
  if (byte >= 0x3C && byte <= 0x3E) return ImmClass::MemArg;
  if (byte == 0x43) return ImmClass::F32;
  if (byte == 0x44) return ImmClass::F64;
  // numeric opcodes with no immediates
  if (byte >= 0x50 && byte <= 0x69) return ImmClass::None;
  if (byte == 0x77 || byte == 0x78) return ImmClass::None;  // i32.rotl / rotr
  if (byte >= 0x79 && byte <= 0xBF) return ImmClass::None;
  return ImmClass::Illegal;
}

}  // namespace wssp::wasm
