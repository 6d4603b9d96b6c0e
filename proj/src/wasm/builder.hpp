/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wasm/module.hpp"

namespace wssp::wasm {

// Instruction factories for hand-assembled bodies.
namespace ins {

inline Instr op(Op o) { return Instr{.op = o}; }
inline Instr i32_const(int32_t v) { return Instr{.op = Op::I32Const, .n = v}; }
inline Instr local_get(uint32_t i) { return Instr{.op = Op::LocalGet, .a = i}; }
inline Instr local_set(uint32_t i) { return Instr{.op = Op::LocalSet, .a = i}; }
inline Instr local_tee(uint32_t i) { return Instr{.op = Op::LocalTee, .a = i}; }
inline Instr global_get(uint32_t i) { return Instr{.op = Op::GlobalGet, .a = i}; }
inline Instr global_set(uint32_t i) { return Instr{.op = Op::GlobalSet, .a = i}; }
inline Instr call(uint32_t f) { return Instr{.op = Op::Call, .a = f}; }
inline Instr call_indirect(uint32_t type_index) { return Instr{.op = Op::CallIndirect, .a = type_index}; }
inline Instr i32_load(uint32_t offset, uint32_t align = 2) {
  return Instr{.op = Op::I32Load, .a = align, .b = offset};
}
inline Instr i32_store(uint32_t offset, uint32_t align = 2) {
  return Instr{.op = Op::I32Store, .a = align, .b = offset};
}
inline Instr i32_load8_u(uint32_t offset) { return Instr{.op = Op::I32Load8U, .a = 0, .b = offset}; }
inline Instr i32_store8(uint32_t offset) { return Instr{.op = Op::I32Store8, .a = 0, .b = offset}; }
inline Instr block() { return Instr{.op = Op::Block, .a = kBlockTypeEmpty}; }
inline Instr block_t(ValType t) { return Instr{.op = Op::Block, .a = static_cast<uint8_t>(t)}; }
inline Instr loop() { return Instr{.op = Op::Loop, .a = kBlockTypeEmpty}; }
inline Instr if_() { return Instr{.op = Op::If, .a = kBlockTypeEmpty}; }
inline Instr if_t(ValType t) { return Instr{.op = Op::If, .a = static_cast<uint8_t>(t)}; }
inline Instr else_() { return op(Op::Else); }
inline Instr end() { return op(Op::End); }
inline Instr br(uint32_t depth) { return Instr{.op = Op::Br, .a = depth}; }
inline Instr br_if(uint32_t depth) { return Instr{.op = Op::BrIf, .a = depth}; }
inline Instr ret() { return op(Op::Return); }
inline Instr unreachable() { return op(Op::Unreachable); }
inline Instr drop() { return op(Op::Drop); }
inline Instr add() { return op(Op::I32Add); }
inline Instr sub() { return op(Op::I32Sub); }
inline Instr mul() { return op(Op::I32Mul); }
inline Instr div_u() { return op(Op::I32DivU); }
inline Instr rem_u() { return op(Op::I32RemU); }
inline Instr eq() { return op(Op::I32Eq); }
inline Instr ne() { return op(Op::I32Ne); }
inline Instr eqz() { return op(Op::I32Eqz); }
inline Instr lt_u() { return op(Op::I32LtU); }
inline Instr ge_u() { return op(Op::I32GeU); }
inline Instr gt_u() { return op(Op::I32GtU); }

}  // namespace ins

// Assembles WasmModule values section by section. Function bodies are
// attached after all imports so the index space is known up front.
class ModuleBuilder {
 public:
  uint32_t add_type(FuncSignature sig);

  // Imports must be declared before defining functions.
  uint32_t import_func(const std::string& module, const std::string& field, FuncSignature sig);

  uint32_t declare_func(FuncSignature sig);  // returns function index
  void set_body(uint32_t func_index, std::vector<std::pair<uint32_t, ValType>> locals,
                std::vector<Instr> instrs);

  uint32_t add_global(ValType type, bool mut, ConstExpr init);
  void add_memory(uint32_t min_pages, std::optional<uint32_t> max_pages = std::nullopt);
  uint32_t add_table(uint32_t min_entries);
  void add_element(uint32_t table_index, int32_t offset, std::vector<uint32_t> funcs);
  uint32_t add_data(int32_t addr, std::vector<uint8_t> bytes);  // returns segment index
  void add_export(const std::string& name, ExportKind kind, uint32_t index);
  void set_start(uint32_t func_index);
  void set_func_name(uint32_t func_index, const std::string& name);
  void set_global_name(uint32_t global_index, const std::string& name);

  uint32_t num_func_imports() const { return func_imports_; }

  WasmModule build() const;

 private:
  WasmModule m_;
  uint32_t func_imports_ = 0;
  bool funcs_defined_ = false;
};

}  // namespace wssp::wasm
