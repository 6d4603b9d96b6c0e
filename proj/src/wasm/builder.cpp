/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "wasm/builder.hpp"

#include <stdexcept>

namespace wssp::wasm {

uint32_t ModuleBuilder::add_type(FuncSignature sig) {
  for (size_t i = 0; i < m_.types.size(); i++) {
    if (m_.types[i] == sig) return static_cast<uint32_t>(i);
  }
  m_.types.push_back(std::move(sig));
  return static_cast<uint32_t>(m_.types.size() - 1);
}

uint32_t ModuleBuilder::import_func(const std::string& module, const std::string& field,
                                    FuncSignature sig) {
  if (funcs_defined_) throw std::logic_error("imports must precede function definitions");
  Import imp;
  imp.module = module;
  imp.field = field;
  imp.kind = ImportKind::Func;
  imp.desc = add_type(std::move(sig));
  m_.imports.push_back(std::move(imp));
  return func_imports_++;
}

uint32_t ModuleBuilder::declare_func(FuncSignature sig) {
  funcs_defined_ = true;
  m_.functions.push_back(add_type(std::move(sig)));
  m_.code.emplace_back();
  m_.code.back().instrs = {Instr{.op = Op::End}};
  return func_imports_ + static_cast<uint32_t>(m_.functions.size() - 1);
}

void ModuleBuilder::set_body(uint32_t func_index, std::vector<std::pair<uint32_t, ValType>> locals,
                             std::vector<Instr> instrs) {
  // append the function-level end unless the body already closes it
  int balance = 0;
  for (const Instr& ins : instrs) {
    if (ins.op == Op::Block || ins.op == Op::Loop || ins.op == Op::If) balance++;
    if (ins.op == Op::End) balance--;
  }
  if (balance == 0) instrs.push_back(Instr{.op = Op::End});
  FuncBody& body = m_.code.at(func_index - func_imports_);
  body.locals = std::move(locals);
  body.instrs = std::move(instrs);
}

uint32_t ModuleBuilder::add_global(ValType type, bool mut, ConstExpr init) {
  m_.globals.push_back(GlobalDef{{type, mut}, init});
  return static_cast<uint32_t>(m_.globals.size() - 1);  // no global imports in built modules
}

void ModuleBuilder::add_memory(uint32_t min_pages, std::optional<uint32_t> max_pages) {
  m_.memories.push_back(MemoryLimits{min_pages, max_pages});
}

uint32_t ModuleBuilder::add_table(uint32_t min_entries) {
  m_.tables.push_back(TableLimits{min_entries, min_entries});
  return static_cast<uint32_t>(m_.tables.size() - 1);
}

void ModuleBuilder::add_element(uint32_t table_index, int32_t offset, std::vector<uint32_t> funcs) {
  m_.elements.push_back(ElementSegment{table_index, ConstExpr::i32(offset), std::move(funcs)});
}

uint32_t ModuleBuilder::add_data(int32_t addr, std::vector<uint8_t> bytes) {
  m_.data.push_back(DataSegment{0, ConstExpr::i32(addr), std::move(bytes)});
  return static_cast<uint32_t>(m_.data.size() - 1);
}

void ModuleBuilder::add_export(const std::string& name, ExportKind kind, uint32_t index) {
  m_.exports.push_back(Export{name, kind, index});
}

void ModuleBuilder::set_start(uint32_t func_index) { m_.start = func_index; }

void ModuleBuilder::set_func_name(uint32_t func_index, const std::string& name) {
  m_.names.func_names[func_index] = name;
}

void ModuleBuilder::set_global_name(uint32_t global_index, const std::string& name) {
  m_.names.global_names[global_index] = name;
}

WasmModule ModuleBuilder::build() const { return m_; }

}  // namespace wssp::wasm
