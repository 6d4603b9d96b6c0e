/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "wasm/module.hpp"

namespace wssp::wasm {

const char* val_type_name(ValType t) {
  switch (t) {
    case ValType::I32: return "i32";
    case ValType::I64: return "i64";
    case ValType::F32: return "f32";
    case ValType::F64: return "f64";
  }
  return "?";
}

MalformedModule::MalformedModule(size_t offset, const std::string& reason)
    : std::runtime_error("malformed module at offset " + std::to_string(offset) + ": " + reason),
      offset_(offset) {}

namespace {
uint32_t count_imports(const WasmModule& m, ImportKind kind) {
  uint32_t n = 0;
  for (const auto& imp : m.imports) {
    if (imp.kind == kind) n++;
  }
  return n;
}
}  // namespace

uint32_t WasmModule::num_func_imports() const { return count_imports(*this, ImportKind::Func); }
uint32_t WasmModule::num_table_imports() const { return count_imports(*this, ImportKind::Table); }
uint32_t WasmModule::num_memory_imports() const { return count_imports(*this, ImportKind::Memory); }
uint32_t WasmModule::num_global_imports() const { return count_imports(*this, ImportKind::Global); }

uint32_t WasmModule::func_type_index(uint32_t func_index) const {
  uint32_t seen = 0;
  for (const auto& imp : imports) {
    if (imp.kind != ImportKind::Func) continue;
    if (seen == func_index) return std::get<uint32_t>(imp.desc);
    seen++;
  }
  return functions.at(func_index - seen);
}

const FuncSignature& WasmModule::func_sig(uint32_t func_index) const {
  return types.at(func_type_index(func_index));
}

GlobalType WasmModule::global_type(uint32_t global_index) const {
  uint32_t seen = 0;
  for (const auto& imp : imports) {
    if (imp.kind != ImportKind::Global) continue;
    if (seen == global_index) return std::get<GlobalType>(imp.desc);
    seen++;
  }
  return globals.at(global_index - seen).type;
}

std::optional<MemoryLimits> WasmModule::memory_limits() const {
  for (const auto& imp : imports) {
    if (imp.kind == ImportKind::Memory) return std::get<MemoryLimits>(imp.desc);
  }
  if (!memories.empty()) return memories[0];
  return std::nullopt;
}

std::optional<uint32_t> WasmModule::find_func_import(const std::string& module_name,
                                                     const std::string& field) const {
  uint32_t func_index = 0;
  for (const auto& imp : imports) {
    if (imp.kind != ImportKind::Func) continue;
    if (imp.module == module_name && imp.field == field) return func_index;
    func_index++;
  }
  return std::nullopt;
}

std::optional<std::string> WasmModule::func_name(uint32_t func_index) const {
  if (auto it = names.func_names.find(func_index); it != names.func_names.end()) return it->second;
  for (const auto& ex : exports) {
    if (ex.kind == ExportKind::Func && ex.index == func_index) return ex.name;
  }
  return std::nullopt;
}

std::optional<uint32_t> WasmModule::find_global_by_name(const std::string& name) const {
  for (const auto& [index, n] : names.global_names) {
    if (n == name) return index;
  }
  for (const auto& ex : exports) {
    if (ex.kind == ExportKind::Global && ex.name == name) return ex.index;
  }
  return std::nullopt;
}

std::optional<uint32_t> WasmModule::find_export(const std::string& name, ExportKind kind) const {
  for (const auto& ex : exports) {
    if (ex.kind == kind && ex.name == name) return ex.index;
  }
  return std::nullopt;
}

}  // namespace wssp::wasm
