/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace wssp::wasm {

enum class ValType : uint8_t {
  I32 = 0x7F,
  I64 = 0x7E,
  F32 = 0x7D,
  F64 = 0x7C,
};

const char* val_type_name(ValType t);

struct FuncSignature {
  std::vector<ValType> params;
  std::vector<ValType> results;
  bool operator==(const FuncSignature&) const = default;
};

struct MemoryLimits {
  uint32_t min_pages = 0;  // 64 KiB units
  std::optional<uint32_t> max_pages;
  bool operator==(const MemoryLimits&) const = default;
};

// Element type is always funcref in core 1.0.
struct TableLimits {
  uint32_t min_entries = 0;
  std::optional<uint32_t> max_entries;
  bool operator==(const TableLimits&) const = default;
};

struct GlobalType {
  ValType type = ValType::I32;
  bool mut = false;
  bool operator==(const GlobalType&) const = default;
};

// Constant expressions are restricted to a single const or a global.get of
// an imported global, followed by end.
struct ConstExpr {
  enum class Kind { I32Const, I64Const, F32Const, F64Const, GlobalGet };
  Kind kind = Kind::I32Const;
  uint64_t bits = 0;  // const payload (f32 in low 32 bits) or global index

  static ConstExpr i32(int32_t v) {
    return {Kind::I32Const, static_cast<uint64_t>(static_cast<uint32_t>(v))};
  }
  static ConstExpr global_get(uint32_t index) { return {Kind::GlobalGet, index}; }
  int32_t as_i32() const { return static_cast<int32_t>(bits); }
  bool operator==(const ConstExpr&) const = default;
};

enum class ImportKind : uint8_t { Func = 0, Table = 1, Memory = 2, Global = 3 };
enum class ExportKind : uint8_t { Func = 0, Table = 1, Memory = 2, Global = 3 };

struct Import {
  std::string module;
  std::string field;
  ImportKind kind = ImportKind::Func;
  // Func: type index; others: limits / global type.
  std::variant<uint32_t, TableLimits, MemoryLimits, GlobalType> desc;
  bool operator==(const Import&) const = default;
};

struct Export {
  std::string name;
  ExportKind kind = ExportKind::Func;
  uint32_t index = 0;
  bool operator==(const Export&) const = default;
};

struct GlobalDef {
  GlobalType type;
  ConstExpr init;
  bool operator==(const GlobalDef&) const = default;
};

struct ElementSegment {
  uint32_t table_index = 0;
  ConstExpr offset;
  std::vector<uint32_t> func_indices;
  bool operator==(const ElementSegment&) const = default;
};

struct DataSegment {
  uint32_t memory_index = 0;
  ConstExpr offset;
  std::vector<uint8_t> bytes;
  bool operator==(const DataSegment&) const = default;
};

// Structured opcodes carry their meaning; enumerator values are the binary
// opcode bytes. Everything else rides along as Op::Opaque with raw bytes.
enum class Op : uint8_t {
  Unreachable = 0x00,
  Nop = 0x01,
  Block = 0x02,
  Loop = 0x03,
  If = 0x04,
  Else = 0x05,
  End = 0x0B,
  Br = 0x0C,
  BrIf = 0x0D,
  BrTable = 0x0E,
  Return = 0x0F,
  Call = 0x10,
  CallIndirect = 0x11,
  Drop = 0x1A,
  Select = 0x1B,
  LocalGet = 0x20,
  LocalSet = 0x21,
  LocalTee = 0x22,
  GlobalGet = 0x23,
  GlobalSet = 0x24,
  I32Load = 0x28,
  I32Load8S = 0x2C,
  I32Load8U = 0x2D,
  I32Load16S = 0x2E,
  I32Load16U = 0x2F,
  I32Store = 0x36,
  I32Store8 = 0x3A,
  I32Store16 = 0x3B,
  MemorySize = 0x3F,
  MemoryGrow = 0x40,
  I32Const = 0x41,
  I64Const = 0x42,
  I32Eqz = 0x45,
  I32Eq = 0x46,
  I32Ne = 0x47,
  I32LtS = 0x48,
  I32LtU = 0x49,
  I32GtS = 0x4A,
  I32GtU = 0x4B,
  I32LeS = 0x4C,
  I32LeU = 0x4D,
  I32GeS = 0x4E,
  I32GeU = 0x4F,
  I32Add = 0x6A,
  I32Sub = 0x6B,
  I32Mul = 0x6C,
  I32DivS = 0x6D,
  I32DivU = 0x6E,
  I32RemS = 0x6F,
  I32RemU = 0x70,
  I32And = 0x71,
  I32Or = 0x72,
  I32Xor = 0x73,
  I32Shl = 0x74,
  I32ShrS = 0x75,
  I32ShrU = 0x76,
  Opaque = 0xFF,
};

constexpr uint8_t kBlockTypeEmpty = 0x40;

struct Instr {
  Op op = Op::Nop;
  uint8_t raw_opcode = 0;       // original byte when op == Opaque
  uint32_t a = 0;               // first immediate: index, label, align, block type byte
  uint32_t b = 0;               // second immediate: offset, br_table default
  int64_t n = 0;                // i32/i64 const payload (sign preserved)
  std::vector<uint32_t> table;  // br_table targets
  std::vector<uint8_t> raw;     // opaque immediate bytes, re-emitted verbatim

  bool operator==(const Instr&) const = default;
};

struct FuncBody {
  std::vector<std::pair<uint32_t, ValType>> locals;  // run-length declarations
  std::vector<Instr> instrs;                         // ends with Op::End
  bool operator==(const FuncBody&) const = default;

  uint32_t local_count() const {
    uint32_t n = 0;
    for (auto& [count, _] : locals) n += count;
    return n;
  }
};

struct NameMap {
  std::map<uint32_t, std::string> func_names;
  std::map<uint32_t, std::string> global_names;
  // Unparsed "name" subsections (module name, locals, ...) preserved raw.
  std::vector<std::pair<uint8_t, std::vector<uint8_t>>> extra_subsections;
  bool operator==(const NameMap&) const = default;

  bool empty() const {
    return func_names.empty() && global_names.empty() && extra_subsections.empty();
  }
};

struct CustomSection {
  std::string name;
  std::vector<uint8_t> bytes;
  uint8_t after_section = 0;  // id of the last known section seen before it
  bool operator==(const CustomSection&) const = default;
};

struct WasmModule {
  std::vector<FuncSignature> types;
  std::vector<Import> imports;
  std::vector<uint32_t> functions;  // type indices of defined functions
  std::vector<TableLimits> tables;
  std::vector<MemoryLimits> memories;
  std::vector<GlobalDef> globals;
  std::vector<Export> exports;
  std::optional<uint32_t> start;
  std::vector<ElementSegment> elements;
  std::vector<FuncBody> code;  // parallel to `functions`
  std::vector<DataSegment> data;
  NameMap names;
  std::vector<CustomSection> custom;

  bool operator==(const WasmModule&) const = default;

  uint32_t num_func_imports() const;
  uint32_t num_table_imports() const;
  uint32_t num_memory_imports() const;
  uint32_t num_global_imports() const;

  uint32_t num_funcs() const { return num_func_imports() + static_cast<uint32_t>(functions.size()); }
  uint32_t num_globals() const { return num_global_imports() + static_cast<uint32_t>(globals.size()); }
  uint32_t num_tables() const { return num_table_imports() + static_cast<uint32_t>(tables.size()); }
  uint32_t num_memories() const { return num_memory_imports() + static_cast<uint32_t>(memories.size()); }

  bool is_imported_func(uint32_t func_index) const { return func_index < num_func_imports(); }
  // Signature of any function in the index space (imports first).
  const FuncSignature& func_sig(uint32_t func_index) const;
  uint32_t func_type_index(uint32_t func_index) const;
  // Global type of any global in the index space.
  GlobalType global_type(uint32_t global_index) const;

  // Limits of memory 0, whether imported or defined.
  std::optional<MemoryLimits> memory_limits() const;

  std::optional<uint32_t> find_func_import(const std::string& module_name,
                                           const std::string& field) const;
  std::optional<std::string> func_name(uint32_t func_index) const;
  // Looks in the name section first, then exports.
  std::optional<uint32_t> find_global_by_name(const std::string& name) const;
  std::optional<uint32_t> find_export(const std::string& name, ExportKind kind) const;
};

class MalformedModule : public std::runtime_error {
 public:
  MalformedModule(size_t offset, const std::string& reason);
  size_t offset() const { return offset_; }

 private:
  size_t offset_;
};

class EncodeError : public std::runtime_error {
 public:
  explicit EncodeError(const std::string& reason) : std::runtime_error(reason) {}
};

}  // namespace wssp::wasm
