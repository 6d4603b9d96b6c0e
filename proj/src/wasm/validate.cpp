/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "wasm/validate.hpp"

#include <set>

namespace wssp::wasm {

const char* violation_kind_name(Violation::Kind k) {
  switch (k) {
    case Violation::Kind::OutOfRangeIndex: return "out-of-range-index";
    case Violation::Kind::TypeMismatch: return "type-mismatch";
    case Violation::Kind::Nesting: return "nesting";
    case Violation::Kind::MultipleMemories: return "multiple-memories";
    case Violation::Kind::SegmentOutOfBounds: return "segment-out-of-bounds";
    case Violation::Kind::ImmutableGlobalWrite: return "immutable-global-write";
    case Violation::Kind::BadInitExpr: return "bad-init-expr";
    case Violation::Kind::DuplicateExport: return "duplicate-export";
  }
  return "?";
}

namespace {

ValType const_expr_type(const ConstExpr& e, const WasmModule& m, bool& ok) {
  ok = true;
  switch (e.kind) {
    case ConstExpr::Kind::I32Const: return ValType::I32;
    case ConstExpr::Kind::I64Const: return ValType::I64;
    case ConstExpr::Kind::F32Const: return ValType::F32;
    case ConstExpr::Kind::F64Const: return ValType::F64;
    case ConstExpr::Kind::GlobalGet: {
      uint32_t index = static_cast<uint32_t>(e.bits);
      if (index >= m.num_global_imports()) {
        ok = false;
        return ValType::I32;
      }
      return m.global_type(index).type;
    }
  }
  ok = false;
  return ValType::I32;
}

uint32_t natural_align(Op op) {
  switch (op) {
    case Op::I32Load:
    case Op::I32Store:
      return 2;
    case Op::I32Load16S:
    case Op::I32Load16U:
    case Op::I32Store16:
      return 1;
    default:
      return 0;
  }
}

void check_body(const WasmModule& m, uint32_t func_index, const FuncBody& body,
                std::vector<Violation>& out) {
  auto add = [&](Violation::Kind kind, const std::string& msg) {
    out.push_back({kind, msg, func_index});
  };
  const FuncSignature& sig = m.func_sig(func_index);
  uint32_t nlocals = static_cast<uint32_t>(sig.params.size()) + body.local_count();

  // frame kinds for else-matching; depth for label range checks
  std::vector<Op> frames;
  bool terminated = false;
  for (size_t i = 0; i < body.instrs.size(); i++) {
    const Instr& ins = body.instrs[i];
    if (terminated) {
      add(Violation::Kind::Nesting, "instructions after final end");
      break;
    }
    switch (ins.op) {
      case Op::Block:
      case Op::Loop:
      case Op::If:
        frames.push_back(ins.op);
        break;
      case Op::Else:
        if (frames.empty() || frames.back() != Op::If) {
          add(Violation::Kind::Nesting, "else without matching if");
        } else {
          frames.back() = Op::Else;
        }
        break;
      case Op::End:
        if (frames.empty()) {
          terminated = true;
        } else {
          frames.pop_back();
        }
        break;
      case Op::Br:
      case Op::BrIf:
        if (ins.a > frames.size()) add(Violation::Kind::OutOfRangeIndex, "branch label out of range");
        break;
      case Op::BrTable: {
        for (uint32_t t : ins.table) {
          if (t > frames.size()) add(Violation::Kind::OutOfRangeIndex, "br_table label out of range");
        }
        if (ins.b > frames.size()) add(Violation::Kind::OutOfRangeIndex, "br_table default label out of range");
        break;
      }
      case Op::Call:
        if (ins.a >= m.num_funcs()) {
          add(Violation::Kind::OutOfRangeIndex,
              "call to function " + std::to_string(ins.a) + " with " +
                  std::to_string(m.num_funcs()) + " functions");
        }
        break;
      case Op::CallIndirect:
        if (ins.a >= m.types.size()) add(Violation::Kind::OutOfRangeIndex, "call_indirect type out of range");
        if (m.num_tables() == 0) add(Violation::Kind::OutOfRangeIndex, "call_indirect without a table");
        break;
      case Op::LocalGet:
      case Op::LocalSet:
      case Op::LocalTee:
        if (ins.a >= nlocals) add(Violation::Kind::OutOfRangeIndex, "local index out of range");
        break;
      case Op::GlobalGet:
        if (ins.a >= m.num_globals()) add(Violation::Kind::OutOfRangeIndex, "global index out of range");
        break;
      case Op::GlobalSet:
        if (ins.a >= m.num_globals()) {
          add(Violation::Kind::OutOfRangeIndex, "global index out of range");
        } else if (!m.global_type(ins.a).mut) {
          add(Violation::Kind::ImmutableGlobalWrite, "global.set of immutable global " + std::to_string(ins.a));
        }
        break;
      case Op::I32Load:
      case Op::I32Load8S:
      case Op::I32Load8U:
      case Op::I32Load16S:
      case Op::I32Load16U:
      case Op::I32Store:
      case Op::I32Store8:
      case Op::I32Store16:
        if (m.num_memories() == 0) add(Violation::Kind::OutOfRangeIndex, "memory access without a memory");
        if (ins.a > natural_align(ins.op)) add(Violation::Kind::TypeMismatch, "alignment exceeds natural alignment");
        break;
      case Op::MemorySize:
      case Op::MemoryGrow:
        if (m.num_memories() == 0) add(Violation::Kind::OutOfRangeIndex, "memory op without a memory");
        break;
      default:
        break;
    }
  }
  if (!terminated) add(Violation::Kind::Nesting, "body not terminated by end at depth 0");
}

}  // namespace

std::vector<Violation> validate(const WasmModule& m) {
  std::vector<Violation> out;
  auto add = [&](Violation::Kind kind, const std::string& msg) {
    out.push_back({kind, msg, std::nullopt});
  };

  for (const auto& imp : m.imports) {
    if (imp.kind == ImportKind::Func && std::get<uint32_t>(imp.desc) >= m.types.size()) {
      add(Violation::Kind::OutOfRangeIndex, "import type index out of range");
    }
  }
  for (uint32_t t : m.functions) {
    if (t >= m.types.size()) add(Violation::Kind::OutOfRangeIndex, "function type index out of range");
  }
  if (m.functions.size() != m.code.size()) {
    add(Violation::Kind::OutOfRangeIndex, "function/code section mismatch");
  }
  if (m.num_memories() > 1) add(Violation::Kind::MultipleMemories, "more than one linear memory");

  for (size_t i = 0; i < m.globals.size(); i++) {
    const auto& g = m.globals[i];
    bool ok = false;
    ValType t = const_expr_type(g.init, m, ok);
    if (!ok) {
      add(Violation::Kind::BadInitExpr, "global " + std::to_string(i) + " init must be const or imported global.get");
    } else if (t != g.type.type) {
      add(Violation::Kind::TypeMismatch, "global " + std::to_string(i) + " init type mismatch");
    }
  }

  std::set<std::string> export_names;
  for (const auto& ex : m.exports) {
    if (!export_names.insert(ex.name).second) {
      add(Violation::Kind::DuplicateExport, "duplicate export \"" + ex.name + "\"");
    }
    uint32_t limit = 0;
    switch (ex.kind) {
      case ExportKind::Func: limit = m.num_funcs(); break;
      case ExportKind::Table: limit = m.num_tables(); break;
      case ExportKind::Memory: limit = m.num_memories(); break;
      case ExportKind::Global: limit = m.num_globals(); break;
    }
    if (ex.index >= limit) add(Violation::Kind::OutOfRangeIndex, "export \"" + ex.name + "\" index out of range");
  }

  if (m.start && *m.start >= m.num_funcs()) {
    add(Violation::Kind::OutOfRangeIndex, "start function index out of range");
  }

  for (const auto& seg : m.elements) {
    if (seg.table_index >= m.num_tables()) add(Violation::Kind::OutOfRangeIndex, "element table index out of range");
    bool ok = false;
    if (const_expr_type(seg.offset, m, ok) != ValType::I32 || !ok) {
      add(Violation::Kind::BadInitExpr, "element offset must be an i32 constant expression");
    }
    for (uint32_t f : seg.func_indices) {
      if (f >= m.num_funcs()) add(Violation::Kind::OutOfRangeIndex, "element function index out of range");
    }
  }

  uint64_t memory_bytes = 0;
  if (auto lim = m.memory_limits()) {
    memory_bytes = static_cast<uint64_t>(lim->min_pages) * 65536;
  }
  for (const auto& seg : m.data) {
    if (seg.memory_index >= m.num_memories()) {
      add(Violation::Kind::OutOfRangeIndex, "data memory index out of range");
      continue;
    }
    bool ok = false;
    if (const_expr_type(seg.offset, m, ok) != ValType::I32 || !ok) {
      add(Violation::Kind::BadInitExpr, "data offset must be an i32 constant expression");
      continue;
    }
    if (seg.offset.kind == ConstExpr::Kind::I32Const) {
      uint64_t end = static_cast<uint64_t>(static_cast<uint32_t>(seg.offset.as_i32())) + seg.bytes.size();
      if (end > memory_bytes) {
        add(Violation::Kind::SegmentOutOfBounds, "active data segment exceeds declared minimum memory");
      }
    }
  }

  for (size_t i = 0; i < m.code.size(); i++) {
    check_body(m, m.num_func_imports() + static_cast<uint32_t>(i), m.code[i], out);
  }
  return out;
}

WasmModule remap_func_refs(const WasmModule& m, const std::function<uint32_t(uint32_t)>& map) {
  WasmModule r = m;
  for (auto& body : r.code) {
    for (auto& ins : body.instrs) {
      if (ins.op == Op::Call) ins.a = map(ins.a);
    }
  }
  for (auto& seg : r.elements) {
    for (auto& f : seg.func_indices) f = map(f);
  }
  for (auto& ex : r.exports) {
    if (ex.kind == ExportKind::Func) ex.index = map(ex.index);
  }
  if (r.start) r.start = map(*r.start);
  std::map<uint32_t, std::string> remapped;
  for (const auto& [index, name] : r.names.func_names) remapped[map(index)] = name;
  r.names.func_names = std::move(remapped);
  return r;
}

WasmModule remap_function_indices(const WasmModule& m, uint32_t inserted_import_count) {
  if (inserted_import_count == 0) return m;
  uint32_t imports_after = m.num_func_imports();
  uint32_t first_defined_before = imports_after - inserted_import_count;
  return remap_func_refs(m, [&](uint32_t f) {
    return f >= first_defined_before ? f + inserted_import_count : f;
  });
}

}  // namespace wssp::wasm
