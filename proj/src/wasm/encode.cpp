/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "wasm/encode.hpp"

#include <cstring>

#include "wasm/leb128.hpp"

namespace wssp::wasm {

namespace {

class Writer {
 public:
  std::vector<uint8_t>& out() { return buf_; }

  void u8(uint8_t b) { buf_.push_back(b); }
  void u32(uint32_t v) { leb::write_u32(buf_, v); }
  void s32(int32_t v) { leb::write_s32(buf_, v); }
  void s64(int64_t v) { leb::write_s64(buf_, v); }
  void raw(const std::vector<uint8_t>& bytes) { buf_.insert(buf_.end(), bytes.begin(), bytes.end()); }
  void name(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }

 private:
  std::vector<uint8_t> buf_;
};

void write_valtype(Writer& w, ValType t) { w.u8(static_cast<uint8_t>(t)); }

void write_limits(Writer& w, uint32_t min, const std::optional<uint32_t>& max) {
  w.u8(max ? 1 : 0);
  w.u32(min);
  if (max) w.u32(*max);
}

void write_global_type(Writer& w, const GlobalType& gt) {
  write_valtype(w, gt.type);
  w.u8(gt.mut ? 1 : 0);
}

void write_const_expr(Writer& w, const ConstExpr& e) {
  switch (e.kind) {
    case ConstExpr::Kind::I32Const:
      w.u8(0x41);
      w.s32(static_cast<int32_t>(e.bits));
      break;
    case ConstExpr::Kind::I64Const:
      w.u8(0x42);
      w.s64(static_cast<int64_t>(e.bits));
      break;
    case ConstExpr::Kind::F32Const: {
      w.u8(0x43);
      uint32_t v = static_cast<uint32_t>(e.bits);
      uint8_t b[4];
      std::memcpy(b, &v, 4);
      for (uint8_t x : b) w.u8(x);
      break;
    }
    case ConstExpr::Kind::F64Const: {
      w.u8(0x44);
      uint64_t v = e.bits;
      uint8_t b[8];
      std::memcpy(b, &v, 8);
      for (uint8_t x : b) w.u8(x);
      break;
    }
    case ConstExpr::Kind::GlobalGet:
      w.u8(0x23);
      w.u32(static_cast<uint32_t>(e.bits));
      break;
  }
  w.u8(0x0B);
}

void write_instr(Writer& w, const Instr& ins) {
  if (ins.op == Op::Opaque) {
    w.u8(ins.raw_opcode);
    w.raw(ins.raw);
    return;
  }
  w.u8(static_cast<uint8_t>(ins.op));
  switch (ins.op) {
    case Op::Block:
    case Op::Loop:
    case Op::If:
      w.u8(static_cast<uint8_t>(ins.a));
      break;
    case Op::Br:
    case Op::BrIf:
    case Op::Call:
    case Op::LocalGet:
    case Op::LocalSet:
    case Op::LocalTee:
    case Op::GlobalGet:
    case Op::GlobalSet:
      w.u32(ins.a);
      break;
    case Op::BrTable:
      w.u32(static_cast<uint32_t>(ins.table.size()));
      for (uint32_t t : ins.table) w.u32(t);
      w.u32(ins.b);
      break;
    case Op::CallIndirect:
      w.u32(ins.a);
      w.u8(0x00);
      break;
    case Op::I32Load:
    case Op::I32Load8S:
    case Op::I32Load8U:
    case Op::I32Load16S:
    case Op::I32Load16U:
    case Op::I32Store:
    case Op::I32Store8:
    case Op::I32Store16:
      w.u32(ins.a);
      w.u32(ins.b);
      break;
    case Op::MemorySize:
    case Op::MemoryGrow:
      w.u8(0x00);
      break;
    case Op::I32Const:
      w.s32(static_cast<int32_t>(ins.n));
      break;
    case Op::I64Const:
      w.s64(ins.n);
      break;
    default:
      break;
  }
}

// Sections are size-prefixed; build the payload then splice.
class SectionSink {
 public:
  explicit SectionSink(std::vector<uint8_t>& out) : out_(out) {}

  void section(uint8_t id, Writer&& payload) {
    if (payload.out().empty()) return;
    out_.push_back(id);
    leb::write_u32(out_, static_cast<uint32_t>(payload.out().size()));
    out_.insert(out_.end(), payload.out().begin(), payload.out().end());
  }

  void custom(const CustomSection& cs) {
    Writer w;
    w.name(cs.name);
    w.raw(cs.bytes);
    section(0, std::move(w));
  }

 private:
  std::vector<uint8_t>& out_;
};

void emit_customs_after(const WasmModule& m, SectionSink& sink, uint8_t section_id) {
  for (const auto& cs : m.custom) {
    if (cs.after_section == section_id) sink.custom(cs);
  }
}

Writer name_section_payload(const NameMap& names) {
  Writer w;
  // Subsections must appear in increasing id order.
  auto emit_map = [&w](uint8_t id, const std::map<uint32_t, std::string>& map) {
    if (map.empty()) return;
    Writer sub;
    sub.u32(static_cast<uint32_t>(map.size()));
    for (const auto& [index, name] : map) {
      sub.u32(index);
      sub.name(name);
    }
    w.u8(id);
    w.u32(static_cast<uint32_t>(sub.out().size()));
    w.raw(sub.out());
  };
  auto emit_extras_below = [&](uint8_t limit) {
    for (const auto& [id, bytes] : names.extra_subsections) {
      if (id < limit) {
        w.u8(id);
        w.u32(static_cast<uint32_t>(bytes.size()));
        w.raw(bytes);
      }
    }
  };
  emit_extras_below(1);
  emit_map(1, names.func_names);
  for (const auto& [id, bytes] : names.extra_subsections) {
    if (id > 1 && id < 7) {
      w.u8(id);
      w.u32(static_cast<uint32_t>(bytes.size()));
      w.raw(bytes);
    }
  }
  emit_map(7, names.global_names);
  for (const auto& [id, bytes] : names.extra_subsections) {
    if (id > 7) {
      w.u8(id);
      w.u32(static_cast<uint32_t>(bytes.size()));
      w.raw(bytes);
    }
  }
  return w;
}

}  // namespace

std::vector<uint8_t> encode(const WasmModule& m) {
  if (m.functions.size() != m.code.size()) {
    throw EncodeError("function and code sections out of sync");
  }

  std::vector<uint8_t> out = {0x00, 0x61, 0x73, 0x6D, 0x01, 0x00, 0x00, 0x00};
  SectionSink sink(out);
  emit_customs_after(m, sink, 0);

  {  // type
    Writer w;
    if (!m.types.empty()) {
      w.u32(static_cast<uint32_t>(m.types.size()));
      for (const auto& sig : m.types) {
        w.u8(0x60);
        w.u32(static_cast<uint32_t>(sig.params.size()));
        for (ValType t : sig.params) write_valtype(w, t);
        w.u32(static_cast<uint32_t>(sig.results.size()));
        for (ValType t : sig.results) write_valtype(w, t);
      }
    }
    sink.section(1, std::move(w));
    emit_customs_after(m, sink, 1);
  }
  {  // import
    Writer w;
    if (!m.imports.empty()) {
      w.u32(static_cast<uint32_t>(m.imports.size()));
      for (const auto& imp : m.imports) {
        w.name(imp.module);
        w.name(imp.field);
        w.u8(static_cast<uint8_t>(imp.kind));
        switch (imp.kind) {
          case ImportKind::Func:
            w.u32(std::get<uint32_t>(imp.desc));
            break;
          case ImportKind::Table: {
            const auto& t = std::get<TableLimits>(imp.desc);
            w.u8(0x70);
            write_limits(w, t.min_entries, t.max_entries);
            break;
          }
          case ImportKind::Memory: {
            const auto& mem = std::get<MemoryLimits>(imp.desc);
            write_limits(w, mem.min_pages, mem.max_pages);
            break;
          }
          case ImportKind::Global:
            write_global_type(w, std::get<GlobalType>(imp.desc));
            break;
        }
      }
    }
    sink.section(2, std::move(w));
    emit_customs_after(m, sink, 2);
  }
  {  // function
    Writer w;
    if (!m.functions.empty()) {
      w.u32(static_cast<uint32_t>(m.functions.size()));
      for (uint32_t t : m.functions) w.u32(t);
    }
    sink.section(3, std::move(w));
    emit_customs_after(m, sink, 3);
  }
  {  // table
    Writer w;
    if (!m.tables.empty()) {
      w.u32(static_cast<uint32_t>(m.tables.size()));
      for (const auto& t : m.tables) {
        w.u8(0x70);
        write_limits(w, t.min_entries, t.max_entries);
      }
    }
    sink.section(4, std::move(w));
    emit_customs_after(m, sink, 4);
  }
  {  // memory
    Writer w;
    if (!m.memories.empty()) {
      w.u32(static_cast<uint32_t>(m.memories.size()));
      for (const auto& mem : m.memories) write_limits(w, mem.min_pages, mem.max_pages);
    }
    sink.section(5, std::move(w));
    emit_customs_after(m, sink, 5);
  }
  {  // global
    Writer w;
    if (!m.globals.empty()) {
      w.u32(static_cast<uint32_t>(m.globals.size()));
      for (const auto& g : m.globals) {
        write_global_type(w, g.type);
        write_const_expr(w, g.init);
      }
    }
    sink.section(6, std::move(w));
    emit_customs_after(m, sink, 6);
  }
  {  // export
    Writer w;
    if (!m.exports.empty()) {
      w.u32(static_cast<uint32_t>(m.exports.size()));
      for (const auto& ex : m.exports) {
        w.name(ex.name);
        w.u8(static_cast<uint8_t>(ex.kind));
        w.u32(ex.index);
      }
    }
    sink.section(7, std::move(w));
    emit_customs_after(m, sink, 7);
  }
  {  // start
    Writer w;
    if (m.start) w.u32(*m.start);
    sink.section(8, std::move(w));
    emit_customs_after(m, sink, 8);
  }
  {  // element
    Writer w;
    if (!m.elements.empty()) {
      w.u32(static_cast<uint32_t>(m.elements.size()));
      for (const auto& seg : m.elements) {
        w.u32(seg.table_index);
        write_const_expr(w, seg.offset);
        w.u32(static_cast<uint32_t>(seg.func_indices.size()));
        for (uint32_t f : seg.func_indices) w.u32(f);
      }
    }
    sink.section(9, std::move(w));
    emit_customs_after(m, sink, 9);
  }
  {  // code
    Writer w;
    if (!m.code.empty()) {
      w.u32(static_cast<uint32_t>(m.code.size()));
      for (const auto& body : m.code) {
        Writer bw;
        bw.u32(static_cast<uint32_t>(body.locals.size()));
        for (const auto& [count, vt] : body.locals) {
          bw.u32(count);
          write_valtype(bw, vt);
        }
        for (const auto& ins : body.instrs) write_instr(bw, ins);
        w.u32(static_cast<uint32_t>(bw.out().size()));
        w.raw(bw.out());
      }
    }
    sink.section(10, std::move(w));
    emit_customs_after(m, sink, 10);
  }
  {  // data
    Writer w;
    if (!m.data.empty()) {
      w.u32(static_cast<uint32_t>(m.data.size()));
      for (const auto& seg : m.data) {
        w.u32(seg.memory_index);
        write_const_expr(w, seg.offset);
        w.u32(static_cast<uint32_t>(seg.bytes.size()));
        w.raw(seg.bytes);
      }
    }
    sink.section(11, std::move(w));
    emit_customs_after(m, sink, 11);
  }
  if (!m.names.empty()) {
    Writer w;
    w.name("name");
    Writer payload = name_section_payload(m.names);
    w.raw(payload.out());
    sink.section(0, std::move(w));
  }
  return out;
}

}  // namespace wssp::wasm
