/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "wasm/decode.hpp"

#include <cstring>

#include "wasm/leb128.hpp"
#include "wasm/opcodes.hpp"

namespace wssp::wasm {

namespace {

constexpr uint8_t kMagic[8] = {0x00, 0x61, 0x73, 0x6D, 0x01, 0x00, 0x00, 0x00};

class Reader {
 public:
  Reader(const uint8_t* data, size_t len, size_t base_offset = 0)
      : data_(data), len_(len), base_(base_offset) {}

  size_t pos() const { return pos_; }
  size_t offset() const { return base_ + pos_; }
  size_t remaining() const { return len_ - pos_; }
  bool done() const { return pos_ >= len_; }

  [[noreturn]] void fail(const std::string& reason) const { throw MalformedModule(offset(), reason); }

  uint8_t byte() {
    if (pos_ >= len_) fail("unexpected end of input");
    return data_[pos_++];
  }

  uint8_t peek() const {
    if (pos_ >= len_) fail("unexpected end of input");
    return data_[pos_];
  }

  uint32_t u32(const char* what) {
    uint32_t v = 0;
    if (!leb::read_u32(data_, len_, pos_, v)) fail(std::string("bad LEB128 ") + what);
    return v;
  }

  int32_t s32(const char* what) {
    int32_t v = 0;
    if (!leb::read_s32(data_, len_, pos_, v)) fail(std::string("bad signed LEB128 ") + what);
    return v;
  }

  int64_t s64(const char* what) {
    int64_t v = 0;
    if (!leb::read_s64(data_, len_, pos_, v)) fail(std::string("bad signed LEB128 ") + what);
    return v;
  }

  std::vector<uint8_t> bytes(size_t n, const char* what) {
    if (remaining() < n) fail(std::string("truncated ") + what);
    std::vector<uint8_t> out(data_ + pos_, data_ + pos_ + n);
    pos_ += n;
    return out;
  }

  std::string name() {
    uint32_t n = u32("name length");
    if (remaining() < n) fail("truncated name");
    std::string s(reinterpret_cast<const char*>(data_ + pos_), n);
    pos_ += n;
    return s;
  }

  Reader sub(size_t n, const char* what) {
    if (remaining() < n) fail(std::string("truncated ") + what);
    Reader r(data_ + pos_, n, offset());
    pos_ += n;
    return r;
  }

  // Copy of the bytes consumed since `from` (a previous pos()).
  std::vector<uint8_t> slice(size_t from) const {
    return std::vector<uint8_t>(data_ + from, data_ + pos_);
  }

 private:
  const uint8_t* data_;
  size_t len_;
  size_t base_;
  size_t pos_ = 0;
};

ValType read_valtype(Reader& r) {
  uint8_t b = r.byte();
  if (!is_valtype_byte(b)) r.fail("invalid value type");
  return static_cast<ValType>(b);
}

MemoryLimits read_limits(Reader& r) {
  uint8_t flags = r.byte();
  if (flags > 1) r.fail("invalid limits flags");
  MemoryLimits lim;
  lim.min_pages = r.u32("limits min");
  if (flags == 1) {
    lim.max_pages = r.u32("limits max");
    if (*lim.max_pages < lim.min_pages) r.fail("limits max below min");
  }
  return lim;
}

GlobalType read_global_type(Reader& r) {
  GlobalType gt;
  gt.type = read_valtype(r);
  uint8_t mut = r.byte();
  if (mut > 1) r.fail("invalid mutability flag");
  gt.mut = mut == 1;
  return gt;
}

ConstExpr read_const_expr(Reader& r) {
  ConstExpr e;
  uint8_t op = r.byte();
  switch (op) {
    case 0x41:
      e.kind = ConstExpr::Kind::I32Const;
      e.bits = static_cast<uint32_t>(r.s32("i32 const"));
      break;
    case 0x42:
      e.kind = ConstExpr::Kind::I64Const;
      e.bits = static_cast<uint64_t>(r.s64("i64 const"));
      break;
    case 0x43: {
      e.kind = ConstExpr::Kind::F32Const;
      auto b = r.bytes(4, "f32 const");
      uint32_t v = 0;
      std::memcpy(&v, b.data(), 4);
      e.bits = v;
      break;
    }
    case 0x44: {
      e.kind = ConstExpr::Kind::F64Const;
      auto b = r.bytes(8, "f64 const");
      uint64_t v = 0;
      std::memcpy(&v, b.data(), 8);
      e.bits = v;
      break;
    }
    case 0x23:
      e.kind = ConstExpr::Kind::GlobalGet;
      e.bits = r.u32("global index");
      break;
    default:
      r.fail("unsupported constant expression opcode");
  }
  if (r.byte() != 0x0B) r.fail("constant expression not terminated by end");
  return e;
}

Instr read_instr(Reader& r) {
  size_t at = r.offset();
  uint8_t opcode = r.byte();
  Instr ins;
  if (auto sop = structured_op(opcode)) {
    ins.op = *sop;
    switch (*sop) {
      case Op::Block:
      case Op::Loop:
      case Op::If: {
        uint8_t bt = r.byte();
        if (bt != kBlockTypeEmpty && !is_valtype_byte(bt)) {
          throw MalformedModule(at, "unsupported block type");
        }
        ins.a = bt;
        break;
      }
      case Op::Br:
      case Op::BrIf:
        ins.a = r.u32("label index");
        break;
      case Op::BrTable: {
        uint32_t count = r.u32("br_table count");
        if (count > r.remaining()) r.fail("br_table count exceeds input");
        ins.table.reserve(count);
        for (uint32_t i = 0; i < count; i++) ins.table.push_back(r.u32("br_table target"));
        ins.b = r.u32("br_table default");
        break;
      }
      case Op::Call:
        ins.a = r.u32("function index");
        break;
      case Op::CallIndirect:
        ins.a = r.u32("type index");
        if (r.byte() != 0x00) throw MalformedModule(at, "call_indirect reserved byte must be zero");
        break;
      case Op::LocalGet:
      case Op::LocalSet:
      case Op::LocalTee:
      case Op::GlobalGet:
      case Op::GlobalSet:
        ins.a = r.u32("index");
        break;
      case Op::I32Load:
      case Op::I32Load8S:
      case Op::I32Load8U:
      case Op::I32Load16S:
      case Op::I32Load16U:
      case Op::I32Store:
      case Op::I32Store8:
      case Op::I32Store16:
        ins.a = r.u32("alignment");
        ins.b = r.u32("offset");
        break;
      case Op::MemorySize:
      case Op::MemoryGrow:
        if (r.byte() != 0x00) throw MalformedModule(at, "memory index must be zero");
        break;
      case Op::I32Const:
        ins.n = r.s32("i32 literal");
        break;
      case Op::I64Const:
        ins.n = r.s64("i64 literal");
        break;
      default:
        break;  // no immediates
    }
    return ins;
  }

  ins.op = Op::Opaque;
  ins.raw_opcode = opcode;
  switch (opaque_imm_class(opcode)) {
    case ImmClass::None:
      break;
    case ImmClass::MemArg: {
      // keep the original bytes so padded encodings survive round-trips
      size_t start = r.pos();
      r.u32("alignment");
      r.u32("offset");
      ins.raw = r.slice(start);
      break;
    }
    case ImmClass::F32:
      ins.raw = r.bytes(4, "f32 immediate");
      break;
    case ImmClass::F64:
      ins.raw = r.bytes(8, "f64 immediate");
      break;
    case ImmClass::Illegal:
      throw MalformedModule(at, "opcode outside core 1.0");
  }
  return ins;
}

FuncBody read_func_body(Reader& r, size_t body_size) {
  Reader body = r.sub(body_size, "function body");
  FuncBody fb;
  uint32_t decl_count = body.u32("local declaration count");
  uint64_t total_locals = 0;
  for (uint32_t i = 0; i < decl_count; i++) {
    uint32_t count = body.u32("local count");
    ValType vt = read_valtype(body);
    total_locals += count;
    if (total_locals > 100000) body.fail("too many locals");
    fb.locals.emplace_back(count, vt);
  }
  int depth = 0;
  bool terminated = false;
  while (!body.done()) {
    Instr ins = read_instr(body);
    if (ins.op == Op::Block || ins.op == Op::Loop || ins.op == Op::If) depth++;
    if (ins.op == Op::End) {
      if (depth == 0) {
        fb.instrs.push_back(ins);
        terminated = true;
        break;
      }
      depth--;
    }
    if (ins.op == Op::Else && depth == 0) body.fail("else outside if");
    fb.instrs.push_back(ins);
  }
  if (!terminated) body.fail("function body not terminated by end");
  if (!body.done()) body.fail("trailing bytes after function body end");
  return fb;
}

void parse_name_section(Reader r, NameMap& names) {
  while (!r.done()) {
    uint8_t subsection_id = r.byte();
    uint32_t size = r.u32("name subsection size");
    Reader sub = r.sub(size, "name subsection");
    if (subsection_id == 1 || subsection_id == 7) {
      auto& map = subsection_id == 1 ? names.func_names : names.global_names;
      uint32_t count = sub.u32("name map count");
      for (uint32_t i = 0; i < count; i++) {
        uint32_t index = sub.u32("name map index");
        map[index] = sub.name();
      }
    } else {
      auto bytes = sub.bytes(size, "name subsection payload");
      names.extra_subsections.emplace_back(subsection_id, std::move(bytes));
    }
  }
}

}  // namespace

WasmModule decode(std::span<const uint8_t> input) {
  if (input.size() < 8) throw MalformedModule(0, "shorter than magic and version");
  if (std::memcmp(input.data(), kMagic, 4) != 0) throw MalformedModule(0, "bad magic");
  if (std::memcmp(input.data() + 4, kMagic + 4, 4) != 0) {
    throw MalformedModule(4, "unsupported version (expect 1)");
  }

  WasmModule m;
  Reader r(input.data(), input.size());
  r.bytes(8, "header");

  int last_known_section = 0;
  bool seen_code = false;
  size_t declared_funcs = 0;

  while (!r.done()) {
    size_t section_at = r.offset();
    uint8_t id = r.byte();
    uint32_t size = r.u32("section size");
    Reader s = r.sub(size, "section payload");

    if (id != 0) {
      if (id > 11) throw MalformedModule(section_at, "unknown section id");
      if (id <= last_known_section) throw MalformedModule(section_at, "section out of order or duplicated");
      last_known_section = id;
    }

    switch (id) {
      case 0: {  // custom
        CustomSection cs;
        cs.name = s.name();
        cs.after_section = static_cast<uint8_t>(last_known_section);
        if (cs.name == "name") {
          parse_name_section(s.sub(s.remaining(), "name section"), m.names);
        } else {
          cs.bytes = s.bytes(s.remaining(), "custom section payload");
          m.custom.push_back(std::move(cs));
        }
        break;
      }
      case 1: {  // type
        uint32_t count = s.u32("type count");
        for (uint32_t i = 0; i < count; i++) {
          if (s.byte() != 0x60) s.fail("expected func type tag 0x60");
          FuncSignature sig;
          uint32_t np = s.u32("param count");
          for (uint32_t p = 0; p < np; p++) sig.params.push_back(read_valtype(s));
          uint32_t nr = s.u32("result count");
          if (nr > 1) s.fail("multiple results not in core 1.0");
          for (uint32_t q = 0; q < nr; q++) sig.results.push_back(read_valtype(s));
          m.types.push_back(std::move(sig));
        }
        break;
      }
      case 2: {  // import
        uint32_t count = s.u32("import count");
        for (uint32_t i = 0; i < count; i++) {
          Import imp;
          imp.module = s.name();
          imp.field = s.name();
          uint8_t kind = s.byte();
          switch (kind) {
            case 0:
              imp.kind = ImportKind::Func;
              imp.desc = s.u32("import type index");
              break;
            case 1: {
              imp.kind = ImportKind::Table;
              if (s.byte() != 0x70) s.fail("table element type must be funcref");
              MemoryLimits lim = read_limits(s);
              imp.desc = TableLimits{lim.min_pages, lim.max_pages};
              break;
            }
            case 2:
              imp.kind = ImportKind::Memory;
              imp.desc = read_limits(s);
              break;
            case 3:
              imp.kind = ImportKind::Global;
              imp.desc = read_global_type(s);
              break;
            default:
              s.fail("invalid import kind");
          }
          m.imports.push_back(std::move(imp));
        }
        break;
      }
      case 3: {  // function
        uint32_t count = s.u32("function count");
        declared_funcs = count;
        for (uint32_t i = 0; i < count; i++) m.functions.push_back(s.u32("type index"));
        break;
      }
      case 4: {  // table
        uint32_t count = s.u32("table count");
        for (uint32_t i = 0; i < count; i++) {
          if (s.byte() != 0x70) s.fail("table element type must be funcref");
          MemoryLimits lim = read_limits(s);
          m.tables.push_back(TableLimits{lim.min_pages, lim.max_pages});
        }
        break;
      }
      case 5: {  // memory
        uint32_t count = s.u32("memory count");
        for (uint32_t i = 0; i < count; i++) m.memories.push_back(read_limits(s));
        break;
      }
      case 6: {  // global
        uint32_t count = s.u32("global count");
        for (uint32_t i = 0; i < count; i++) {
          GlobalDef g;
          g.type = read_global_type(s);
          g.init = read_const_expr(s);
          m.globals.push_back(g);
        }
        break;
      }
      case 7: {  // export
        uint32_t count = s.u32("export count");
        for (uint32_t i = 0; i < count; i++) {
          Export ex;
          ex.name = s.name();
          uint8_t kind = s.byte();
          if (kind > 3) s.fail("invalid export kind");
          ex.kind = static_cast<ExportKind>(kind);
          ex.index = s.u32("export index");
          m.exports.push_back(std::move(ex));
        }
        break;
      }
      case 8:  // start
        m.start = s.u32("start function index");
        break;
      case 9: {  // element
        uint32_t count = s.u32("element segment count");
        for (uint32_t i = 0; i < count; i++) {
          ElementSegment seg;
          seg.table_index = s.u32("element table index");
          seg.offset = read_const_expr(s);
          uint32_t n = s.u32("element function count");
          if (n > s.remaining()) s.fail("element count exceeds input");
          for (uint32_t j = 0; j < n; j++) seg.func_indices.push_back(s.u32("element function index"));
          m.elements.push_back(std::move(seg));
        }
        break;
      }
      case 10: {  // code
        seen_code = true;
        uint32_t count = s.u32("code entry count");
        if (count != declared_funcs) s.fail("code count does not match function section");
        for (uint32_t i = 0; i < count; i++) {
          uint32_t body_size = s.u32("body size");
          m.code.push_back(read_func_body(s, body_size));
        }
        break;
      }
      case 11: {  // data
        uint32_t count = s.u32("data segment count");
        for (uint32_t i = 0; i < count; i++) {
          DataSegment seg;
          seg.memory_index = s.u32("data memory index");
          seg.offset = read_const_expr(s);
          uint32_t n = s.u32("data byte count");
          seg.bytes = s.bytes(n, "data bytes");
          m.data.push_back(std::move(seg));
        }
        break;
      }
      default:
        throw MalformedModule(section_at, "unknown section id");
    }
    if (!s.done()) s.fail("trailing bytes in section");
  }

  if (declared_funcs > 0 && !seen_code) throw MalformedModule(input.size(), "function section without code section");
  if (m.num_memories() > 1) throw MalformedModule(0, "multiple memories not supported");
  return m;
}

}  // namespace wssp::wasm
