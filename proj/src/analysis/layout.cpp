/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "analysis/layout.hpp"

#include <algorithm>
#include <set>

namespace wssp::analysis {

using wasm::Instr;
using wasm::Op;
using wasm::WasmModule;

const char* layout_kind_name(LayoutKind k) {
  switch (k) {
    case LayoutKind::StackFirst: return "stack-first";
    case LayoutKind::NoStackFirst: return "no-stack-first";
    case LayoutKind::Unknown: return "unknown";
  }
  return "?";
}

const char* frame_pattern_name(FramePattern p) {
  switch (p) {
    case FramePattern::TeeSet: return "tee-set";
    case FramePattern::GetSubSet: return "get-sub-set";
    case FramePattern::Unrecognized: return "unrecognized";
  }
  return "?";
}

namespace {

struct PrologueMatch {
  uint32_t sp_global = 0;
  uint32_t frame_size = 0;
  std::optional<uint32_t> frame_local;
  uint32_t end_index = 0;  // index of the closing global.set
  FramePattern pattern = FramePattern::Unrecognized;
};

// global.get g; i32.const k; i32.sub; (local.tee t)?; global.set g
std::optional<PrologueMatch> match_prologue(const std::vector<Instr>& ins, size_t at) {
  if (at + 3 >= ins.size()) return std::nullopt;
  if (ins[at].op != Op::GlobalGet) return std::nullopt;
  if (ins[at + 1].op != Op::I32Const) return std::nullopt;
  if (ins[at + 2].op != Op::I32Sub) return std::nullopt;
  PrologueMatch pm;
  pm.sp_global = ins[at].a;
  int64_t k = ins[at + 1].n;
  if (k < 0) return std::nullopt;
  pm.frame_size = static_cast<uint32_t>(k);
  if (ins[at + 3].op == Op::LocalTee) {
    if (at + 4 >= ins.size() || ins[at + 4].op != Op::GlobalSet || ins[at + 4].a != pm.sp_global) {
      return std::nullopt;
    }
    pm.frame_local = ins[at + 3].a;
    pm.end_index = static_cast<uint32_t>(at + 4);
    pm.pattern = FramePattern::TeeSet;
    return pm;
  }
  if (ins[at + 3].op == Op::GlobalSet && ins[at + 3].a == pm.sp_global) {
    pm.end_index = static_cast<uint32_t>(at + 3);
    pm.pattern = FramePattern::GetSubSet;
    return pm;
  }
  return std::nullopt;
}

struct EpilogueMatch {
  uint32_t start = 0;
  uint32_t end = 0;  // index of the global.set
  uint32_t frame_size = 0;
};

// (local.get t | global.get sp); i32.const k; i32.add; global.set sp
std::optional<EpilogueMatch> match_epilogue(const std::vector<Instr>& ins, size_t at,
                                            uint32_t sp_global,
                                            std::optional<uint32_t> frame_local) {
  if (at + 3 >= ins.size()) return std::nullopt;
  const Instr& first = ins[at];
  bool base_ok = (first.op == Op::GlobalGet && first.a == sp_global) ||
                 (frame_local && first.op == Op::LocalGet && first.a == *frame_local);
  if (!base_ok) return std::nullopt;
  if (ins[at + 1].op != Op::I32Const || ins[at + 1].n < 0) return std::nullopt;
  if (ins[at + 2].op != Op::I32Add) return std::nullopt;
  if (ins[at + 3].op != Op::GlobalSet || ins[at + 3].a != sp_global) return std::nullopt;
  return EpilogueMatch{static_cast<uint32_t>(at), static_cast<uint32_t>(at + 3),
                       static_cast<uint32_t>(ins[at + 1].n)};
}

bool is_value_producer(Op op) {
  switch (op) {
    case Op::I32Const:
    case Op::I64Const:
    case Op::LocalGet:
    case Op::GlobalGet:
    case Op::I32Load:
    case Op::I32Load8S:
    case Op::I32Load8U:
    case Op::I32Load16S:
    case Op::I32Load16U:
      return true;
    default:
      return false;
  }
}

FrameInfo analyze_function(uint32_t func_index, const wasm::FuncBody& body, uint32_t sp_global) {
  FrameInfo info;
  info.func_index = func_index;
  info.sp_global = sp_global;
  const auto& ins = body.instrs;

  for (const Instr& i : ins) {
    if ((i.op == Op::GlobalGet || i.op == Op::GlobalSet) && i.a == sp_global) {
      info.uses_sp = true;
      break;
    }
  }
  if (!info.uses_sp) return info;

  auto pm = match_prologue(ins, 0);
  if (!pm || pm->sp_global != sp_global || pm->frame_size == 0) return info;
  info.frame_local = pm->frame_local;
  info.pattern = pm->pattern;
  info.prologue_span = {0, pm->end_index};

  // Collect epilogues and make sure every write to sp is accounted for.
  std::set<uint32_t> epilogue_sets;
  bool consistent = true;
  for (size_t i = pm->end_index + 1; i < ins.size(); i++) {
    if (auto em = match_epilogue(ins, i, sp_global, pm->frame_local)) {
      if (em->frame_size != pm->frame_size) consistent = false;
      info.epilogue_sites.emplace_back(em->start, em->end);
      epilogue_sets.insert(em->end);
      i = em->end;  // continue after the matched sequence
      continue;
    }
    if (ins[i].op == Op::GlobalSet && ins[i].a == sp_global) consistent = false;
  }
  if (!consistent || info.epilogue_sites.empty()) return info;

  // Every function exit must restore sp: returns, branches to the function
  // label, and the fallthrough end.
  auto exit_covered = [&](size_t at) {
    size_t i = at;
    size_t steps = 0;
    while (i > 0 && steps < 8) {
      i--;
      steps++;
      if (epilogue_sets.count(static_cast<uint32_t>(i))) return true;
      if (ins[i].op == Op::Return || ins[i].op == Op::Unreachable) return true;
      if (!is_value_producer(ins[i].op)) return false;
    }
    return false;
  };

  uint32_t depth = 0;
  bool all_exits_covered = true;
  for (size_t i = 0; i < ins.size(); i++) {
    switch (ins[i].op) {
      case Op::Block:
      case Op::Loop:
      case Op::If:
        depth++;
        break;
      case Op::End:
        if (depth > 0) {
          depth--;
        } else if (i + 1 == ins.size()) {
          // fallthrough exit
          if (!exit_covered(i)) all_exits_covered = false;
        }
        break;
      case Op::Return:
        if (!exit_covered(i)) all_exits_covered = false;
        break;
      case Op::Br:
      case Op::BrIf:
        if (ins[i].a == depth && !exit_covered(i)) all_exits_covered = false;
        break;
      case Op::BrTable: {
        bool exits = ins[i].b == depth;
        for (uint32_t t : ins[i].table) exits = exits || t == depth;
        if (exits && !exit_covered(i)) all_exits_covered = false;
        break;
      }
      default:
        break;
    }
  }
  if (!all_exits_covered) return info;

  info.frame_size = pm->frame_size;
  info.recognized = true;
  return info;
}

}  // namespace

std::optional<uint32_t> find_stack_pointer(const WasmModule& m, bool* ambiguous) {
  if (ambiguous) *ambiguous = false;

  if (auto named = m.find_global_by_name("__stack_pointer")) {
    wasm::GlobalType gt = m.global_type(*named);
    if (gt.mut && gt.type == wasm::ValType::I32) return named;
  }

  std::set<uint32_t> candidates;
  for (const auto& body : m.code) {
    if (auto pm = match_prologue(body.instrs, 0)) {
      wasm::GlobalType gt = m.global_type(pm->sp_global);
      if (gt.mut && gt.type == wasm::ValType::I32) candidates.insert(pm->sp_global);
    }
  }
  if (candidates.size() == 1) return *candidates.begin();
  if (candidates.size() > 1 && ambiguous) *ambiguous = true;
  return std::nullopt;
}

std::vector<FrameInfo> detect_frames(const WasmModule& m, uint32_t sp_global) {
  std::vector<FrameInfo> frames;
  uint32_t imports = m.num_func_imports();
  for (uint32_t i = 0; i < m.code.size(); i++) {
    frames.push_back(analyze_function(imports + i, m.code[i], sp_global));
  }
  return frames;
}

LayoutReport classify_layout(const WasmModule& m) {
  LayoutReport report;
  bool ambiguous = false;
  report.sp_global = find_stack_pointer(m, &ambiguous);
  report.ambiguous_sp = ambiguous;
  if (ambiguous) report.evidence.push_back("multiple stack-pointer candidates; refusing to pick");
  if (!report.sp_global) {
    report.evidence.push_back("no stack pointer global identified");
    return report;
  }
  report.evidence.push_back("stack pointer: global " + std::to_string(*report.sp_global));

  // Initial stack top requires a defined global with a constant initializer.
  uint32_t global_imports = m.num_global_imports();
  if (*report.sp_global >= global_imports) {
    const auto& def = m.globals[*report.sp_global - global_imports];
    if (def.init.kind == wasm::ConstExpr::Kind::I32Const) {
      report.sp_initial = static_cast<uint32_t>(def.init.as_i32());
    }
  }
  if (!report.sp_initial) {
    report.evidence.push_back("stack pointer initial value not a constant");
    return report;
  }
  report.evidence.push_back("sp initial: " + std::to_string(*report.sp_initial));

  bool all_const = true;
  std::optional<AddrRange> range;
  for (const auto& seg : m.data) {
    if (seg.offset.kind != wasm::ConstExpr::Kind::I32Const) {
      all_const = false;
      continue;
    }
    uint32_t lo = static_cast<uint32_t>(seg.offset.as_i32());
    uint32_t hi = lo + static_cast<uint32_t>(seg.bytes.size());
    if (!range) {
      range = AddrRange{lo, hi};
    } else {
      range->lo = std::min(range->lo, lo);
      range->hi = std::max(range->hi, hi);
    }
  }
  if (!range || !all_const) {
    report.evidence.push_back(all_const ? "no active data segments"
                                        : "data segment with non-constant offset");
    return report;
  }
  report.data_range = range;
  report.evidence.push_back("data range: [" + std::to_string(range->lo) + ", " +
                            std::to_string(range->hi) + ")");

  uint32_t sp0 = *report.sp_initial;
  if (sp0 <= range->lo) {
    report.layout = LayoutKind::StackFirst;
    report.stack_region = AddrRange{0, sp0};
    report.evidence.push_back("sp initial at or below data: stack-first");
  } else if (sp0 >= range->hi) {
    report.layout = LayoutKind::NoStackFirst;
    report.stack_region = AddrRange{range->hi, sp0};
    report.evidence.push_back("sp initial at or above data end: no-stack-first");
  } else {
    report.evidence.push_back("sp initial inside data range: unknown layout");
  }
  return report;
}

std::optional<bool> reachable_by_ascending_overflow(const LayoutReport& report,
                                                    uint32_t target_addr) {
  if (report.layout == LayoutKind::Unknown || !report.stack_region) return std::nullopt;
  return target_addr > report.stack_region->lo;
}

}  // namespace wssp::analysis
