/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "ssp/pass.hpp"

#include <algorithm>
#include <map>

#include "wasm/builder.hpp"
#include "wasm/encode.hpp"
#include "wasm/validate.hpp"

namespace wssp::ssp {

using namespace wasm::ins;
using wasm::FuncBody;
using wasm::FuncSignature;
using wasm::Instr;
using wasm::Op;
using wasm::ValType;
using wasm::WasmModule;

namespace {

const FuncSignature kRandomGetSig{{ValType::I32, ValType::I32}, {ValType::I32}};
const FuncSignature kVoidSig{{}, {}};

uint32_t add_or_reuse_type(WasmModule& m, const FuncSignature& sig) {
  for (size_t i = 0; i < m.types.size(); i++) {
    if (m.types[i] == sig) return static_cast<uint32_t>(i);
  }
  m.types.push_back(sig);
  return static_cast<uint32_t>(m.types.size() - 1);
}

struct GuardAccess {
  // instructions that push the current guard reference value
  std::vector<Instr> read;
};

// after the prologue: store the guard into the slot and zero the tail
std::vector<Instr> canary_store_seq(const std::vector<Instr>& base, const GuardAccess& guard,
                                    uint32_t frame_size, uint32_t slot_bytes) {
  std::vector<Instr> seq;
  seq.insert(seq.end(), base.begin(), base.end());
  seq.insert(seq.end(), guard.read.begin(), guard.read.end());
  seq.push_back(i32_store(frame_size));
  for (uint32_t off = 4; off + 4 <= slot_bytes; off += 4) {
    seq.insert(seq.end(), base.begin(), base.end());
    seq.push_back(i32_const(0));
    seq.push_back(i32_store(frame_size + off));
  }
  return seq;
}

// before each epilogue: if load32(base + S) != guard then __stack_chk_fail
std::vector<Instr> canary_check_seq(const std::vector<Instr>& base, const GuardAccess& guard,
                                    uint32_t frame_size, uint32_t fail_index) {
  std::vector<Instr> seq;
  seq.insert(seq.end(), base.begin(), base.end());
  seq.push_back(i32_load(frame_size));
  seq.insert(seq.end(), guard.read.begin(), guard.read.end());
  seq.push_back(ne());
  seq.push_back(if_());
  seq.push_back(call(fail_index));
  seq.push_back(end());
  return seq;
}

FuncBody fail_body() {
  FuncBody body;
  body.instrs = {unreachable(), end()};
  return body;
}

// scratch reserve/release around the body of both init flavors
void init_prologue(std::vector<Instr>& out, uint32_t sp_global) {
  out.push_back(global_get(sp_global));
  out.push_back(i32_const(16));
  out.push_back(sub());
  out.push_back(local_tee(0));
  out.push_back(global_set(sp_global));
}

void init_epilogue(std::vector<Instr>& out, uint32_t sp_global, bool wipe) {
  if (wipe) {
    out.push_back(local_get(0));
    out.push_back(i32_const(0));
    out.push_back(i32_store(0));
  }
  out.push_back(local_get(0));
  out.push_back(i32_const(16));
  out.push_back(add());
  out.push_back(global_set(sp_global));
  out.push_back(end());
}

FuncBody build_legacy_init(const SspConfig& cfg, uint32_t sp_global, uint32_t random_get_index,
                           uint32_t slot_address) {
  FuncBody body;
  body.locals = {{1, ValType::I32}};
  auto& o = body.instrs;
  init_prologue(o, sp_global);
  o.push_back(local_get(0));
  o.push_back(i32_const(4));
  o.push_back(call(random_get_index));
  o.push_back(if_());
  // weak fallback: slot = slot_address * multiplier (mod 2^32)
  o.push_back(i32_const(static_cast<int32_t>(slot_address)));
  o.push_back(i32_const(static_cast<int32_t>(slot_address)));
  o.push_back(i32_const(static_cast<int32_t>(kLegacyFallbackMultiplier)));
  o.push_back(mul());
  o.push_back(i32_store(0));
  o.push_back(else_());
  o.push_back(i32_const(static_cast<int32_t>(slot_address)));
  o.push_back(local_get(0));
  o.push_back(i32_load(0));
  o.push_back(i32_store(0));
  o.push_back(end());
  init_epilogue(o, sp_global, cfg.wipe_scratch);
  return body;
}

struct Targets {
  uint32_t random_get = 0;
  uint32_t fail = 0;
  uint32_t init = 0;
  uint32_t guard_global = 0;   // hardened
  uint32_t guard_slot = 0;     // legacy
  uint32_t void_type = 0;
};

std::pair<WasmModule, InstrumentationSummary> run_pass(
    const WasmModule& m, const SspConfig& cfg, const std::vector<analysis::FrameInfo>& frames,
    Flavor flavor) {
  if (m.find_global_by_name(cfg.guard_global_name) ||
      [&] {
        for (const auto& [idx, n] : m.names.func_names) {
          if (n == cfg.init_func_name || n == cfg.fail_func_name) return true;
        }
        return false;
      }()) {
    throw InstrumentError(InstrumentError::Kind::AlreadyInstrumented,
                          "module is already instrumented (" + cfg.guard_global_name + " present)");
  }
  if (!wasm::validate(m).empty()) {
    throw InstrumentError(InstrumentError::Kind::InvalidModule, "input module fails validation");
  }
  if (!m.memory_limits()) {
    throw InstrumentError(InstrumentError::Kind::NoMemory, "module has no linear memory");
  }

  uint32_t sp_global;
  if (cfg.sp_override) {
    sp_global = *cfg.sp_override;
    if (sp_global >= m.num_globals() || !m.global_type(sp_global).mut ||
        m.global_type(sp_global).type != ValType::I32) {
      throw InstrumentError(InstrumentError::Kind::NoStackPointer,
                            "stack pointer override is not a mutable i32 global");
    }
  } else {
    bool ambiguous = false;
    auto found = analysis::find_stack_pointer(m, &ambiguous);
    if (ambiguous) {
      throw InstrumentError(InstrumentError::Kind::AmbiguousStackPointer,
                            "multiple stack pointer candidates; pass an explicit override");
    }
    if (!found) {
      throw InstrumentError(InstrumentError::Kind::NoStackPointer,
                            "no stack pointer global identified");
    }
    sp_global = *found;
  }

  WasmModule work = m;
  Targets t;

  // random_get: reuse a matching import or append one (shifting defined funcs)
  uint32_t inserted = 0;
  if (auto existing = m.find_func_import("wasi_snapshot_preview1", "random_get")) {
    if (!(m.func_sig(*existing) == kRandomGetSig)) {
      throw InstrumentError(InstrumentError::Kind::RandomImportConflict,
                            "random_get import present with wrong signature");
    }
    t.random_get = *existing;
  } else {
    uint32_t type_index = add_or_reuse_type(work, kRandomGetSig);
    wasm::Import imp;
    imp.module = "wasi_snapshot_preview1";
    imp.field = "random_get";
    imp.kind = wasm::ImportKind::Func;
    imp.desc = type_index;
    work.imports.push_back(std::move(imp));
    t.random_get = work.num_func_imports() - 1;
    inserted = 1;
    work = wasm::remap_function_indices(work, inserted);
  }

  t.void_type = add_or_reuse_type(work, kVoidSig);
  t.fail = work.num_funcs();
  t.init = t.fail + 1;
  t.guard_global = work.num_globals();
  if (flavor == Flavor::Legacy) t.guard_slot = legacy_guard_address(m);

  GuardAccess guard;
  if (flavor == Flavor::Hardened) {
    guard.read = {global_get(t.guard_global)};
  } else {
    guard.read = {i32_const(static_cast<int32_t>(t.guard_slot)), i32_load(0)};
  }

  InstrumentationSummary summary;
  summary.flavor = flavor;
  summary.guard_global_index = t.guard_global;
  summary.init_func_index = t.init;
  summary.fail_func_index = t.fail;
  if (flavor == Flavor::Legacy) summary.guard_slot_address = t.guard_slot;

  uint32_t num_imports_orig = m.num_func_imports();
  for (const auto& frame : frames) {
    uint32_t code_pos = frame.func_index - num_imports_orig;
    if (!frame.uses_sp) {
      summary.functions_frameless++;
      continue;
    }
    if (!frame.recognized) {
      summary.functions_skipped.push_back({frame.func_index + inserted, "unrecognized-frame"});
      continue;
    }
    if (cfg.mode == SelectionMode::Heuristic && frame.frame_size < cfg.heuristic_threshold) {
      summary.functions_skipped.push_back({frame.func_index + inserted, "below-threshold"});
      continue;
    }

    FuncBody& body = work.code.at(code_pos);
    uint32_t s = frame.frame_size;
    uint32_t grown = s + cfg.canary_slot_bytes;

    auto rewrite_const = [&](uint32_t index) {
      Instr& ins = body.instrs.at(index);
      if (ins.op != Op::I32Const || ins.n != static_cast<int64_t>(s)) {
        throw InstrumentError(InstrumentError::Kind::FrameRewriteConflict,
                              "frame constant mismatch in function " +
                                  std::to_string(frame.func_index));
      }
      ins.n = grown;
    };
    rewrite_const(frame.prologue_span.first + 1);
    for (const auto& site : frame.epilogue_sites) rewrite_const(site.first + 1);

    std::vector<Instr> base = frame.frame_local
                                  ? std::vector<Instr>{local_get(*frame.frame_local)}
                                  : std::vector<Instr>{global_get(sp_global)};

    // insertions applied bottom-up so recorded indices stay valid
    std::vector<std::pair<uint32_t, std::vector<Instr>>> insertions;
    insertions.emplace_back(frame.prologue_span.second + 1,
                            canary_store_seq(base, guard, s, cfg.canary_slot_bytes));
    for (const auto& site : frame.epilogue_sites) {
      insertions.emplace_back(site.first, canary_check_seq(base, guard, s, t.fail));
    }
    std::sort(insertions.begin(), insertions.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [pos, seq] : insertions) {
      body.instrs.insert(body.instrs.begin() + pos, seq.begin(), seq.end());
    }
    summary.functions_instrumented++;
  }

  // guard storage
  if (flavor == Flavor::Hardened) {
    work.globals.push_back(wasm::GlobalDef{{ValType::I32, true}, wasm::ConstExpr::i32(0)});
    work.names.global_names[t.guard_global] = cfg.guard_global_name;
    if (cfg.debug_export) {
      work.exports.push_back(wasm::Export{"__ssp_debug_guard", wasm::ExportKind::Global,
                                          t.guard_global});
    }
  } else {
    uint64_t needed = static_cast<uint64_t>(t.guard_slot) + 4;
    auto lim = work.memory_limits();
    uint64_t have = static_cast<uint64_t>(lim->min_pages) * 65536;
    if (needed > have) {
      if (work.memories.empty()) {
        throw InstrumentError(InstrumentError::Kind::NoMemory,
                              "legacy guard slot does not fit an imported memory");
      }
      uint32_t pages = static_cast<uint32_t>((needed + 65535) / 65536);
      work.memories[0].min_pages = pages;
      if (work.memories[0].max_pages && *work.memories[0].max_pages < pages) {
        work.memories[0].max_pages = pages;
      }
    }
    work.data.push_back(wasm::DataSegment{0, wasm::ConstExpr::i32(static_cast<int32_t>(t.guard_slot)),
                                          {0, 0, 0, 0}});
  }

  // injected functions
  work.functions.push_back(t.void_type);
  work.code.push_back(fail_body());
  work.names.func_names[t.fail] = cfg.fail_func_name;

  work.functions.push_back(t.void_type);
  work.code.push_back(flavor == Flavor::Hardened
                          ? build_init_function(cfg, sp_global, t.random_get, t.guard_global)
                          : build_legacy_init(cfg, sp_global, t.random_get, t.guard_slot));
  work.names.func_names[t.init] = cfg.init_func_name;

  // init hook: start section when free, else prepend to the existing start,
  // else prepend to the exported _start
  InitHook hook = cfg.init_hook;
  if (hook == InitHook::StartSection && work.start) hook = InitHook::PrependToStart;
  if (hook == InitHook::PrependToStart &&
      (!work.start || work.is_imported_func(*work.start))) {
    hook = work.start ? InitHook::PrependToExport
                      : (cfg.init_hook == InitHook::PrependToStart ? InitHook::PrependToExport
                                                                   : InitHook::StartSection);
  }
  switch (hook) {
    case InitHook::StartSection:
      work.start = t.init;
      break;
    case InitHook::PrependToStart: {
      FuncBody& body = work.code.at(*work.start - work.num_func_imports());
      body.instrs.insert(body.instrs.begin(), call(t.init));
      break;
    }
    case InitHook::PrependToExport: {
      auto target = work.find_export("_start", wasm::ExportKind::Func);
      if (!target || work.is_imported_func(*target)) {
        throw InstrumentError(InstrumentError::Kind::NoInitHook,
                              "no defined _start export to hook the init call into");
      }
      FuncBody& body = work.code.at(*target - work.num_func_imports());
      body.instrs.insert(body.instrs.begin(), call(t.init));
      break;
    }
  }

  summary.size_delta_bytes = static_cast<int64_t>(wasm::encode(work).size()) -
                             static_cast<int64_t>(wasm::encode(m).size());
  return {std::move(work), summary};
}

}  // namespace

uint32_t legacy_guard_address(const WasmModule& m) {
  analysis::LayoutReport layout = analysis::classify_layout(m);
  auto align4 = [](uint32_t v) { return (v + 3u) & ~3u; };
  if (layout.data_range) return align4(layout.data_range->hi);
  if (layout.sp_initial) return align4(*layout.sp_initial);
  return 1024;
}

wasm::FuncBody build_init_function(const SspConfig& cfg, uint32_t sp_global,
                                   uint32_t random_get_index, uint32_t guard_global_index) {
  FuncBody body;
  body.locals = {{1, ValType::I32}};
  auto& o = body.instrs;
  init_prologue(o, sp_global);
  o.push_back(local_get(0));
  o.push_back(i32_const(4));
  o.push_back(call(random_get_index));
  o.push_back(if_());
  o.push_back(unreachable());  // randomness failure aborts the preamble
  o.push_back(end());
  o.push_back(local_get(0));
  o.push_back(i32_load(0));
  o.push_back(global_set(guard_global_index));
  init_epilogue(o, sp_global, cfg.wipe_scratch);
  return body;
}

std::pair<WasmModule, InstrumentationSummary> instrument(
    const WasmModule& m, const SspConfig& cfg, const std::vector<analysis::FrameInfo>& frames) {
  return run_pass(m, cfg, frames, Flavor::Hardened);
}

std::pair<WasmModule, InstrumentationSummary> legacy_instrument(
    const WasmModule& m, const SspConfig& cfg, const std::vector<analysis::FrameInfo>& frames) {
  return run_pass(m, cfg, frames, Flavor::Legacy);
}

std::pair<WasmModule, InstrumentationSummary> instrument_auto(const WasmModule& m,
                                                              const SspConfig& cfg,
                                                              Flavor flavor) {
  uint32_t sp_global;
  if (cfg.sp_override) {
    sp_global = *cfg.sp_override;
  } else {
    bool ambiguous = false;
    auto found = analysis::find_stack_pointer(m, &ambiguous);
    if (ambiguous) {
      throw InstrumentError(InstrumentError::Kind::AmbiguousStackPointer,
                            "multiple stack pointer candidates; pass an explicit override");
    }
    if (!found) {
      throw InstrumentError(InstrumentError::Kind::NoStackPointer,
                            "no stack pointer global identified");
    }
    sp_global = *found;
  }
  auto frames = analysis::detect_frames(m, sp_global);
  return run_pass(m, cfg, frames, flavor);
}

wasm::WasmModule inject_fault_random(const WasmModule& m) {
  auto target = m.find_func_import("wasi_snapshot_preview1", "random_get");
  if (!target) {
    throw InstrumentError(InstrumentError::Kind::ImportNotFound,
                          "module does not import wasi_snapshot_preview1.random_get");
  }
  uint32_t j = *target;
  uint32_t imports = m.num_func_imports();
  uint32_t defined = static_cast<uint32_t>(m.functions.size());
  uint32_t replacement = imports - 1 + defined;  // appended defined function

  WasmModule work = wasm::remap_func_refs(m, [&](uint32_t f) -> uint32_t {
    if (f == j) return replacement;
    if (f < j) return f;
    return f - 1;  // imports after j and all defined functions shift down
  });

  // drop the import entry (j-th function import)
  uint32_t seen = 0;
  for (auto it = work.imports.begin(); it != work.imports.end(); ++it) {
    if (it->kind != wasm::ImportKind::Func) continue;
    if (seen == j) {
      work.imports.erase(it);
      break;
    }
    seen++;
  }

  uint32_t type_index = add_or_reuse_type(work, kRandomGetSig);
  work.functions.push_back(type_index);
  FuncBody body;
  body.instrs = {i32_const(1), end()};  // errno 1, buffer untouched
  work.code.push_back(std::move(body));
  work.names.func_names[replacement] = "__wssp_fault_random_get";
  return work;
}

}  // namespace wssp::ssp
