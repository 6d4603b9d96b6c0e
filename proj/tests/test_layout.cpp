/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <doctest.h>

#include "analysis/layout.hpp"
#include "corpus/corpus.hpp"
#include "wasm/builder.hpp"

using namespace wssp;
using namespace wasm::ins;
using analysis::LayoutKind;
using wasm::FuncSignature;
using wasm::ValType;

namespace {

wasm::WasmModule module_with_layout(uint32_t sp_initial, uint32_t data_addr, uint32_t data_len) {
  wasm::ModuleBuilder b;
  b.add_memory(2);
  uint32_t sp = b.add_global(ValType::I32, true, wasm::ConstExpr::i32(static_cast<int32_t>(sp_initial)));
  b.set_global_name(sp, "__stack_pointer");
  b.add_data(static_cast<int32_t>(data_addr), std::vector<uint8_t>(data_len, 0x11));
  return b.build();
}

// one function with the standard prologue/epilogue pair around `mid`
wasm::WasmModule module_with_prologue(uint32_t frame, bool tee, std::vector<wasm::Instr> mid = {},
                                      bool name_sp = false) {
  wasm::ModuleBuilder b;
  b.add_memory(2);
  uint32_t sp = b.add_global(ValType::I32, true, wasm::ConstExpr::i32(65536));
  if (name_sp) b.set_global_name(sp, "__stack_pointer");
  uint32_t f = b.declare_func(FuncSignature{});
  std::vector<wasm::Instr> o;
  if (tee) {
    o = {global_get(sp), i32_const(static_cast<int32_t>(frame)), sub(), local_tee(0), global_set(sp)};
  } else {
    o = {global_get(sp), i32_const(static_cast<int32_t>(frame)), sub(), global_set(sp)};
  }
  o.insert(o.end(), mid.begin(), mid.end());
  if (tee) {
    o.push_back(local_get(0));
  } else {
    o.push_back(global_get(sp));
  }
  o.push_back(i32_const(static_cast<int32_t>(frame)));
  o.push_back(add());
  o.push_back(global_set(sp));
  b.set_body(f, {{1, ValType::I32}}, std::move(o));
  b.add_export("_start", wasm::ExportKind::Func, f);
  return b.build();
}

}  // namespace

TEST_CASE("find_stack_pointer: no mutable globals means absent") {
  wasm::ModuleBuilder b;
  b.add_memory(1);
  b.add_global(ValType::I32, false, wasm::ConstExpr::i32(42));
  bool ambiguous = true;
  auto sp = analysis::find_stack_pointer(b.build(), &ambiguous);
  CHECK_FALSE(sp.has_value());
  CHECK_FALSE(ambiguous);
}

TEST_CASE("find_stack_pointer: named and exported globals win") {
  for (const auto& guest : corpus::default_corpus()) {
    CAPTURE(guest.name);
    auto sp = analysis::find_stack_pointer(guest.module);
    REQUIRE(sp.has_value());
    CHECK(*sp == guest.tmpl.sp_global);
  }
}

TEST_CASE("find_stack_pointer: unnamed stack pointer found via prologue pattern") {
  wasm::WasmModule m = module_with_prologue(32, true);
  auto sp = analysis::find_stack_pointer(m);
  REQUIRE(sp.has_value());
  CHECK(*sp == 0);
}

TEST_CASE("find_stack_pointer: two prologue globals are ambiguous") {
  wasm::ModuleBuilder b;
  b.add_memory(2);
  uint32_t sp1 = b.add_global(ValType::I32, true, wasm::ConstExpr::i32(65536));
  uint32_t sp2 = b.add_global(ValType::I32, true, wasm::ConstExpr::i32(32768));
  for (uint32_t sp : {sp1, sp2}) {
    uint32_t f = b.declare_func(FuncSignature{});
    b.set_body(f, {{1, ValType::I32}},
               {global_get(sp), i32_const(16), sub(), local_tee(0), global_set(sp),
                local_get(0), i32_const(16), add(), global_set(sp)});
  }
  bool ambiguous = false;
  auto sp = analysis::find_stack_pointer(b.build(), &ambiguous);
  CHECK_FALSE(sp.has_value());
  CHECK(ambiguous);
}

TEST_CASE("detect_frames: function without sp access is frameless") {
  wasm::ModuleBuilder b;
  b.add_memory(1);
  uint32_t sp = b.add_global(ValType::I32, true, wasm::ConstExpr::i32(65536));
  uint32_t f = b.declare_func(FuncSignature{});
  b.set_body(f, {}, {i32_const(1), drop()});
  auto frames = analysis::detect_frames(b.build(), sp);
  REQUIRE(frames.size() == 1);
  CHECK_FALSE(frames[0].recognized);
  CHECK_FALSE(frames[0].uses_sp);
  CHECK(frames[0].frame_size == 0);
}

TEST_CASE("detect_frames: corpus ground truth") {
  for (const auto& guest : corpus::default_corpus()) {
    CAPTURE(guest.name);
    auto frames = analysis::detect_frames(guest.module, guest.tmpl.sp_global);
    for (const auto& frame : frames) {
      auto it = guest.tmpl.frame_sizes.find(frame.func_index);
      REQUIRE(it != guest.tmpl.frame_sizes.end());
      if (it->second == 0) {
        CHECK_FALSE(frame.recognized);
      } else {
        CAPTURE(frame.func_index);
        CHECK(frame.recognized);
        CHECK(frame.frame_size == it->second);
      }
    }
  }
}

TEST_CASE("detect_frames: guest A has one epilogue, early-return guest has two") {
  auto a = corpus::gen_guest_A(16, 4, LayoutKind::StackFirst);
  auto frames = analysis::detect_frames(a.module, a.tmpl.sp_global);
  REQUIRE(frames.size() == 2);
  CHECK(frames[0].recognized);
  CHECK(frames[0].frame_size == 32);
  CHECK(frames[0].epilogue_sites.size() == 1);
  CHECK(frames[0].pattern == analysis::FramePattern::TeeSet);

  for (const auto& guest : corpus::gen_benign_suite()) {
    if (guest.name != "benign-early-return-sf") continue;
    auto sp = analysis::find_stack_pointer(guest.module);
    REQUIRE(sp.has_value());
    auto bframes = analysis::detect_frames(guest.module, *sp);
    REQUIRE(bframes.size() == 2);
    CHECK(bframes[0].recognized);
    CHECK(bframes[0].epilogue_sites.size() == 2);
  }
}

TEST_CASE("detect_frames: get-sub-set prologue without a frame local") {
  wasm::WasmModule m = module_with_prologue(48, false);
  auto sp = analysis::find_stack_pointer(m);
  REQUIRE(sp.has_value());
  auto frames = analysis::detect_frames(m, *sp);
  REQUIRE(frames.size() == 1);
  CHECK(frames[0].recognized);
  CHECK(frames[0].pattern == analysis::FramePattern::GetSubSet);
  CHECK_FALSE(frames[0].frame_local.has_value());
}

TEST_CASE("detect_frames: mismatched epilogue constant flips recognition off") {
  // mutate every epilogue constant and require recognition to drop
  auto a = corpus::gen_guest_A(16, 4, LayoutKind::StackFirst);
  auto base_frames = analysis::detect_frames(a.module, a.tmpl.sp_global);
  REQUIRE(base_frames[0].recognized);
  for (uint32_t delta : {1u, 4u, 16u, 100u}) {
    wasm::WasmModule mutated = a.module;
    auto& instrs = mutated.code[0].instrs;
    const auto& site = base_frames[0].epilogue_sites[0];
    instrs[site.first + 1].n = base_frames[0].frame_size + delta;
    auto frames = analysis::detect_frames(mutated, a.tmpl.sp_global);
    CAPTURE(delta);
    CHECK_FALSE(frames[0].recognized);
  }
}

TEST_CASE("detect_frames: unaccounted sp write defeats recognition") {
  wasm::WasmModule m =
      module_with_prologue(32, true, {i32_const(0), global_set(0)});  // stray sp write
  auto frames = analysis::detect_frames(m, 0);
  REQUIRE(frames.size() == 1);
  CHECK(frames[0].uses_sp);
  CHECK_FALSE(frames[0].recognized);
}

TEST_CASE("classify_layout matches the generator's declared layout on the corpus") {
  for (const auto& guest : corpus::default_corpus()) {
    CAPTURE(guest.name);
    auto report = analysis::classify_layout(guest.module);
    CHECK(report.layout == guest.tmpl.layout);
    REQUIRE(report.sp_global.has_value());
    CHECK(*report.sp_global == guest.tmpl.sp_global);
  }
}

TEST_CASE("classify_layout boundary cases") {
  // data high above the stack: stack-first (Rust/Zig arrangement)
  auto sf = analysis::classify_layout(module_with_layout(65536, 65536, 1024));
  CHECK(sf.layout == LayoutKind::StackFirst);
  REQUIRE(sf.stack_region.has_value());
  CHECK(sf.stack_region->lo == 0);
  CHECK(sf.stack_region->hi == 65536);

  // data at the bottom: no-stack-first (LLVM default arrangement)
  auto nsf = analysis::classify_layout(module_with_layout(65536, 1024, 1024));
  CHECK(nsf.layout == LayoutKind::NoStackFirst);
  REQUIRE(nsf.stack_region.has_value());
  CHECK(nsf.stack_region->lo == 2048);

  // sp inside the data range: unknown
  auto odd = analysis::classify_layout(module_with_layout(1500, 1024, 1024));
  CHECK(odd.layout == LayoutKind::Unknown);
}

TEST_CASE("classify_layout: fixtures and degenerate modules") {
  CHECK(analysis::classify_layout(corpus::gen_layout_fixture(LayoutKind::StackFirst)).layout ==
        LayoutKind::StackFirst);
  CHECK(analysis::classify_layout(corpus::gen_layout_fixture(LayoutKind::NoStackFirst)).layout ==
        LayoutKind::NoStackFirst);
  CHECK(analysis::classify_layout(corpus::gen_layout_fixture(std::nullopt)).layout ==
        LayoutKind::Unknown);
  CHECK(analysis::classify_layout(wasm::WasmModule{}).layout == LayoutKind::Unknown);
}

TEST_CASE("reachable_by_ascending_overflow") {
  auto sf = analysis::classify_layout(module_with_layout(65536, 65536, 1024));
  // guard in the data zone above the stack: reachable
  CHECK(analysis::reachable_by_ascending_overflow(sf, 66000) == true);
  // a canary inside the stack region is reachable too
  CHECK(analysis::reachable_by_ascending_overflow(sf, 65520) == true);

  auto nsf = analysis::classify_layout(module_with_layout(65536, 1024, 1024));
  // guard in the data zone below the stack: not reachable
  CHECK(analysis::reachable_by_ascending_overflow(nsf, 1500) == false);
  CHECK(analysis::reachable_by_ascending_overflow(nsf, 60000) == true);

  analysis::LayoutReport unknown;
  CHECK_FALSE(analysis::reachable_by_ascending_overflow(unknown, 1234).has_value());
}

TEST_CASE("reachability is monotone in the target address") {
  auto report = analysis::classify_layout(module_with_layout(65536, 1024, 1024));
  bool seen_true = false;
  for (uint32_t addr = 0; addr < 70000; addr += 97) {
    auto r = analysis::reachable_by_ascending_overflow(report, addr);
    REQUIRE(r.has_value());
    if (seen_true) CHECK(*r);
    seen_true = seen_true || *r;
  }
  CHECK(seen_true);
}
