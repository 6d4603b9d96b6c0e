/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "corpus/corpus.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "ssp/pass.hpp"
#include "wasm/builder.hpp"
#include "wasm/decode.hpp"
#include "wasm/encode.hpp"

namespace wssp::corpus {

using analysis::LayoutKind;
using harness::OutcomeCategory;
using namespace wasm::ins;
using wasm::FuncSignature;
using wasm::Instr;
using wasm::ModuleBuilder;
using wasm::ValType;

namespace {

constexpr uint32_t kSpInitial = 65536;
constexpr uint32_t kMemoryPages = 2;
constexpr uint32_t kDataGap = 64;  // clearance above the stack for deep sweep writes

enum class SpNaming { NameSection, Exported, None };

// Shared guest scaffold: memory + exported "memory", the shadow-stack
// pointer global, an optional fd_write import, and a data cursor.
struct Scaffold {
  ModuleBuilder b;
  uint32_t sp_global = 0;
  uint32_t fd_write = 0;
  bool has_fd_write = false;
  uint32_t data_base;
  uint32_t data_cursor;

  Scaffold(LayoutKind layout, SpNaming naming, bool needs_fd_write) {
    data_base = (layout == LayoutKind::StackFirst ? kSpInitial : 1024) + kDataGap;
    data_cursor = data_base;
    if (needs_fd_write) {
      fd_write = b.import_func(
          "wasi_snapshot_preview1", "fd_write",
          FuncSignature{{ValType::I32, ValType::I32, ValType::I32, ValType::I32}, {ValType::I32}});
      has_fd_write = true;
    }
    b.add_memory(kMemoryPages, kMemoryPages);
    b.add_export("memory", wasm::ExportKind::Memory, 0);
    data({'w', 's', 's', 'p'});  // data-zone tag; keeps the layout classifiable
    sp_global = b.add_global(ValType::I32, true, wasm::ConstExpr::i32(kSpInitial));
    switch (naming) {
      case SpNaming::NameSection:
        b.set_global_name(sp_global, "__stack_pointer");
        break;
      case SpNaming::Exported:
        b.add_export("__stack_pointer", wasm::ExportKind::Global, sp_global);
        break;
      case SpNaming::None:
        break;
    }
  }

  uint32_t data(std::vector<uint8_t> bytes) {
    uint32_t addr = data_cursor;
    data_cursor += static_cast<uint32_t>((bytes.size() + 3) & ~size_t{3});
    b.add_data(static_cast<int32_t>(addr), std::move(bytes));
    return addr;
  }

  uint32_t string_data(const std::string& s) {
    return data(std::vector<uint8_t>(s.begin(), s.end()));
  }

  std::vector<Instr> prologue(uint32_t frame_size, uint32_t base_local) {
    return {global_get(sp_global), i32_const(static_cast<int32_t>(frame_size)), sub(),
            local_tee(base_local), global_set(sp_global)};
  }

  std::vector<Instr> epilogue(uint32_t frame_size, uint32_t base_local) {
    return {local_get(base_local), i32_const(static_cast<int32_t>(frame_size)), add(),
            global_set(sp_global)};
  }

  // fd_write(1, iovec@base+iov_off -> {str_addr, str_len}, 1, base+nw_off)
  std::vector<Instr> print(uint32_t base_local, uint32_t str_addr, uint32_t str_len,
                           uint32_t iov_off, uint32_t nw_off) {
    return {
        local_get(base_local), i32_const(static_cast<int32_t>(str_addr)), i32_store(iov_off),
        local_get(base_local), i32_const(static_cast<int32_t>(str_len)), i32_store(iov_off + 4),
        i32_const(1),
        local_get(base_local), i32_const(static_cast<int32_t>(iov_off)), add(),
        i32_const(1),
        local_get(base_local), i32_const(static_cast<int32_t>(nw_off)), add(),
        call(fd_write), drop(),
    };
  }
};

void append(std::vector<Instr>& out, std::vector<Instr> seq) {
  out.insert(out.end(), seq.begin(), seq.end());
}

const char* layout_suffix(LayoutKind k) {
  return k == LayoutKind::StackFirst ? "sf" : "nsf";
}

std::map<std::string, OutcomeCategory> all_modes(OutcomeCategory fixed, OutcomeCategory fail) {
  return {{"fixed", fixed}, {"fail", fail}};
}

// Benign guests behave the same everywhere except hardened builds abort the
// preamble when randomness fails.
void expect_benign(GuestTemplate& t) {
  t.expected["none"] = all_modes(OutcomeCategory::Silent, OutcomeCategory::Silent);
  t.expected["legacy"] = all_modes(OutcomeCategory::Silent, OutcomeCategory::Silent);
  t.expected["hardened"] = all_modes(OutcomeCategory::Silent, OutcomeCategory::StartupAbort);
}

}  // namespace

Guest gen_guest_A(uint32_t buffer_size, uint32_t overflow_len, LayoutKind layout) {
  constexpr uint32_t kBufOff = 8;
  uint32_t frame = (kBufOff + buffer_size + 4 + 15) & ~15u;  // iovec below, nwritten above

  Scaffold s(layout, SpNaming::NameSection, true);
  uint32_t marker = s.string_data("A:done\n");

  uint32_t vuln = s.b.declare_func(FuncSignature{});
  uint32_t start = s.b.declare_func(FuncSignature{});

  {
    // locals: 0 = frame base, 1 = loop counter
    std::vector<Instr> o;
    append(o, s.prologue(frame, 0));
    append(o, {i32_const(0), local_set(1)});
    append(o, {block(), loop(),
               local_get(1), i32_const(static_cast<int32_t>(overflow_len)), ge_u(), br_if(1),
               local_get(0), local_get(1), add(), i32_const(0x41), i32_store8(kBufOff),
               local_get(1), i32_const(1), add(), local_set(1),
               br(0), end(), end()});
    append(o, s.print(0, marker, 7, 0, kBufOff + buffer_size));
    append(o, s.epilogue(frame, 0));
    s.b.set_body(vuln, {{2, ValType::I32}}, std::move(o));
  }
  s.b.set_body(start, {}, {call(vuln)});
  s.b.add_export("_start", wasm::ExportKind::Func, start);
  s.b.set_func_name(vuln, "vuln");
  s.b.set_func_name(start, "_start");

  Guest g;
  g.name = std::string("overflow-a") + std::to_string(buffer_size) + "-l" +
           std::to_string(overflow_len) + "-" + layout_suffix(layout);
  g.module = s.b.build();
  g.tmpl.name = g.name;
  g.tmpl.layout = layout;
  g.tmpl.parameters = {{"buffer_size", buffer_size},
                       {"overflow_len", overflow_len},
                       {"buffer_offset", kBufOff},
                       {"frame_size", frame}};
  g.tmpl.sp_global = s.sp_global;
  g.tmpl.frame_sizes = {{vuln, frame}, {start, 0}};
  g.tmpl.legacy_guard_slot = ssp::legacy_guard_address(g.module);
  g.tmpl.expected_stdout = "A:done\n";

  // The write covers the canary slot iff it runs past the original frame top.
  bool crossing = kBufOff + overflow_len > frame;
  OutcomeCategory detected = crossing ? OutcomeCategory::SspFault : OutcomeCategory::Silent;
  g.tmpl.expected["none"] = all_modes(OutcomeCategory::Silent, OutcomeCategory::Silent);
  g.tmpl.expected["legacy"] = all_modes(detected, detected);
  g.tmpl.expected["hardened"] = all_modes(detected, OutcomeCategory::StartupAbort);
  return g;
}

Guest gen_guest_B_bypass(uint32_t attack_value, LayoutKind layout) {
  constexpr uint32_t kBufOff = 8;
  constexpr uint32_t kBufSize = 16;
  constexpr uint32_t kFrame = 32;

  Scaffold s(layout, SpNaming::NameSection, true);
  uint32_t marker = s.string_data("B:run\n");

  uint32_t vuln = s.b.declare_func(FuncSignature{});
  uint32_t start = s.b.declare_func(FuncSignature{});

  wasm::WasmModule probe = s.b.build();
  uint32_t slot = ssp::legacy_guard_address(probe);
  // ascending i32 stores from the buffer up to the legacy slot (stack-first)
  // or the stack top (no-stack-first, where the slot lies below the stack)
  uint32_t attack_end = std::max(slot + 4, kSpInitial);

  {
    // locals: 0 = frame base, 1 = write pointer
    std::vector<Instr> o;
    append(o, s.prologue(kFrame, 0));
    append(o, s.print(0, marker, 6, 0, kBufOff + kBufSize));
    append(o, {local_get(0), i32_const(kBufOff), add(), local_set(1)});
    append(o, {block(), loop(),
               local_get(1), i32_const(static_cast<int32_t>(attack_end)), ge_u(), br_if(1),
               local_get(1), i32_const(static_cast<int32_t>(attack_value)), i32_store(0),
               local_get(1), i32_const(4), add(), local_set(1),
               br(0), end(), end()});
    append(o, s.epilogue(kFrame, 0));
    s.b.set_body(vuln, {{2, ValType::I32}}, std::move(o));
  }
  s.b.set_body(start, {}, {call(vuln)});
  s.b.add_export("_start", wasm::ExportKind::Func, start);
  s.b.set_func_name(vuln, "vuln");
  s.b.set_func_name(start, "_start");

  Guest g;
  g.name = std::string("bypass-b-") + layout_suffix(layout);
  g.module = s.b.build();
  g.tmpl.name = g.name;
  g.tmpl.layout = layout;
  g.tmpl.parameters = {{"attack_value", attack_value},
                       {"attack_end", attack_end},
                       {"buffer_offset", kBufOff},
                       {"frame_size", kFrame}};
  g.tmpl.sp_global = s.sp_global;
  g.tmpl.frame_sizes = {{vuln, kFrame}, {start, 0}};
  g.tmpl.legacy_guard_slot = slot;
  g.tmpl.expected_stdout = "B:run\n";

  uint32_t fallback_guard =
      static_cast<uint32_t>(static_cast<uint64_t>(slot) * ssp::kLegacyFallbackMultiplier);
  if (fallback_guard == attack_value) {
    throw std::logic_error("attack value collides with the legacy fallback guard");
  }

  g.tmpl.expected["none"] = all_modes(OutcomeCategory::Silent, OutcomeCategory::Silent);
  if (layout == LayoutKind::StackFirst) {
    // the full overwrite reaches the in-memory reference value: bypass
    g.tmpl.expected["legacy"] = all_modes(OutcomeCategory::Silent, OutcomeCategory::Silent);
  } else {
    // guard below the stack, unreachable by ascending writes
    g.tmpl.expected["legacy"] = all_modes(OutcomeCategory::SspFault, OutcomeCategory::SspFault);
  }
  g.tmpl.expected["hardened"] =
      all_modes(OutcomeCategory::SspFault, OutcomeCategory::StartupAbort);
  return g;
}

namespace {

Guest gen_hello() {
  Scaffold s(LayoutKind::StackFirst, SpNaming::NameSection, true);
  uint32_t str = s.string_data("hello\n");
  std::vector<uint8_t> iov(8, 0);
  for (int i = 0; i < 4; i++) iov[i] = static_cast<uint8_t>(str >> (8 * i));
  iov[4] = 6;
  uint32_t iov_addr = s.data(iov);
  uint32_t nw_addr = s.data({0, 0, 0, 0});

  uint32_t start = s.b.declare_func(FuncSignature{});
  s.b.set_body(start, {},
               {i32_const(1), i32_const(static_cast<int32_t>(iov_addr)), i32_const(1),
                i32_const(static_cast<int32_t>(nw_addr)), call(s.fd_write), drop()});
  s.b.add_export("_start", wasm::ExportKind::Func, start);
  s.b.set_func_name(start, "_start");

  Guest g;
  g.name = "benign-hello-sf";
  g.module = s.b.build();
  g.tmpl.name = g.name;
  g.tmpl.layout = LayoutKind::StackFirst;
  g.tmpl.sp_global = s.sp_global;
  g.tmpl.frame_sizes = {{s.b.num_func_imports() + 0, 0}};
  g.tmpl.legacy_guard_slot = ssp::legacy_guard_address(g.module);
  g.tmpl.expected_stdout = "hello\n";
  expect_benign(g.tmpl);
  return g;
}

Guest gen_factorial() {
  Scaffold s(LayoutKind::StackFirst, SpNaming::Exported, true);

  uint32_t fact = s.b.declare_func(FuncSignature{{ValType::I32}, {ValType::I32}});
  uint32_t start = s.b.declare_func(FuncSignature{});

  {
    // params: 0 = n; locals: 1 = frame base, 2 = scratch
    std::vector<Instr> o;
    append(o, s.prologue(16, 1));
    append(o, {local_get(1), local_get(0), i32_store(0)});  // spill n
    append(o, {local_get(0), eqz(), if_()});
    append(o, s.epilogue(16, 1));
    append(o, {i32_const(1), ret(), end()});
    append(o, {local_get(0), i32_const(1), sub(), call(fact), local_set(2)});
    append(o, {local_get(1), i32_load(0), local_get(2), mul(), local_set(2)});  // reload the spill
    append(o, s.epilogue(16, 1));
    append(o, {local_get(2)});
    s.b.set_body(fact, {{2, ValType::I32}}, std::move(o));
  }
  {
    // locals: 0 = frame base, 1 = value, 2 = digit pointer
    // frame 32: iovec [0,8), digits [8,20), nwritten [20,24)
    std::vector<Instr> o;
    append(o, s.prologue(32, 0));
    append(o, {i32_const(10), call(fact), local_set(1)});
    append(o, {local_get(0), i32_const('\n'), i32_store8(19)});
    append(o, {local_get(0), i32_const(19), add(), local_set(2)});
    append(o, {block(), loop(),
               local_get(2), i32_const(1), sub(), local_set(2),
               local_get(2), local_get(1), i32_const(10), rem_u(), i32_const('0'), add(),
               i32_store8(0),
               local_get(1), i32_const(10), div_u(), local_set(1),
               local_get(1), eqz(), br_if(1),
               br(0), end(), end()});
    // iovec = {p, base+20-p}
    append(o, {local_get(0), local_get(2), i32_store(0)});
    append(o, {local_get(0), local_get(0), i32_const(20), add(), local_get(2), sub(),
               i32_store(4)});
    append(o, {i32_const(1), local_get(0), i32_const(1),
               local_get(0), i32_const(20), add(), call(s.fd_write), drop()});
    append(o, s.epilogue(32, 0));
    s.b.set_body(start, {{3, ValType::I32}}, std::move(o));
  }
  s.b.add_export("_start", wasm::ExportKind::Func, start);
  s.b.set_func_name(fact, "fact");
  s.b.set_func_name(start, "_start");

  Guest g;
  g.name = "benign-factorial-sf";
  g.module = s.b.build();
  g.tmpl.name = g.name;
  g.tmpl.layout = LayoutKind::StackFirst;
  g.tmpl.parameters = {{"n", 10}};
  g.tmpl.sp_global = s.sp_global;
  g.tmpl.frame_sizes = {{fact, 16}, {start, 32}};
  g.tmpl.legacy_guard_slot = ssp::legacy_guard_address(g.module);
  g.tmpl.expected_stdout = "3628800\n";
  expect_benign(g.tmpl);
  return g;
}

Guest gen_early_return() {
  Scaffold s(LayoutKind::StackFirst, SpNaming::None, true);
  uint32_t early = s.string_data("early\n");
  uint32_t late = s.string_data("late\n");

  uint32_t f = s.b.declare_func(FuncSignature{});
  uint32_t start = s.b.declare_func(FuncSignature{});

  {
    // frame 32: value [0,4), iovec [8,16), nwritten [16,20)
    std::vector<Instr> o;
    append(o, s.prologue(32, 0));
    append(o, {local_get(0), i32_const(7), i32_store(0)});
    append(o, {local_get(0), i32_load(0), i32_const(7), eq(), if_()});
    append(o, s.print(0, early, 6, 8, 16));
    append(o, s.epilogue(32, 0));
    append(o, {ret(), end()});
    append(o, s.print(0, late, 5, 8, 16));
    append(o, s.epilogue(32, 0));
    s.b.set_body(f, {{1, ValType::I32}}, std::move(o));
  }
  s.b.set_body(start, {}, {call(f)});
  s.b.add_export("_start", wasm::ExportKind::Func, start);
  s.b.set_func_name(f, "branchy");
  s.b.set_func_name(start, "_start");

  Guest g;
  g.name = "benign-early-return-sf";
  g.module = s.b.build();
  g.tmpl.name = g.name;
  g.tmpl.layout = LayoutKind::StackFirst;
  g.tmpl.sp_global = s.sp_global;
  g.tmpl.frame_sizes = {{f, 32}, {start, 0}};
  g.tmpl.legacy_guard_slot = ssp::legacy_guard_address(g.module);
  g.tmpl.expected_stdout = "early\n";
  expect_benign(g.tmpl);
  return g;
}

Guest gen_frames() {
  Scaffold s(LayoutKind::StackFirst, SpNaming::NameSection, true);
  uint32_t ok = s.string_data("frames:ok\n");
  uint32_t bad = s.string_data("frames:bad\n");

  uint32_t f4 = s.b.declare_func(FuncSignature{});
  uint32_t f16 = s.b.declare_func(FuncSignature{});
  uint32_t f256 = s.b.declare_func(FuncSignature{});
  uint32_t start = s.b.declare_func(FuncSignature{});

  {
    std::vector<Instr> o;
    append(o, s.prologue(4, 0));
    append(o, {local_get(0), i32_const(90), i32_store8(0)});
    append(o, {call(f16)});
    append(o, s.epilogue(4, 0));
    s.b.set_body(f4, {{1, ValType::I32}}, std::move(o));
  }
  {
    std::vector<Instr> o;
    append(o, s.prologue(16, 0));
    append(o, {local_get(0), i32_const(0x1234), Instr{.op = wasm::Op::I32Store16, .a = 1, .b = 0}});
    append(o, {call(f256)});
    append(o, s.epilogue(16, 0));
    s.b.set_body(f16, {{1, ValType::I32}}, std::move(o));
  }
  {
    // frame 256: pattern [0,240), iovec [240,248), nwritten [248,252)
    std::vector<Instr> o;
    append(o, s.prologue(256, 0));
    append(o, {i32_const(0), local_set(1)});
    append(o, {block(), loop(),
               local_get(1), i32_const(240), ge_u(), br_if(1),
               local_get(0), local_get(1), add(), local_get(1), i32_store8(0),
               local_get(1), i32_const(1), add(), local_set(1),
               br(0), end(), end()});
    append(o, {local_get(0), i32_load8_u(239), i32_const(239), eq(), if_()});
    append(o, s.print(0, ok, 10, 240, 248));
    append(o, {else_()});
    append(o, s.print(0, bad, 11, 240, 248));
    append(o, {end()});
    append(o, s.epilogue(256, 0));
    s.b.set_body(f256, {{2, ValType::I32}}, std::move(o));
  }
  s.b.set_body(start, {}, {call(f4)});
  s.b.add_export("_start", wasm::ExportKind::Func, start);
  s.b.set_func_name(f4, "leaf4");
  s.b.set_func_name(f16, "mid16");
  s.b.set_func_name(f256, "big256");
  s.b.set_func_name(start, "_start");

  Guest g;
  g.name = "benign-frames-sf";
  g.module = s.b.build();
  g.tmpl.name = g.name;
  g.tmpl.layout = LayoutKind::StackFirst;
  g.tmpl.sp_global = s.sp_global;
  g.tmpl.frame_sizes = {{f4, 4}, {f16, 16}, {f256, 256}, {start, 0}};
  g.tmpl.legacy_guard_slot = ssp::legacy_guard_address(g.module);
  g.tmpl.expected_stdout = "frames:ok\n";
  expect_benign(g.tmpl);
  return g;
}

Guest gen_strings() {
  Scaffold s(LayoutKind::NoStackFirst, SpNaming::NameSection, true);

  uint32_t f = s.b.declare_func(FuncSignature{});
  {
    // frame 32: iovec [0,8), text [8,15), nwritten [16,20)
    std::vector<Instr> o;
    append(o, s.prologue(32, 0));
    const char* text = "abcdef\n";
    for (uint32_t i = 0; i < 7; i++) {
      append(o, {local_get(0), i32_const(text[i]), i32_store8(8 + i)});
    }
    // iovec.ptr = base+8
    append(o, {local_get(0), local_get(0), i32_const(8), add(), i32_store(0)});
    append(o, {local_get(0), i32_const(7), i32_store(4)});
    append(o, {i32_const(1), local_get(0), i32_const(1),
               local_get(0), i32_const(16), add(), call(s.fd_write), drop()});
    append(o, s.epilogue(32, 0));
    s.b.set_body(f, {{1, ValType::I32}}, std::move(o));
  }
  s.b.add_export("_start", wasm::ExportKind::Func, f);
  s.b.set_func_name(f, "_start");

  Guest g;
  g.name = "benign-strings-nsf";
  g.module = s.b.build();
  g.tmpl.name = g.name;
  g.tmpl.layout = LayoutKind::NoStackFirst;
  g.tmpl.sp_global = s.sp_global;
  g.tmpl.frame_sizes = {{f + 0, 32}};
  g.tmpl.legacy_guard_slot = ssp::legacy_guard_address(g.module);
  g.tmpl.expected_stdout = "abcdef\n";
  expect_benign(g.tmpl);
  return g;
}

Guest gen_heap_negative() {
  Scaffold s(LayoutKind::StackFirst, SpNaming::NameSection, true);
  uint32_t marker = s.string_data("H:done\n");
  uint32_t heap_base = s.data_cursor + 4096;

  uint32_t f = s.b.declare_func(FuncSignature{});
  {
    // a stack frame exists, but the overflow lives in the heap zone
    std::vector<Instr> o;
    append(o, s.prologue(32, 0));
    append(o, {i32_const(0), local_set(1)});
    append(o, {block(), loop(),
               local_get(1), i32_const(64), ge_u(), br_if(1),
               i32_const(static_cast<int32_t>(heap_base)), local_get(1), add(),
               i32_const(0x42), i32_store8(0),
               local_get(1), i32_const(1), add(), local_set(1),
               br(0), end(), end()});
    append(o, s.print(0, marker, 7, 0, 16));
    append(o, s.epilogue(32, 0));
    s.b.set_body(f, {{2, ValType::I32}}, std::move(o));
  }
  s.b.add_export("_start", wasm::ExportKind::Func, f);
  s.b.set_func_name(f, "_start");

  Guest g;
  g.name = "heap-neg-sf";
  g.module = s.b.build();
  g.tmpl.name = g.name;
  g.tmpl.layout = LayoutKind::StackFirst;
  g.tmpl.parameters = {{"heap_base", heap_base}, {"overflow_len", 64}};
  g.tmpl.sp_global = s.sp_global;
  g.tmpl.frame_sizes = {{f + 0, 32}};
  g.tmpl.legacy_guard_slot = ssp::legacy_guard_address(g.module);
  g.tmpl.expected_stdout = "H:done\n";
  expect_benign(g.tmpl);  // canaries never see heap writes
  return g;
}

Guest gen_spin() {
  Scaffold s(LayoutKind::StackFirst, SpNaming::NameSection, false);
  uint32_t f = s.b.declare_func(FuncSignature{});
  s.b.set_body(f, {}, {loop(), br(0), end()});
  s.b.add_export("_start", wasm::ExportKind::Func, f);
  s.b.set_func_name(f, "_start");

  Guest g;
  g.name = "spin-sf";
  g.module = s.b.build();
  g.tmpl.name = g.name;
  g.tmpl.layout = LayoutKind::StackFirst;
  g.tmpl.sp_global = s.sp_global;
  g.tmpl.frame_sizes = {{f + 0, 0}};
  g.tmpl.legacy_guard_slot = ssp::legacy_guard_address(g.module);
  g.tmpl.timeout_ms = 150;
  g.tmpl.expected["none"] = all_modes(OutcomeCategory::Timeout, OutcomeCategory::Timeout);
  g.tmpl.expected["legacy"] = all_modes(OutcomeCategory::Timeout, OutcomeCategory::Timeout);
  g.tmpl.expected["hardened"] =
      all_modes(OutcomeCategory::Timeout, OutcomeCategory::StartupAbort);
  return g;
}

Guest gen_oob() {
  Scaffold s(LayoutKind::StackFirst, SpNaming::NameSection, false);
  uint32_t f = s.b.declare_func(FuncSignature{});
  s.b.set_body(f, {}, {i32_const(0x0FFFFFF0), i32_const(1), i32_store(0)});
  s.b.add_export("_start", wasm::ExportKind::Func, f);
  s.b.set_func_name(f, "_start");

  Guest g;
  g.name = "oob-sf";
  g.module = s.b.build();
  g.tmpl.name = g.name;
  g.tmpl.layout = LayoutKind::StackFirst;
  g.tmpl.sp_global = s.sp_global;
  g.tmpl.frame_sizes = {{f + 0, 0}};
  g.tmpl.legacy_guard_slot = ssp::legacy_guard_address(g.module);
  g.tmpl.expected["none"] = all_modes(OutcomeCategory::MemoryFault, OutcomeCategory::MemoryFault);
  g.tmpl.expected["legacy"] = all_modes(OutcomeCategory::MemoryFault, OutcomeCategory::MemoryFault);
  g.tmpl.expected["hardened"] =
      all_modes(OutcomeCategory::MemoryFault, OutcomeCategory::StartupAbort);
  return g;
}

}  // namespace

std::vector<Guest> gen_benign_suite() {
  std::vector<Guest> out;
  out.push_back(gen_hello());
  out.push_back(gen_factorial());
  out.push_back(gen_early_return());
  out.push_back(gen_frames());
  out.push_back(gen_strings());
  return out;
}

wasm::WasmModule gen_layout_fixture(std::optional<LayoutKind> layout) {
  ModuleBuilder b;
  b.add_memory(kMemoryPages, kMemoryPages);
  b.add_export("memory", wasm::ExportKind::Memory, 0);
  if (!layout) {
    b.add_data(1024, {1, 2, 3, 4});
    uint32_t f = b.declare_func(FuncSignature{});
    b.set_body(f, {}, {});
    b.add_export("_start", wasm::ExportKind::Func, f);
    return b.build();
  }
  uint32_t data_base = *layout == LayoutKind::StackFirst ? kSpInitial : 1024;
  uint32_t sp = b.add_global(ValType::I32, true, wasm::ConstExpr::i32(kSpInitial));
  b.set_global_name(sp, "__stack_pointer");
  b.add_data(static_cast<int32_t>(data_base), {0xAA, 0xBB, 0xCC, 0xDD});

  uint32_t f = b.declare_func(FuncSignature{});
  b.set_body(f, {{1, ValType::I32}},
             {global_get(sp), i32_const(16), sub(), local_tee(0), global_set(sp),
              local_get(0), i32_const(0), i32_store(0),
              local_get(0), i32_const(16), add(), global_set(sp)});
  uint32_t start = b.declare_func(FuncSignature{});
  b.set_body(start, {}, {call(f)});
  b.add_export("_start", wasm::ExportKind::Func, start);
  b.set_func_name(f, "framed");
  b.set_func_name(start, "_start");
  return b.build();
}

std::vector<Guest> default_corpus() {
  std::vector<Guest> out = gen_benign_suite();
  out.push_back(gen_guest_A(16, 0, LayoutKind::StackFirst));
  out.push_back(gen_guest_A(16, 24, LayoutKind::StackFirst));
  out.push_back(gen_guest_A(16, 25, LayoutKind::StackFirst));
  out.push_back(gen_guest_A(16, 40, LayoutKind::StackFirst));
  out.push_back(gen_guest_A(16, 32, LayoutKind::NoStackFirst));
  out.push_back(gen_guest_B_bypass(0x41414141, LayoutKind::StackFirst));
  out.push_back(gen_guest_B_bypass(0x41414141, LayoutKind::NoStackFirst));
  out.push_back(gen_heap_negative());
  out.push_back(gen_spin());
  out.push_back(gen_oob());
  return out;
}

namespace {

nlohmann::json template_json(const GuestTemplate& t) {
  nlohmann::json j;
  j["name"] = t.name;
  j["layout"] = analysis::layout_kind_name(t.layout);
  j["parameters"] = t.parameters;
  nlohmann::json expected = nlohmann::json::object();
  for (const auto& [flavor, modes] : t.expected) {
    for (const auto& [mode, category] : modes) {
      expected[flavor][mode] = harness::category_name(category);
    }
  }
  j["expected"] = expected;
  nlohmann::json truth;
  truth["sp_global"] = t.sp_global;
  nlohmann::json sizes = nlohmann::json::object();
  for (const auto& [func, size] : t.frame_sizes) sizes[std::to_string(func)] = size;
  truth["frame_sizes"] = sizes;
  if (t.legacy_guard_slot) truth["guard_slot_address"] = *t.legacy_guard_slot;
  j["ground_truth"] = truth;
  if (t.expected_stdout) j["expected_stdout"] = *t.expected_stdout;
  if (t.timeout_ms) j["timeout_ms"] = t.timeout_ms;
  j["file"] = t.name + ".wasm";
  return j;
}

GuestTemplate template_from_json(const nlohmann::json& j) {
  GuestTemplate t;
  t.name = j.at("name").get<std::string>();
  std::string layout = j.at("layout").get<std::string>();
  t.layout = layout == "stack-first" ? LayoutKind::StackFirst
             : layout == "no-stack-first" ? LayoutKind::NoStackFirst
                                          : LayoutKind::Unknown;
  for (const auto& [k, v] : j.at("parameters").items()) t.parameters[k] = v.get<int64_t>();
  for (const auto& [flavor, modes] : j.at("expected").items()) {
    for (const auto& [mode, cat] : modes.items()) {
      auto parsed = harness::category_from_name(cat.get<std::string>());
      if (!parsed) throw std::runtime_error("manifest: unknown category " + cat.get<std::string>());
      t.expected[flavor][mode] = *parsed;
    }
  }
  const auto& truth = j.at("ground_truth");
  t.sp_global = truth.at("sp_global").get<uint32_t>();
  for (const auto& [k, v] : truth.at("frame_sizes").items()) {
    t.frame_sizes[static_cast<uint32_t>(std::stoul(k))] = v.get<uint32_t>();
  }
  if (truth.contains("guard_slot_address")) {
    t.legacy_guard_slot = truth.at("guard_slot_address").get<uint32_t>();
  }
  if (j.contains("expected_stdout")) t.expected_stdout = j.at("expected_stdout").get<std::string>();
  if (j.contains("timeout_ms")) t.timeout_ms = j.at("timeout_ms").get<uint32_t>();
  return t;
}

}  // namespace

std::string manifest_json_text(const std::vector<Guest>& guests) {
  nlohmann::json j;
  j["guests"] = nlohmann::json::array();
  for (const auto& g : guests) j["guests"].push_back(template_json(g.tmpl));
  return j.dump(2) + "\n";
}

void write_corpus(const std::vector<Guest>& guests, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& g : guests) {
    auto bytes = wasm::encode(g.module);
    std::ofstream out(dir / (g.name + ".wasm"), std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / (g.name + ".wasm")).string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
  std::ofstream manifest(dir / "manifest.json");
  if (!manifest) throw std::runtime_error("cannot write corpus manifest");
  manifest << manifest_json_text(guests);
}

std::vector<Guest> load_corpus(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / "manifest.json");
  if (!manifest) throw std::runtime_error("no manifest.json in " + dir.string());
  nlohmann::json j = nlohmann::json::parse(manifest);
  std::vector<Guest> out;
  for (const auto& entry : j.at("guests")) {
    Guest g;
    g.tmpl = template_from_json(entry);
    g.name = g.tmpl.name;
    auto path = dir / entry.at("file").get<std::string>();
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("missing corpus module " + path.string());
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    g.module = wasm::decode(bytes);
    out.push_back(std::move(g));
  }
  return out;
}

}  // namespace wssp::corpus
