/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <doctest.h>

#include "engine/engine.hpp"
#include "wasm/builder.hpp"

using namespace wssp;
using namespace wasm::ins;
using engine::Outcome;
using wasm::FuncSignature;
using wasm::ValType;

namespace {

engine::ImportResolver no_imports() {
  return [](const wasm::Import&, const FuncSignature&) -> std::optional<engine::HostFunc> {
    return std::nullopt;
  };
}

// single exported function "f", 2 pages of memory
wasm::WasmModule one_func(FuncSignature sig, std::vector<std::pair<uint32_t, ValType>> locals,
                          std::vector<wasm::Instr> body) {
  wasm::ModuleBuilder b;
  b.add_memory(2, 4);
  uint32_t f = b.declare_func(std::move(sig));
  b.set_body(f, std::move(locals), std::move(body));
  b.add_export("f", wasm::ExportKind::Func, f);
  return b.build();
}

Outcome invoke(const wasm::WasmModule& m, std::span<const engine::Value> args = {},
               uint64_t fuel = 0) {
  engine::Instance inst(m, no_imports());
  engine::RunLimits limits;
  limits.fuel = fuel;
  auto init = inst.initialize(limits);
  REQUIRE(init.kind == Outcome::Kind::Returned);
  return inst.invoke_export("f", args, limits);
}

}  // namespace

TEST_CASE("engine validator accepts every corpus-shaped body but rejects type errors") {
  // i32.add with a single operand
  auto bad = one_func(FuncSignature{{}, {ValType::I32}}, {}, {i32_const(1), add()});
  CHECK(engine::validate_module(bad).has_value());

  // leftover value in a void function
  auto leftover = one_func(FuncSignature{}, {}, {i32_const(1)});
  CHECK(engine::validate_module(leftover).has_value());

  // branch depth out of range
  auto bad_br = one_func(FuncSignature{}, {}, {block(), br(5), end()});
  CHECK(engine::validate_module(bad_br).has_value());

  // well-typed control flow
  auto ok = one_func(FuncSignature{{}, {ValType::I32}}, {},
                     {block(), i32_const(1), br_if(0), end(), i32_const(42)});
  CHECK_FALSE(engine::validate_module(ok).has_value());
}

TEST_CASE("engine validator rejects opaque opcodes") {
  auto m = one_func(FuncSignature{}, {}, {});
  wasm::Instr opaque;
  opaque.op = wasm::Op::Opaque;
  opaque.raw_opcode = 0xA0;  // f64.add
  m.code[0].instrs.insert(m.code[0].instrs.begin(), opaque);
  auto err = engine::validate_module(m);
  REQUIRE(err.has_value());
  CHECK(err->message.find("not executable") != std::string::npos);
}

TEST_CASE("engine arithmetic and comparisons") {
  auto add3 = one_func(FuncSignature{{ValType::I32, ValType::I32}, {ValType::I32}}, {},
                       {local_get(0), local_get(1), add(), i32_const(1), add()});
  engine::Value args[] = {41, 0xFFFFFFFF};  // 41 + (-1) + 1 = 41
  auto out = invoke(add3, args);
  REQUIRE(out.kind == Outcome::Kind::Returned);
  CHECK(static_cast<uint32_t>(out.values.at(0)) == 41);

  auto cmp = one_func(FuncSignature{{ValType::I32, ValType::I32}, {ValType::I32}}, {},
                      {local_get(0), local_get(1), lt_u()});
  engine::Value unsigned_check[] = {0xFFFFFFF0, 5};  // unsigned: huge < 5 is false
  out = invoke(cmp, unsigned_check);
  CHECK(out.values.at(0) == 0);

  auto divu = one_func(FuncSignature{{ValType::I32, ValType::I32}, {ValType::I32}}, {},
                       {local_get(0), local_get(1), div_u()});
  engine::Value div_args[] = {7, 2};
  CHECK(invoke(divu, div_args).values.at(0) == 3);
  engine::Value div_zero[] = {7, 0};
  auto trapped = invoke(divu, div_zero);
  REQUIRE(trapped.kind == Outcome::Kind::Trapped);
  CHECK(trapped.trap.kind == engine::TrapKind::IntegerDivideByZero);
}

TEST_CASE("engine control flow: loop, br_table, if/else, select") {
  // sum 1..n with a loop
  auto sum = one_func(
      FuncSignature{{ValType::I32}, {ValType::I32}}, {{2, ValType::I32}},
      {block(), loop(),
       local_get(1), local_get(0), ge_u(), br_if(1),
       local_get(1), i32_const(1), add(), local_tee(1),
       local_get(2), add(), local_set(2),
       br(0), end(), end(),
       local_get(2)});
  engine::Value ten[] = {10};
  CHECK(invoke(sum, ten).values.at(0) == 55);

  // br_table dispatch: 0 -> 11, 1 -> 22, default -> 33
  auto dispatch = one_func(
      FuncSignature{{ValType::I32}, {ValType::I32}}, {},
      {block(), block(), block(),
       local_get(0), wasm::Instr{.op = wasm::Op::BrTable, .b = 2, .table = {0, 1}},
       end(), i32_const(11), ret(), end(), i32_const(22), ret(), end(), i32_const(33)});
  for (auto [input, expected] : std::vector<std::pair<uint32_t, uint32_t>>{
           {0, 11}, {1, 22}, {2, 33}, {100, 33}}) {
    engine::Value v[] = {input};
    CAPTURE(input);
    CHECK(invoke(dispatch, v).values.at(0) == expected);
  }

  auto pick = one_func(FuncSignature{{ValType::I32}, {ValType::I32}}, {},
                       {i32_const(5), i32_const(9), local_get(0), wasm::Instr{.op = wasm::Op::Select}});
  engine::Value yes[] = {1};
  engine::Value no[] = {0};
  CHECK(invoke(pick, yes).values.at(0) == 5);
  CHECK(invoke(pick, no).values.at(0) == 9);

  auto iff = one_func(FuncSignature{{ValType::I32}, {ValType::I32}},
                      {{1, ValType::I32}},
                      {local_get(0), if_(), i32_const(1), local_set(1), else_(), i32_const(2),
                       local_set(1), end(), local_get(1)});
  CHECK(invoke(iff, yes).values.at(0) == 1);
  CHECK(invoke(iff, no).values.at(0) == 2);
}

TEST_CASE("engine memory: stores, loads, bounds, grow") {
  auto mem = one_func(FuncSignature{{ValType::I32, ValType::I32}, {ValType::I32}}, {},
                      {local_get(0), local_get(1), i32_store(0), local_get(0), i32_load(0)});
  engine::Value ok_args[] = {1024, 0xDEADBEEF};
  CHECK(static_cast<uint32_t>(invoke(mem, ok_args).values.at(0)) == 0xDEADBEEF);

  // 2 pages = 131072 bytes; last valid i32 address is 131068
  engine::Value edge[] = {131068, 7};
  CHECK(invoke(mem, edge).values.at(0) == 7);
  engine::Value oob[] = {131069, 7};
  auto trapped = invoke(mem, oob);
  REQUIRE(trapped.kind == Outcome::Kind::Trapped);
  CHECK(trapped.trap.kind == engine::TrapKind::MemoryOutOfBounds);

  // sub-word accesses sign- and zero-extend
  auto bytes = one_func(FuncSignature{{}, {ValType::I32}}, {},
                        {i32_const(64), i32_const(0x80), i32_store8(0),
                         i32_const(64), wasm::Instr{.op = wasm::Op::I32Load8S, .a = 0, .b = 0}});
  CHECK(static_cast<uint32_t>(invoke(bytes).values.at(0)) == 0xFFFFFF80);

  auto grow = one_func(FuncSignature{{}, {ValType::I32}}, {},
                       {i32_const(1), wasm::Instr{.op = wasm::Op::MemoryGrow},
                        drop(), wasm::Instr{.op = wasm::Op::MemorySize}});
  CHECK(invoke(grow).values.at(0) == 3);

  // growing past the declared max fails with -1
  auto grow_fail = one_func(FuncSignature{{}, {ValType::I32}}, {},
                            {i32_const(100), wasm::Instr{.op = wasm::Op::MemoryGrow}});
  CHECK(static_cast<uint32_t>(invoke(grow_fail).values.at(0)) == 0xFFFFFFFF);
}

TEST_CASE("engine calls: direct, indirect, signature mismatch, uninitialized") {
  wasm::ModuleBuilder b;
  b.add_memory(1);
  uint32_t ret7 = b.declare_func(FuncSignature{{}, {ValType::I32}});
  uint32_t ret9 = b.declare_func(FuncSignature{{}, {ValType::I32}});
  uint32_t takes_arg = b.declare_func(FuncSignature{{ValType::I32}, {ValType::I32}});
  uint32_t f = b.declare_func(FuncSignature{{ValType::I32}, {ValType::I32}});
  b.set_body(ret7, {}, {i32_const(7)});
  b.set_body(ret9, {}, {i32_const(9)});
  b.set_body(takes_arg, {}, {local_get(0)});
  // table: [ret7, ret9, takes_arg, (uninitialized)]
  b.add_table(4);
  b.add_element(0, 0, {ret7, ret9, takes_arg});
  uint32_t void_to_i32 = 0;  // type index of {} -> i32 is the first added
  b.set_body(f, {}, {local_get(0), call_indirect(void_to_i32)});
  b.add_export("f", wasm::ExportKind::Func, f);
  wasm::WasmModule m = b.build();

  engine::Value zero[] = {0};
  engine::Value one[] = {1};
  CHECK(invoke(m, zero).values.at(0) == 7);
  CHECK(invoke(m, one).values.at(0) == 9);

  engine::Value two[] = {2};  // wrong signature at slot 2
  auto mismatch = invoke(m, two);
  REQUIRE(mismatch.kind == Outcome::Kind::Trapped);
  CHECK(mismatch.trap.kind == engine::TrapKind::IndirectCallTypeMismatch);

  engine::Value three[] = {3};  // empty slot
  CHECK(invoke(m, three).trap.kind == engine::TrapKind::UninitializedElement);

  engine::Value hundred[] = {100};  // out of table bounds
  CHECK(invoke(m, hundred).trap.kind == engine::TrapKind::TableOutOfBounds);
}

TEST_CASE("engine trap attribution names the innermost function") {
  wasm::ModuleBuilder b;
  b.add_memory(1);
  uint32_t inner = b.declare_func(FuncSignature{});
  uint32_t outer = b.declare_func(FuncSignature{});
  b.set_body(inner, {}, {unreachable()});
  b.set_body(outer, {}, {call(inner)});
  b.add_export("f", wasm::ExportKind::Func, outer);
  auto out = invoke(b.build());
  REQUIRE(out.kind == Outcome::Kind::Trapped);
  CHECK(out.trap.kind == engine::TrapKind::Unreachable);
  CHECK(out.trap.func_index == inner);
}

TEST_CASE("engine enforces fuel and recursion limits") {
  auto spin = one_func(FuncSignature{}, {}, {loop(), br(0), end()});
  auto out = invoke(spin, {}, 10000);
  REQUIRE(out.kind == Outcome::Kind::Trapped);
  CHECK(out.trap.kind == engine::TrapKind::FuelExhausted);

  wasm::ModuleBuilder b;
  b.add_memory(1);
  uint32_t f = b.declare_func(FuncSignature{});
  b.set_body(f, {}, {call(f)});
  b.add_export("f", wasm::ExportKind::Func, f);
  out = invoke(b.build());
  REQUIRE(out.kind == Outcome::Kind::Trapped);
  CHECK(out.trap.kind == engine::TrapKind::CallStackExhausted);
}

TEST_CASE("engine deadline interrupts a spinning guest") {
  auto spin = one_func(FuncSignature{}, {}, {loop(), br(0), end()});
  engine::Instance inst(spin, no_imports());
  engine::RunLimits limits;
  auto started = std::chrono::steady_clock::now();
  limits.deadline = started + std::chrono::milliseconds(100);
  inst.initialize(limits);
  auto out = inst.invoke_export("f", {}, limits);
  auto elapsed = std::chrono::steady_clock::now() - started;
  REQUIRE(out.kind == Outcome::Kind::Trapped);
  CHECK(out.trap.kind == engine::TrapKind::Deadline);
  CHECK(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() < 600);
}

TEST_CASE("engine start section runs during initialization") {
  wasm::ModuleBuilder b;
  b.add_memory(1);
  uint32_t g = b.add_global(ValType::I32, true, wasm::ConstExpr::i32(0));
  uint32_t init = b.declare_func(FuncSignature{});
  uint32_t f = b.declare_func(FuncSignature{{}, {ValType::I32}});
  b.set_body(init, {}, {i32_const(123), global_set(g)});
  b.set_body(f, {}, {global_get(g)});
  b.set_start(init);
  b.add_export("f", wasm::ExportKind::Func, f);

  engine::Instance inst(b.build(), no_imports());
  engine::RunLimits limits;
  auto init_out = inst.initialize(limits);
  REQUIRE(init_out.kind == Outcome::Kind::Returned);
  CHECK(inst.global_value(g) == 123);
  auto out = inst.invoke_export("f", {}, limits);
  CHECK(out.values.at(0) == 123);
}

TEST_CASE("engine locals are zero-initialized and params pass through") {
  auto m = one_func(FuncSignature{{ValType::I32}, {ValType::I32}}, {{3, ValType::I32}},
                    {local_get(0), local_get(1), add(), local_get(3), add()});
  engine::Value v[] = {77};
  CHECK(invoke(m, v).values.at(0) == 77);
}
