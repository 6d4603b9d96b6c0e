/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <doctest.h>

#include "corpus/corpus.hpp"
#include "harness/harness.hpp"
#include "wasm/builder.hpp"
#include "wasm/decode.hpp"
#include "wasm/encode.hpp"
#include "wasm/validate.hpp"

using namespace wssp;
using namespace wasm::ins;
using wasm::FuncSignature;
using wasm::ValType;

namespace {
const std::vector<uint8_t> kHeader = {0x00, 0x61, 0x73, 0x6D, 0x01, 0x00, 0x00, 0x00};
}

TEST_CASE("decode of a header-only module yields an empty module") {
  wasm::WasmModule m = wasm::decode(kHeader);
  CHECK(m.types.empty());
  CHECK(m.imports.empty());
  CHECK(m.functions.empty());
  CHECK(m.code.empty());
  CHECK(m.data.empty());
  CHECK(m.exports.empty());
  CHECK_FALSE(m.start.has_value());
}

TEST_CASE("decode rejects wrong magic and version") {
  std::vector<uint8_t> bad_version = kHeader;
  bad_version[4] = 0x02;
  CHECK_THROWS_AS(wasm::decode(bad_version), wasm::MalformedModule);

  std::vector<uint8_t> bad_magic = kHeader;
  bad_magic[0] = 0x01;
  CHECK_THROWS_AS(wasm::decode(bad_magic), wasm::MalformedModule);

  CHECK_THROWS_AS(wasm::decode(std::vector<uint8_t>{0x00, 0x61}), wasm::MalformedModule);
}

TEST_CASE("encode of an empty module is exactly the header") {
  wasm::WasmModule empty;
  CHECK(wasm::encode(empty) == kHeader);
}

TEST_CASE("global section golden bytes for one mutable i32 global") {
  // hand-assembled per the binary format: section id 6, size 6, count 1,
  // valtype 0x7F, mut 1, i32.const 0, end
  wasm::WasmModule m;
  m.globals.push_back(wasm::GlobalDef{{ValType::I32, true}, wasm::ConstExpr::i32(0)});
  std::vector<uint8_t> expected = kHeader;
  const uint8_t section[] = {0x06, 0x06, 0x01, 0x7F, 0x01, 0x41, 0x00, 0x0B};
  expected.insert(expected.end(), std::begin(section), std::end(section));
  CHECK(wasm::encode(m) == expected);
}

TEST_CASE("decode(encode(m)) is structurally identical and byte-stable") {
  for (const auto& guest : corpus::default_corpus()) {
    auto bytes = wasm::encode(guest.module);
    wasm::WasmModule decoded = wasm::decode(bytes);
    CHECK(decoded == guest.module);
    CHECK(wasm::encode(decoded) == bytes);
  }
}

TEST_CASE("padded LEB input normalizes after one encode") {
  // type section with a padded size LEB (0x84 0x80 0x00 == 4)
  std::vector<uint8_t> bytes = kHeader;
  const uint8_t section[] = {0x01, 0x84, 0x80, 0x00, 0x01, 0x60, 0x00, 0x00};
  bytes.insert(bytes.end(), std::begin(section), std::end(section));
  wasm::WasmModule m = wasm::decode(bytes);
  REQUIRE(m.types.size() == 1);

  auto normalized = wasm::encode(m);
  CHECK(normalized != bytes);  // canonical output is shorter
  CHECK(wasm::decode(normalized) == m);
  CHECK(wasm::encode(wasm::decode(normalized)) == normalized);
}

TEST_CASE("custom sections other than name survive byte-exactly") {
  wasm::ModuleBuilder b;
  b.add_memory(1);
  uint32_t f = b.declare_func(FuncSignature{});
  b.set_body(f, {}, {});
  wasm::WasmModule m = b.build();
  m.custom.push_back(wasm::CustomSection{"weird.metadata", {0xDE, 0xAD, 0x00, 0xBE, 0xEF}, 5});

  auto bytes = wasm::encode(m);
  wasm::WasmModule decoded = wasm::decode(bytes);
  REQUIRE(decoded.custom.size() == 1);
  CHECK(decoded.custom[0].name == "weird.metadata");
  CHECK(decoded.custom[0].bytes == m.custom[0].bytes);
  CHECK(decoded.custom[0].after_section == 5);
  CHECK(wasm::encode(decoded) == bytes);
}

TEST_CASE("opaque instructions re-encode to their original bytes") {
  // f64 arithmetic is outside the structured set: f64.const 1.0; f64.const
  // 2.0; f64.add; drop — carried opaquely
  wasm::ModuleBuilder b;
  uint32_t f = b.declare_func(FuncSignature{});
  b.set_body(f, {}, {});
  wasm::WasmModule m = b.build();

  std::vector<uint8_t> bytes = kHeader;
  // type (60 00 00), function, code with f64 ops
  const uint8_t rest[] = {
      0x01, 0x04, 0x01, 0x60, 0x00, 0x00,              // type section
      0x03, 0x02, 0x01, 0x00,                          // function section
      0x0A, 0x18, 0x01, 0x16, 0x00,                    // code section, one body, no locals
      0x44, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0xF0, 0x3F,  // f64.const 1.0
      0x44, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x40,  // f64.const 2.0
      0xA0,                                            // f64.add
      0x1A,                                            // drop
      0x0B,                                            // end
  };
  bytes.insert(bytes.end(), std::begin(rest), std::end(rest));

  wasm::WasmModule decoded = wasm::decode(bytes);
  REQUIRE(decoded.code.size() == 1);
  CHECK(decoded.code[0].instrs[0].op == wasm::Op::Opaque);
  CHECK(decoded.code[0].instrs[0].raw_opcode == 0x44);
  CHECK(wasm::encode(decoded) == bytes);
}

TEST_CASE("decode rejects structural garbage") {
  auto with_section = [&](std::initializer_list<uint8_t> section) {
    std::vector<uint8_t> bytes = kHeader;
    bytes.insert(bytes.end(), section.begin(), section.end());
    return bytes;
  };
  // truncated section payload
  CHECK_THROWS_AS(wasm::decode(with_section({0x01, 0x10, 0x01})), wasm::MalformedModule);
  // unknown section id
  CHECK_THROWS_AS(wasm::decode(with_section({0x0D, 0x01, 0x00})), wasm::MalformedModule);
  // out-of-order sections (function before type)
  CHECK_THROWS_AS(
      wasm::decode(with_section({0x03, 0x02, 0x01, 0x00, 0x01, 0x04, 0x01, 0x60, 0x00, 0x00})),
      wasm::MalformedModule);
  // opcode outside core 1.0 (sign-extension 0xC0)
  CHECK_THROWS_AS(wasm::decode(with_section({0x01, 0x04, 0x01, 0x60, 0x00, 0x00, 0x03, 0x02, 0x01,
                                             0x00, 0x0A, 0x06, 0x01, 0x04, 0x00, 0x41, 0x00,
                                             0xC0})),
                  wasm::MalformedModule);
}

TEST_CASE("validate: empty module is clean") { CHECK(wasm::validate(wasm::WasmModule{}).empty()); }

TEST_CASE("validate: call beyond the function space is a violation") {
  wasm::ModuleBuilder b;
  uint32_t f0 = b.declare_func(FuncSignature{});
  uint32_t f1 = b.declare_func(FuncSignature{});
  uint32_t f2 = b.declare_func(FuncSignature{});
  b.set_body(f0, {}, {});
  b.set_body(f1, {}, {});
  b.set_body(f2, {}, {call(7)});
  auto violations = wasm::validate(b.build());
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].kind == wasm::Violation::Kind::OutOfRangeIndex);
}

TEST_CASE("validate: corpus modules are clean") {
  for (const auto& guest : corpus::default_corpus()) {
    CAPTURE(guest.name);
    CHECK(wasm::validate(guest.module).empty());
  }
}

TEST_CASE("validate flags unbalanced nesting and immutable global writes") {
  wasm::ModuleBuilder b;
  uint32_t g = b.add_global(ValType::I32, false, wasm::ConstExpr::i32(1));
  uint32_t f = b.declare_func(FuncSignature{});
  b.set_body(f, {}, {block(), i32_const(1), global_set(g)});
  auto violations = wasm::validate(b.build());
  bool saw_nesting = false;
  bool saw_immutable = false;
  for (const auto& v : violations) {
    saw_nesting = saw_nesting || v.kind == wasm::Violation::Kind::Nesting;
    saw_immutable = saw_immutable || v.kind == wasm::Violation::Kind::ImmutableGlobalWrite;
  }
  CHECK(saw_nesting);
  CHECK(saw_immutable);
}

TEST_CASE("validate: active data segment must fit minimum memory") {
  wasm::ModuleBuilder b;
  b.add_memory(1);
  b.add_data(65534, {1, 2, 3, 4});
  auto violations = wasm::validate(b.build());
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].kind == wasm::Violation::Kind::SegmentOutOfBounds);
}

TEST_CASE("remap with zero inserted imports is the identity") {
  auto guest = corpus::default_corpus().front();
  CHECK(wasm::remap_function_indices(guest.module, 0) == guest.module);
}

TEST_CASE("remap shifts defined references but not import references") {
  wasm::ModuleBuilder b;
  uint32_t imp = b.import_func("env", "host", FuncSignature{});
  uint32_t f0 = b.declare_func(FuncSignature{});
  uint32_t f1 = b.declare_func(FuncSignature{});
  b.set_body(f0, {}, {call(imp), call(f1)});
  b.set_body(f1, {}, {});
  b.add_table(2);
  b.add_element(0, 0, {f1});
  b.add_export("_start", wasm::ExportKind::Func, f1);
  b.set_start(f0);
  b.set_func_name(f0, "zero");
  wasm::WasmModule m = b.build();

  // simulate appending two imports at the end of the import list
  wasm::WasmModule grown = m;
  for (int i = 0; i < 2; i++) {
    wasm::Import extra;
    extra.module = "test";
    extra.field = "noop" + std::to_string(i);
    extra.kind = wasm::ImportKind::Func;
    extra.desc = grown.functions[0];
    grown.imports.push_back(extra);
  }
  wasm::WasmModule remapped = wasm::remap_function_indices(grown, 2);

  CHECK(remapped.code[0].instrs[0].a == imp);      // import reference unchanged
  CHECK(remapped.code[0].instrs[1].a == f1 + 2);   // defined reference shifted
  CHECK(remapped.elements[0].func_indices[0] == f1 + 2);
  CHECK(remapped.exports[0].index == f1 + 2);      // "_start" -> old f1 + 2
  CHECK(remapped.start == f0 + 2);
  CHECK(remapped.names.func_names.at(f0 + 2) == "zero");
  CHECK(wasm::validate(remapped).empty());
}

TEST_CASE("remap soundness: behavior is preserved under the harness") {
  // run a benign guest, then remap it with two satisfied no-op imports and
  // run again; observable behavior must match
  for (const auto& guest : corpus::gen_benign_suite()) {
    CAPTURE(guest.name);
    harness::RunSpec spec;
    spec.random_mode = harness::RandomMode::Fixed;
    spec.fixed_bytes = {1, 2, 3, 4};
    auto before = harness::run_module(guest.module, spec);

    wasm::WasmModule grown = guest.module;
    uint32_t sig = 0;
    bool found = false;
    for (size_t i = 0; i < grown.types.size() && !found; i++) {
      if (grown.types[i].params.empty() && grown.types[i].results.empty()) {
        sig = static_cast<uint32_t>(i);
        found = true;
      }
    }
    if (!found) {
      grown.types.push_back(wasm::FuncSignature{});
      sig = static_cast<uint32_t>(grown.types.size() - 1);
    }
    for (int i = 0; i < 2; i++) {
      wasm::Import extra;
      extra.module = "test";
      extra.field = "noop" + std::to_string(i);
      extra.kind = wasm::ImportKind::Func;
      extra.desc = sig;
      grown.imports.push_back(extra);
    }
    wasm::WasmModule remapped = wasm::remap_function_indices(grown, 2);

    auto after = harness::run_module(remapped, spec);
    CHECK(before.category == after.category);
    CHECK(before.exit_code == after.exit_code);
    CHECK(before.stdout_bytes == after.stdout_bytes);
  }
}
