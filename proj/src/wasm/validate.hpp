/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wasm/module.hpp"

namespace wssp::wasm {

struct Violation {
  enum class Kind {
    OutOfRangeIndex,
    TypeMismatch,
    Nesting,
    MultipleMemories,
    SegmentOutOfBounds,
    ImmutableGlobalWrite,
    BadInitExpr,
    DuplicateExport,
  };
  Kind kind;
  std::string message;
  std::optional<uint32_t> func_index;  // index space, when body-local
};

const char* violation_kind_name(Violation::Kind k);

// Structural checks: index ranges, init-expr/global typing, block nesting.
// Operand-stack typing is the engine validator's job.
std::vector<Violation> validate(const WasmModule& m);

// Applies `map` to every function-index reference: call immediates, element
// segments, exports, start, and name-map keys.
WasmModule remap_func_refs(const WasmModule& m, const std::function<uint32_t(uint32_t)>& map);

// After appending `inserted_import_count` function imports at the end of the
// import list, shifts references to previously defined functions up by that
// amount; references to pre-existing imports stay put.
WasmModule remap_function_indices(const WasmModule& m, uint32_t inserted_import_count);

}  // namespace wssp::wasm
