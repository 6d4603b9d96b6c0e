/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wasm/module.hpp"

namespace wssp::engine {

enum class TrapKind {
  Unreachable,
  MemoryOutOfBounds,
  TableOutOfBounds,
  UninitializedElement,
  IndirectCallTypeMismatch,
  IntegerDivideByZero,
  CallStackExhausted,
  Deadline,
  FuelExhausted,
  HostError,
};

const char* trap_kind_name(TrapKind k);

struct Trap {
  TrapKind kind = TrapKind::Unreachable;
  uint32_t func_index = 0;  // innermost wasm frame at the trap site
  std::string detail;
};

struct ValidationError {
  std::string message;
  std::optional<uint32_t> func_index;
};

// Full-module validation including operand-stack type checking. Opaque
// (non-executable) instructions are rejected here, so passing this gate
// means the interpreter can run every path.
std::optional<ValidationError> validate_module(const wasm::WasmModule& m);

class Instance;

struct HostResult {
  enum class Signal { Continue, Exit, Trap };
  Signal signal = Signal::Continue;
  uint32_t exit_code = 0;
  std::string trap_detail;
};

// Runtime values are untyped bit patterns; validation guarantees shapes.
using Value = uint64_t;

using HostFunc = std::function<HostResult(Instance&, std::span<const Value> args,
                                          std::span<Value> results)>;

// Maps a function import to its host implementation; returning nullopt
// fails instantiation.
using ImportResolver =
    std::function<std::optional<HostFunc>(const wasm::Import&, const wasm::FuncSignature&)>;

struct RunLimits {
  std::optional<std::chrono::steady_clock::time_point> deadline;
  uint64_t fuel = 0;  // 0 = unlimited
};

struct Outcome {
  enum class Kind { Returned, Exited, Trapped };
  Kind kind = Kind::Returned;
  std::vector<Value> values;  // Returned
  uint32_t exit_code = 0;     // Exited
  Trap trap;                  // Trapped
};

class InstantiationError : public std::runtime_error {
 public:
  explicit InstantiationError(const std::string& reason) : std::runtime_error(reason) {}
};

// One guest execution context: memory, table, globals, host bindings.
class Instance {
 public:
  Instance(const wasm::WasmModule& m, const ImportResolver& resolver);
  ~Instance();
  Instance(const Instance&) = delete;
  Instance& operator=(const Instance&) = delete;

  // Copies active segments, fills the table, and runs the start function if
  // present. Must be called exactly once before invoke_export.
  Outcome initialize(RunLimits& limits);

  Outcome invoke_export(const std::string& name, std::span<const Value> args, RunLimits& limits);

  // Debug and host-function access.
  size_t mem_size() const;
  bool mem_read(uint32_t addr, std::span<uint8_t> out) const;
  bool mem_write(uint32_t addr, std::span<const uint8_t> bytes);
  std::optional<uint32_t> read_u32(uint32_t addr) const;
  bool write_u32(uint32_t addr, uint32_t value);
  std::optional<uint64_t> global_value(uint32_t index) const;
  std::optional<uint64_t> global_by_export(const std::string& name) const;

  const wasm::WasmModule& module() const;

  struct Impl;  // implementation detail

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace wssp::engine
