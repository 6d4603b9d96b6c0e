/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "engine/engine.hpp"

#include <cstring>

#include "wasm/validate.hpp"

namespace wssp::engine {

using wasm::FuncSignature;
using wasm::Instr;
using wasm::Op;
using wasm::ValType;
using wasm::WasmModule;

const char* trap_kind_name(TrapKind k) {
  switch (k) {
    case TrapKind::Unreachable: return "unreachable";
    case TrapKind::MemoryOutOfBounds: return "memory-out-of-bounds";
    case TrapKind::TableOutOfBounds: return "table-out-of-bounds";
    case TrapKind::UninitializedElement: return "uninitialized-element";
    case TrapKind::IndirectCallTypeMismatch: return "indirect-call-type-mismatch";
    case TrapKind::IntegerDivideByZero: return "integer-divide-by-zero";
    case TrapKind::CallStackExhausted: return "call-stack-exhausted";
    case TrapKind::Deadline: return "deadline";
    case TrapKind::FuelExhausted: return "fuel-exhausted";
    case TrapKind::HostError: return "host-error";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Validation: the standard operand-stack algorithm with an unknown type for
// unreachable polymorphism.

namespace {

struct VType {
  bool known = true;
  ValType type = ValType::I32;
  bool operator==(const VType&) const = default;
};

constexpr VType kUnknown{false, ValType::I32};
inline VType vt(ValType t) { return VType{true, t}; }

struct CtrlFrame {
  Op opcode;
  std::vector<ValType> end_types;
  size_t height = 0;
  bool unreachable = false;
};

class BodyValidator {
 public:
  BodyValidator(const WasmModule& m, uint32_t func_index)
      : m_(m), func_index_(func_index), body_(m.code[func_index - m.num_func_imports()]) {
    const FuncSignature& sig = m.func_sig(func_index);
    locals_.assign(sig.params.begin(), sig.params.end());
    for (const auto& [count, type] : body_.locals) {
      for (uint32_t i = 0; i < count; i++) locals_.push_back(type);
    }
    results_ = sig.results;
  }

  std::optional<std::string> run() {
    push_ctrl(Op::Block, results_);
    for (const Instr& ins : body_.instrs) {
      if (ctrls_.empty()) return "instructions after function end";
      if (auto err = step(ins)) return err;
    }
    if (!ctrls_.empty()) return std::string("missing end");
    if (vals_.size() != results_.size()) return std::string("function leaves wrong number of values");
    return std::nullopt;
  }

 private:
  const WasmModule& m_;
  uint32_t func_index_;
  const wasm::FuncBody& body_;
  std::vector<ValType> locals_;
  std::vector<ValType> results_;
  std::vector<VType> vals_;
  std::vector<CtrlFrame> ctrls_;
  std::optional<std::string> error_;

  void err(const std::string& e) {
    if (!error_) error_ = e;
  }

  void push_val(VType t) { vals_.push_back(t); }
  void push_val(ValType t) { vals_.push_back(vt(t)); }

  VType pop_val() {
    CtrlFrame& frame = ctrls_.back();
    if (vals_.size() == frame.height) {
      if (frame.unreachable) return kUnknown;
      err("value stack underflow");
      return kUnknown;
    }
    VType v = vals_.back();
    vals_.pop_back();
    return v;
  }

  VType pop_val(ValType expect) {
    VType v = pop_val();
    if (v.known && v.type != expect) err("type mismatch");
    return v;
  }

  void push_ctrl(Op opcode, std::vector<ValType> end_types) {
    ctrls_.push_back(CtrlFrame{opcode, std::move(end_types), vals_.size(), false});
  }

  CtrlFrame pop_ctrl() {
    if (ctrls_.empty()) {
      err("control stack underflow");
      return CtrlFrame{Op::Block, {}, 0, true};
    }
    CtrlFrame frame = ctrls_.back();
    for (auto it = frame.end_types.rbegin(); it != frame.end_types.rend(); ++it) pop_val(*it);
    if (vals_.size() != frame.height) err("values left on block exit");
    vals_.resize(frame.height);
    ctrls_.pop_back();
    return frame;
  }

  // Branch target types: loops take no values in core 1.0, blocks their results.
  const std::vector<ValType>& label_types(const CtrlFrame& frame) const {
    static const std::vector<ValType> kEmpty;
    return frame.opcode == Op::Loop ? kEmpty : frame.end_types;
  }

  void mark_unreachable() {
    CtrlFrame& frame = ctrls_.back();
    vals_.resize(frame.height);
    frame.unreachable = true;
  }

  std::vector<ValType> block_types(uint32_t raw) {
    if (raw == wasm::kBlockTypeEmpty) return {};
    return {static_cast<ValType>(raw)};
  }

  const CtrlFrame* frame_at(uint32_t depth) {
    if (depth >= ctrls_.size()) {
      err("branch depth out of range");
      return nullptr;
    }
    return &ctrls_[ctrls_.size() - 1 - depth];
  }

  std::optional<std::string> step(const Instr& ins) {
    switch (ins.op) {
      case Op::Opaque:
        err("opcode 0x" + std::to_string(ins.raw_opcode) + " is not executable by the embedded engine");
        break;
      case Op::Unreachable:
        mark_unreachable();
        break;
      case Op::Nop:
        break;
      case Op::Block:
      case Op::Loop:
        push_ctrl(ins.op, block_types(ins.a));
        break;
      case Op::If:
        pop_val(ValType::I32);
        push_ctrl(Op::If, block_types(ins.a));
        break;
      case Op::Else: {
        CtrlFrame frame = pop_ctrl();
        if (frame.opcode != Op::If) err("else without if");
        push_ctrl(Op::Else, frame.end_types);
        break;
      }
      case Op::End: {
        CtrlFrame frame = pop_ctrl();
        if (frame.opcode == Op::If && !frame.end_types.empty()) {
          err("if with result type requires else");
        }
        for (ValType t : frame.end_types) push_val(t);
        break;
      }
      case Op::Br: {
        if (const CtrlFrame* target = frame_at(ins.a)) {
          const auto& types = label_types(*target);
          for (auto it = types.rbegin(); it != types.rend(); ++it) pop_val(*it);
        }
        mark_unreachable();
        break;
      }
      case Op::BrIf: {
        pop_val(ValType::I32);
        if (const CtrlFrame* target = frame_at(ins.a)) {
          const auto& types = label_types(*target);
          for (auto it = types.rbegin(); it != types.rend(); ++it) pop_val(*it);
          for (ValType t : types) push_val(t);
        }
        break;
      }
      case Op::BrTable: {
        pop_val(ValType::I32);
        const CtrlFrame* def = frame_at(ins.b);
        if (def) {
          size_t arity = label_types(*def).size();
          for (uint32_t t : ins.table) {
            const CtrlFrame* target = frame_at(t);
            if (target && label_types(*target).size() != arity) err("br_table arity mismatch");
          }
          const auto& types = label_types(*def);
          for (auto it = types.rbegin(); it != types.rend(); ++it) pop_val(*it);
        }
        mark_unreachable();
        break;
      }
      case Op::Return:
        for (auto it = results_.rbegin(); it != results_.rend(); ++it) pop_val(*it);
        mark_unreachable();
        break;
      case Op::Call: {
        if (ins.a >= m_.num_funcs()) {
          err("call out of range");
          break;
        }
        const FuncSignature& sig = m_.func_sig(ins.a);
        for (auto it = sig.params.rbegin(); it != sig.params.rend(); ++it) pop_val(*it);
        for (ValType t : sig.results) push_val(t);
        break;
      }
      case Op::CallIndirect: {
        if (ins.a >= m_.types.size()) {
          err("call_indirect type out of range");
          break;
        }
        if (m_.num_tables() == 0) {
          err("call_indirect without table");
          break;
        }
        pop_val(ValType::I32);
        const FuncSignature& sig = m_.types[ins.a];
        for (auto it = sig.params.rbegin(); it != sig.params.rend(); ++it) pop_val(*it);
        for (ValType t : sig.results) push_val(t);
        break;
      }
      case Op::Drop:
        pop_val();
        break;
      case Op::Select: {
        pop_val(ValType::I32);
        VType a = pop_val();
        VType b = pop_val();
        if (a.known && b.known && a.type != b.type) err("select operand types differ");
        push_val(a.known ? a : b);
        break;
      }
      case Op::LocalGet:
        if (ins.a >= locals_.size()) {
          err("local index out of range");
          break;
        }
        push_val(locals_[ins.a]);
        break;
      case Op::LocalSet:
        if (ins.a >= locals_.size()) {
          err("local index out of range");
          break;
        }
        pop_val(locals_[ins.a]);
        break;
      case Op::LocalTee:
        if (ins.a >= locals_.size()) {
          err("local index out of range");
          break;
        }
        pop_val(locals_[ins.a]);
        push_val(locals_[ins.a]);
        break;
      case Op::GlobalGet:
        if (ins.a >= m_.num_globals()) {
          err("global index out of range");
          break;
        }
        push_val(m_.global_type(ins.a).type);
        break;
      case Op::GlobalSet: {
        if (ins.a >= m_.num_globals()) {
          err("global index out of range");
          break;
        }
        wasm::GlobalType gt = m_.global_type(ins.a);
        if (!gt.mut) err("global.set of immutable global");
        pop_val(gt.type);
        break;
      }
      case Op::I32Load:
      case Op::I32Load8S:
      case Op::I32Load8U:
      case Op::I32Load16S:
      case Op::I32Load16U:
        if (m_.num_memories() == 0) err("load without memory");
        pop_val(ValType::I32);
        push_val(ValType::I32);
        break;
      case Op::I32Store:
      case Op::I32Store8:
      case Op::I32Store16:
        if (m_.num_memories() == 0) err("store without memory");
        pop_val(ValType::I32);
        pop_val(ValType::I32);
        break;
      case Op::MemorySize:
        if (m_.num_memories() == 0) err("memory.size without memory");
        push_val(ValType::I32);
        break;
      case Op::MemoryGrow:
        if (m_.num_memories() == 0) err("memory.grow without memory");
        pop_val(ValType::I32);
        push_val(ValType::I32);
        break;
      case Op::I32Const:
        push_val(ValType::I32);
        break;
      case Op::I64Const:
        push_val(ValType::I64);
        break;
      case Op::I32Eqz:
        pop_val(ValType::I32);
        push_val(ValType::I32);
        break;
      case Op::I32Eq:
      case Op::I32Ne:
      case Op::I32LtS:
      case Op::I32LtU:
      case Op::I32GtS:
      case Op::I32GtU:
      case Op::I32LeS:
      case Op::I32LeU:
      case Op::I32GeS:
      case Op::I32GeU:
      case Op::I32Add:
      case Op::I32Sub:
      case Op::I32Mul:
      case Op::I32DivS:
      case Op::I32DivU:
      case Op::I32RemS:
      case Op::I32RemU:
      case Op::I32And:
      case Op::I32Or:
      case Op::I32Xor:
      case Op::I32Shl:
      case Op::I32ShrS:
      case Op::I32ShrU:
        pop_val(ValType::I32);
        pop_val(ValType::I32);
        push_val(ValType::I32);
        break;
    }
    return error_;
  }
};

}  // namespace

std::optional<ValidationError> validate_module(const WasmModule& m) {
  // Structural layer first; it reports richer diagnostics.
  auto violations = wasm::validate(m);
  if (!violations.empty()) {
    return ValidationError{violations.front().message, violations.front().func_index};
  }
  if (m.start) {
    const FuncSignature& sig = m.func_sig(*m.start);
    if (!sig.params.empty() || !sig.results.empty()) {
      return ValidationError{"start function must have empty signature", m.start};
    }
  }
  for (const auto& imp : m.imports) {
    if (imp.kind == wasm::ImportKind::Global && std::get<wasm::GlobalType>(imp.desc).mut) {
      return ValidationError{"imported globals must be immutable", std::nullopt};
    }
  }
  for (uint32_t i = 0; i < m.code.size(); i++) {
    uint32_t func_index = m.num_func_imports() + i;
    BodyValidator v(m, func_index);
    if (auto e = v.run()) return ValidationError{*e, func_index};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Interpreter.

namespace {

constexpr uint32_t kPageSize = 65536;
constexpr uint32_t kEngineMaxPages = 1024;  // 64 MiB safety cap
constexpr uint32_t kMaxCallDepth = 2048;
constexpr uint64_t kDeadlineCheckInterval = 4096;

struct TrapException {
  Trap trap;
};

struct ExitException {
  uint32_t code;
};

// Matching end/else indices per instruction, precomputed per function.
struct JumpTable {
  std::vector<int32_t> end_of;
  std::vector<int32_t> else_of;
};

JumpTable build_jump_table(const std::vector<Instr>& instrs) {
  JumpTable jt;
  jt.end_of.assign(instrs.size(), -1);
  jt.else_of.assign(instrs.size(), -1);
  std::vector<size_t> stack;
  for (size_t i = 0; i < instrs.size(); i++) {
    switch (instrs[i].op) {
      case Op::Block:
      case Op::Loop:
      case Op::If:
        stack.push_back(i);
        break;
      case Op::Else:
        if (!stack.empty()) jt.else_of[stack.back()] = static_cast<int32_t>(i);
        break;
      case Op::End:
        if (!stack.empty()) {
          jt.end_of[stack.back()] = static_cast<int32_t>(i);
          stack.pop_back();
        }
        break;
      default:
        break;
    }
  }
  return jt;
}

}  // namespace

struct Instance::Impl {
  const WasmModule& m;
  std::vector<HostFunc> host_funcs;  // parallel to func imports
  std::vector<uint64_t> globals;
  std::vector<ValType> global_types;
  std::vector<uint8_t> memory;
  std::optional<uint32_t> max_pages;
  std::vector<std::optional<uint32_t>> table;
  std::vector<JumpTable> jump_tables;  // parallel to m.code
  bool initialized = false;

  // execution state
  uint64_t steps = 0;
  uint64_t fuel_left = 0;
  bool fuel_limited = false;
  std::optional<std::chrono::steady_clock::time_point> deadline;
  uint32_t depth = 0;
  Instance* self = nullptr;

  explicit Impl(const WasmModule& mod) : m(mod) {}

  [[noreturn]] void trap(TrapKind kind, uint32_t func_index, std::string detail = {}) {
    throw TrapException{Trap{kind, func_index, std::move(detail)}};
  }

  void charge(uint32_t func_index) {
    steps++;
    if (fuel_limited) {
      if (fuel_left == 0) trap(TrapKind::FuelExhausted, func_index);
      fuel_left--;
    }
    if (deadline && (steps % kDeadlineCheckInterval) == 0) {
      if (std::chrono::steady_clock::now() > *deadline) trap(TrapKind::Deadline, func_index);
    }
  }

  uint64_t mem_pages() const { return memory.size() / kPageSize; }

  template <typename T>
  T load(uint64_t addr, uint32_t func_index) {
    if (addr + sizeof(T) > memory.size()) trap(TrapKind::MemoryOutOfBounds, func_index);
    T v;
    std::memcpy(&v, memory.data() + addr, sizeof(T));
    return v;
  }

  template <typename T>
  void store(uint64_t addr, T v, uint32_t func_index) {
    if (addr + sizeof(T) > memory.size()) trap(TrapKind::MemoryOutOfBounds, func_index);
    std::memcpy(memory.data() + addr, &v, sizeof(T));
  }

  std::vector<Value> call_function(uint32_t func_index, std::span<const Value> args);
  std::vector<Value> exec_body(uint32_t func_index, std::span<const Value> args);
};

std::vector<Value> Instance::Impl::call_function(uint32_t func_index, std::span<const Value> args) {
  if (depth >= kMaxCallDepth) trap(TrapKind::CallStackExhausted, func_index);
  depth++;
  const FuncSignature& sig = m.func_sig(func_index);
  std::vector<Value> results;
  if (m.is_imported_func(func_index)) {
    results.assign(sig.results.size(), 0);
    std::vector<Value> a(args.begin(), args.end());
    HostResult hr = host_funcs[func_index](*self, a, results);
    switch (hr.signal) {
      case HostResult::Signal::Continue:
        break;
      case HostResult::Signal::Exit:
        depth--;
        throw ExitException{hr.exit_code};
      case HostResult::Signal::Trap:
        depth--;
        trap(TrapKind::HostError, func_index, hr.trap_detail);
    }
  } else {
    results = exec_body(func_index, args);
  }
  depth--;
  return results;
}

std::vector<Value> Instance::Impl::exec_body(uint32_t func_index, std::span<const Value> args) {
  const wasm::FuncBody& body = m.code[func_index - m.num_func_imports()];
  const JumpTable& jt = jump_tables[func_index - m.num_func_imports()];
  const FuncSignature& sig = m.func_sig(func_index);

  std::vector<Value> locals(args.begin(), args.end());
  locals.resize(sig.params.size() + body.local_count(), 0);

  std::vector<Value> stack;
  struct Label {
    size_t stack_height;
    uint32_t arity;
    size_t cont_ip;  // where br lands
    bool is_loop;
  };
  std::vector<Label> labels;

  auto pop = [&]() -> Value {
    Value v = stack.back();
    stack.pop_back();
    return v;
  };
  auto pop32 = [&]() -> uint32_t { return static_cast<uint32_t>(pop()); };
  auto push32 = [&](uint32_t v) { stack.push_back(v); };

  auto block_arity = [&](const Instr& ins) -> uint32_t {
    return ins.a == wasm::kBlockTypeEmpty ? 0u : 1u;
  };

  // Branching to a block lands on its `end` (which pops the label); branching
  // to a loop lands on its body start and keeps the label.
  auto do_branch = [&](uint32_t depth_imm, size_t& next_ip) {
    const Label& l = labels[labels.size() - 1 - depth_imm];
    std::vector<Value> kept(stack.end() - l.arity, stack.end());
    stack.resize(l.stack_height);
    stack.insert(stack.end(), kept.begin(), kept.end());
    next_ip = l.cont_ip;
    labels.resize(labels.size() - depth_imm);
  };

  // Implicit function-level label: a branch to it behaves like return.
  labels.push_back({0, static_cast<uint32_t>(sig.results.size()), body.instrs.size(), false});

  size_t ip = 0;
  while (ip < body.instrs.size()) {
    const Instr& ins = body.instrs[ip];
    charge(func_index);
    switch (ins.op) {
      case Op::Unreachable:
        trap(TrapKind::Unreachable, func_index);
      case Op::Nop:
        break;
      case Op::Block:
        labels.push_back({stack.size(), block_arity(ins), static_cast<size_t>(jt.end_of[ip]), false});
        break;
      case Op::Loop:
        labels.push_back({stack.size(), 0, ip + 1, true});
        break;
      case Op::If: {
        uint32_t cond = pop32();
        size_t end_ip = static_cast<size_t>(jt.end_of[ip]);
        labels.push_back({stack.size(), block_arity(ins), end_ip, false});
        if (!cond) {
          int32_t else_ip = jt.else_of[ip];
          // land one short so the loop's ip++ enters the branch (or the end)
          ip = else_ip >= 0 ? static_cast<size_t>(else_ip) : end_ip - 1;
        }
        break;
      }
      case Op::Else:
        // then-branch finished: jump so the matching end executes next
        ip = labels.back().cont_ip - 1;
        break;
      case Op::End: {
        const Label& l = labels.back();
        std::vector<Value> kept(stack.end() - l.arity, stack.end());
        stack.resize(l.stack_height);
        stack.insert(stack.end(), kept.begin(), kept.end());
        labels.pop_back();
        break;
      }
      case Op::Br: {
        size_t next = ip;
        do_branch(ins.a, next);
        ip = next;
        continue;
      }
      case Op::BrIf: {
        uint32_t cond = pop32();
        if (cond) {
          size_t next = ip;
          do_branch(ins.a, next);
          ip = next;
          continue;
        }
        break;
      }
      case Op::BrTable: {
        uint32_t index = pop32();
        uint32_t target = index < ins.table.size() ? ins.table[index] : ins.b;
        size_t next = ip;
        do_branch(target, next);
        ip = next;
        continue;
      }
      case Op::Return: {
        std::vector<Value> results(stack.end() - sig.results.size(), stack.end());
        return results;
      }
      case Op::Call: {
        const FuncSignature& callee = m.func_sig(ins.a);
        std::vector<Value> args2(stack.end() - callee.params.size(), stack.end());
        stack.resize(stack.size() - callee.params.size());
        auto results = call_function(ins.a, args2);
        stack.insert(stack.end(), results.begin(), results.end());
        break;
      }
      case Op::CallIndirect: {
        uint32_t entry = pop32();
        if (entry >= table.size()) trap(TrapKind::TableOutOfBounds, func_index);
        if (!table[entry]) trap(TrapKind::UninitializedElement, func_index);
        uint32_t target = *table[entry];
        if (!(m.func_sig(target) == m.types[ins.a])) {
          trap(TrapKind::IndirectCallTypeMismatch, func_index);
        }
        const FuncSignature& callee = m.types[ins.a];
        std::vector<Value> args2(stack.end() - callee.params.size(), stack.end());
        stack.resize(stack.size() - callee.params.size());
        auto results = call_function(target, args2);
        stack.insert(stack.end(), results.begin(), results.end());
        break;
      }
      case Op::Drop:
        pop();
        break;
      case Op::Select: {
        uint32_t cond = pop32();
        Value b = pop();
        Value a = pop();
        stack.push_back(cond ? a : b);
        break;
      }
      case Op::LocalGet:
        stack.push_back(locals[ins.a]);
        break;
      case Op::LocalSet:
        locals[ins.a] = pop();
        break;
      case Op::LocalTee:
        locals[ins.a] = stack.back();
        break;
      case Op::GlobalGet:
        stack.push_back(globals[ins.a]);
        break;
      case Op::GlobalSet:
        globals[ins.a] = pop();
        break;
      case Op::I32Load: {
        uint64_t addr = static_cast<uint64_t>(pop32()) + ins.b;
        push32(load<uint32_t>(addr, func_index));
        break;
      }
      case Op::I32Load8S: {
        uint64_t addr = static_cast<uint64_t>(pop32()) + ins.b;
        push32(static_cast<uint32_t>(static_cast<int32_t>(load<int8_t>(addr, func_index))));
        break;
      }
      case Op::I32Load8U: {
        uint64_t addr = static_cast<uint64_t>(pop32()) + ins.b;
        push32(load<uint8_t>(addr, func_index));
        break;
      }
      case Op::I32Load16S: {
        uint64_t addr = static_cast<uint64_t>(pop32()) + ins.b;
        push32(static_cast<uint32_t>(static_cast<int32_t>(load<int16_t>(addr, func_index))));
        break;
      }
      case Op::I32Load16U: {
        uint64_t addr = static_cast<uint64_t>(pop32()) + ins.b;
        push32(load<uint16_t>(addr, func_index));
        break;
      }
      case Op::I32Store: {
        uint32_t value = pop32();
        uint64_t addr = static_cast<uint64_t>(pop32()) + ins.b;
        store<uint32_t>(addr, value, func_index);
        break;
      }
      case Op::I32Store8: {
        uint32_t value = pop32();
        uint64_t addr = static_cast<uint64_t>(pop32()) + ins.b;
        store<uint8_t>(addr, static_cast<uint8_t>(value), func_index);
        break;
      }
      case Op::I32Store16: {
        uint32_t value = pop32();
        uint64_t addr = static_cast<uint64_t>(pop32()) + ins.b;
        store<uint16_t>(addr, static_cast<uint16_t>(value), func_index);
        break;
      }
      case Op::MemorySize:
        push32(static_cast<uint32_t>(mem_pages()));
        break;
      case Op::MemoryGrow: {
        uint32_t delta = pop32();
        uint64_t current = mem_pages();
        uint64_t target = current + delta;
        uint64_t cap = max_pages ? *max_pages : kEngineMaxPages;
        if (target > cap) {
          push32(static_cast<uint32_t>(-1));
        } else {
          memory.resize(target * kPageSize, 0);
          push32(static_cast<uint32_t>(current));
        }
        break;
      }
      case Op::I32Const:
        push32(static_cast<uint32_t>(static_cast<int32_t>(ins.n)));
        break;
      case Op::I64Const:
        stack.push_back(static_cast<uint64_t>(ins.n));
        break;
      case Op::I32Eqz:
        push32(pop32() == 0);
        break;
      default: {
        // binary i32 operators
        uint32_t rhs = pop32();
        uint32_t lhs = pop32();
        int32_t slhs = static_cast<int32_t>(lhs);
        int32_t srhs = static_cast<int32_t>(rhs);
        uint32_t r = 0;
        switch (ins.op) {
          case Op::I32Eq: r = lhs == rhs; break;
          case Op::I32Ne: r = lhs != rhs; break;
          case Op::I32LtS: r = slhs < srhs; break;
          case Op::I32LtU: r = lhs < rhs; break;
          case Op::I32GtS: r = slhs > srhs; break;
          case Op::I32GtU: r = lhs > rhs; break;
          case Op::I32LeS: r = slhs <= srhs; break;
          case Op::I32LeU: r = lhs <= rhs; break;
          case Op::I32GeS: r = slhs >= srhs; break;
          case Op::I32GeU: r = lhs >= rhs; break;
          case Op::I32Add: r = lhs + rhs; break;
          case Op::I32Sub: r = lhs - rhs; break;
          case Op::I32Mul: r = lhs * rhs; break;
          case Op::I32DivS:
            if (rhs == 0) trap(TrapKind::IntegerDivideByZero, func_index);
            if (slhs == INT32_MIN && srhs == -1) trap(TrapKind::IntegerDivideByZero, func_index, "overflow");
            r = static_cast<uint32_t>(slhs / srhs);
            break;
          case Op::I32DivU:
            if (rhs == 0) trap(TrapKind::IntegerDivideByZero, func_index);
            r = lhs / rhs;
            break;
          case Op::I32RemS:
            if (rhs == 0) trap(TrapKind::IntegerDivideByZero, func_index);
            r = (slhs == INT32_MIN && srhs == -1) ? 0 : static_cast<uint32_t>(slhs % srhs);
            break;
          case Op::I32RemU:
            if (rhs == 0) trap(TrapKind::IntegerDivideByZero, func_index);
            r = lhs % rhs;
            break;
          case Op::I32And: r = lhs & rhs; break;
          case Op::I32Or: r = lhs | rhs; break;
          case Op::I32Xor: r = lhs ^ rhs; break;
          case Op::I32Shl: r = lhs << (rhs & 31); break;
          case Op::I32ShrS: r = static_cast<uint32_t>(slhs >> (rhs & 31)); break;
          case Op::I32ShrU: r = lhs >> (rhs & 31); break;
          default:
            trap(TrapKind::HostError, func_index, "unexecutable opcode reached");
        }
        push32(r);
        break;
      }
    }
    ip++;
  }

  std::vector<Value> results(stack.end() - sig.results.size(), stack.end());
  return results;
}

Instance::Instance(const WasmModule& m, const ImportResolver& resolver)
    : impl_(std::make_unique<Impl>(m)) {
  impl_->self = this;
  if (auto err = validate_module(m)) {
    throw InstantiationError("validation failed: " + err->message);
  }

  uint32_t func_import_index = 0;
  for (const auto& imp : m.imports) {
    switch (imp.kind) {
      case wasm::ImportKind::Func: {
        const FuncSignature& sig = m.types[std::get<uint32_t>(imp.desc)];
        auto fn = resolver(imp, sig);
        if (!fn) {
          throw InstantiationError("unresolved import " + imp.module + "." + imp.field);
        }
        impl_->host_funcs.push_back(std::move(*fn));
        func_import_index++;
        break;
      }
      case wasm::ImportKind::Memory:
        throw InstantiationError("memory imports are not supported by the embedded engine");
      case wasm::ImportKind::Table:
        throw InstantiationError("table imports are not supported by the embedded engine");
      case wasm::ImportKind::Global:
        throw InstantiationError("global imports are not supported by the embedded engine");
    }
  }

  for (const auto& g : m.globals) {
    impl_->global_types.push_back(g.type.type);
    impl_->globals.push_back(g.init.kind == wasm::ConstExpr::Kind::GlobalGet
                                 ? 0  // unreachable: global imports rejected above
                                 : g.init.bits);
  }

  if (auto lim = m.memory_limits()) {
    impl_->memory.assign(static_cast<size_t>(lim->min_pages) * kPageSize, 0);
    impl_->max_pages = lim->max_pages;
  }
  if (!m.tables.empty()) {
    impl_->table.assign(m.tables[0].min_entries, std::nullopt);
  }
  for (const auto& body : m.code) {
    impl_->jump_tables.push_back(build_jump_table(body.instrs));
  }
}

Instance::~Instance() = default;

const WasmModule& Instance::module() const { return impl_->m; }

namespace {

Outcome run_guarded(Instance::Impl& impl, RunLimits& limits,
                    const std::function<std::vector<Value>()>& fn) {
  impl.deadline = limits.deadline;
  impl.fuel_limited = limits.fuel > 0;
  impl.fuel_left = limits.fuel;
  impl.depth = 0;
  Outcome out;
  try {
    out.values = fn();
    out.kind = Outcome::Kind::Returned;
  } catch (const TrapException& t) {
    out.kind = Outcome::Kind::Trapped;
    out.trap = t.trap;
  } catch (const ExitException& e) {
    out.kind = Outcome::Kind::Exited;
    out.exit_code = e.code;
  }
  if (impl.fuel_limited) limits.fuel = impl.fuel_left;
  return out;
}

}  // namespace

Outcome Instance::initialize(RunLimits& limits) {
  Impl& impl = *impl_;
  const WasmModule& m = impl.m;
  if (impl.initialized) throw InstantiationError("instance already initialized");
  impl.initialized = true;

  for (const auto& seg : m.elements) {
    uint64_t base = static_cast<uint32_t>(seg.offset.as_i32());
    if (base + seg.func_indices.size() > impl.table.size()) {
      throw InstantiationError("element segment out of table bounds");
    }
    for (size_t i = 0; i < seg.func_indices.size(); i++) {
      impl.table[base + i] = seg.func_indices[i];
    }
  }
  for (const auto& seg : m.data) {
    uint64_t base = static_cast<uint32_t>(seg.offset.as_i32());
    if (base + seg.bytes.size() > impl.memory.size()) {
      throw InstantiationError("data segment out of memory bounds");
    }
    std::memcpy(impl.memory.data() + base, seg.bytes.data(), seg.bytes.size());
  }

  if (m.start) {
    return run_guarded(impl, limits, [&] { return impl.call_function(*m.start, {}); });
  }
  Outcome ok;
  ok.kind = Outcome::Kind::Returned;
  return ok;
}

Outcome Instance::invoke_export(const std::string& name, std::span<const Value> args,
                                RunLimits& limits) {
  Impl& impl = *impl_;
  auto idx = impl.m.find_export(name, wasm::ExportKind::Func);
  if (!idx) throw InstantiationError("export not found: " + name);
  return run_guarded(impl, limits, [&] { return impl.call_function(*idx, args); });
}

size_t Instance::mem_size() const { return impl_->memory.size(); }

bool Instance::mem_read(uint32_t addr, std::span<uint8_t> out) const {
  if (static_cast<uint64_t>(addr) + out.size() > impl_->memory.size()) return false;
  std::memcpy(out.data(), impl_->memory.data() + addr, out.size());
  return true;
}

bool Instance::mem_write(uint32_t addr, std::span<const uint8_t> bytes) {
  if (static_cast<uint64_t>(addr) + bytes.size() > impl_->memory.size()) return false;
  std::memcpy(impl_->memory.data() + addr, bytes.data(), bytes.size());
  return true;
}

std::optional<uint32_t> Instance::read_u32(uint32_t addr) const {
  uint8_t b[4];
  if (!mem_read(addr, b)) return std::nullopt;
  uint32_t v;
  std::memcpy(&v, b, 4);
  return v;
}

bool Instance::write_u32(uint32_t addr, uint32_t value) {
  uint8_t b[4];
  std::memcpy(b, &value, 4);
  return mem_write(addr, b);
}

std::optional<uint64_t> Instance::global_value(uint32_t index) const {
  if (index >= impl_->globals.size()) return std::nullopt;
  return impl_->globals[index];
}

std::optional<uint64_t> Instance::global_by_export(const std::string& name) const {
  auto idx = impl_->m.find_export(name, wasm::ExportKind::Global);
  if (!idx) return std::nullopt;
  return global_value(*idx);
}

}  // namespace wssp::engine
