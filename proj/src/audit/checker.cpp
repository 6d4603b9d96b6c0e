/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "audit/checker.hpp"

#include "ssp/pass.hpp"

namespace wssp::audit {

using wasm::Instr;
using wasm::Op;
using wasm::WasmModule;

const char* verdict_name(VerdictValue v) {
  switch (v) {
    case VerdictValue::Pass: return "pass";
    case VerdictValue::Fail: return "fail";
    case VerdictValue::Unknown: return "unknown";
  }
  return "?";
}

namespace {

bool is_load(Op op) {
  switch (op) {
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

bool begins_with_unreachable(const WasmModule& m, uint32_t func_index) {
  if (m.is_imported_func(func_index)) return false;
  const auto& body = m.code[func_index - m.num_func_imports()];
  return !body.instrs.empty() && body.instrs[0].op == Op::Unreachable;
}

std::string site(uint32_t func_index, size_t instr_index) {
  return "func " + std::to_string(func_index) + " @" + std::to_string(instr_index);
}

struct GuardScan {
  GuardLocation location;
  std::optional<uint32_t> fail_func;
  std::vector<Evidence> evidence;
};

// Canary-check shape: a frame-relative load, the guard access, i32.ne/eq,
// then a branch guarding a call to a function that starts with unreachable.
GuardScan scan_guard(const WasmModule& m) {
  GuardScan scan;

  auto branch_calls_fail = [&](const std::vector<Instr>& ins, size_t cmp_index,
                               bool equality) -> std::optional<uint32_t> {
    if (cmp_index + 2 >= ins.size()) return std::nullopt;
    Op branch = ins[cmp_index + 1].op;
    if ((!equality && branch != Op::If) || (equality && branch != Op::BrIf)) return std::nullopt;
    if (ins[cmp_index + 2].op != Op::Call) return std::nullopt;
    uint32_t callee = ins[cmp_index + 2].a;
    if (!begins_with_unreachable(m, callee)) return std::nullopt;
    return callee;
  };

  uint32_t imports = m.num_func_imports();
  for (uint32_t c = 0; c < m.code.size(); c++) {
    const auto& ins = m.code[c].instrs;
    uint32_t func_index = imports + c;
    for (size_t i = 0; i + 2 < ins.size(); i++) {
      // load; global.get g; ne/eq
      if (ins[i].op == Op::I32Load && ins[i + 1].op == Op::GlobalGet &&
          (ins[i + 2].op == Op::I32Ne || ins[i + 2].op == Op::I32Eq)) {
        if (auto fail = branch_calls_fail(ins, i + 2, ins[i + 2].op == Op::I32Eq)) {
          scan.location = {GuardLocation::Kind::Global, ins[i + 1].a, 0};
          scan.fail_func = fail;
          scan.evidence.push_back({site(func_index, i),
                                   "canary check compares against global " +
                                       std::to_string(ins[i + 1].a)});
          return scan;
        }
      }
      // global.get g; load; ne/eq (mirrored operand order)
      if (ins[i].op == Op::GlobalGet && ins[i + 1].op == Op::I32Load &&
          (ins[i + 2].op == Op::I32Ne || ins[i + 2].op == Op::I32Eq)) {
        if (auto fail = branch_calls_fail(ins, i + 2, ins[i + 2].op == Op::I32Eq)) {
          scan.location = {GuardLocation::Kind::Global, ins[i].a, 0};
          scan.fail_func = fail;
          scan.evidence.push_back({site(func_index, i),
                                   "canary check compares against global " +
                                       std::to_string(ins[i].a)});
          return scan;
        }
      }
      // load; i32.const a; load; ne/eq
      if (i + 3 < ins.size() && ins[i].op == Op::I32Load && ins[i + 1].op == Op::I32Const &&
          ins[i + 2].op == Op::I32Load &&
          (ins[i + 3].op == Op::I32Ne || ins[i + 3].op == Op::I32Eq)) {
        if (auto fail = branch_calls_fail(ins, i + 3, ins[i + 3].op == Op::I32Eq)) {
          uint32_t addr = static_cast<uint32_t>(ins[i + 1].n) + ins[i + 2].b;
          scan.location = {GuardLocation::Kind::LinearMemory, 0, addr};
          scan.fail_func = fail;
          scan.evidence.push_back({site(func_index, i),
                                   "canary check loads the reference from linear memory at " +
                                       std::to_string(addr)});
          return scan;
        }
      }
    }
  }
  return scan;
}

GuardScan scan_guard_with_names(const WasmModule& m) {
  if (auto named = m.find_global_by_name("__stack_chk_guard")) {
    GuardScan scan;
    scan.location = {GuardLocation::Kind::Global, *named, 0};
    scan.evidence.push_back({"global " + std::to_string(*named), "named __stack_chk_guard"});
    // still try to resolve the fail target from check patterns
    GuardScan pattern = scan_guard(m);
    scan.fail_func = pattern.fail_func;
    return scan;
  }
  return scan_guard(m);
}

// Span of the errno != 0 branch after a call to random_get: handles a bare
// `if`, an `i32.eqz; if` inversion, and `i32.const 0; i32.ne; if`.
struct ErrnoBranch {
  size_t begin = 0;  // first instruction inside the branch
  size_t end = 0;    // exclusive
  bool found = false;
};

ErrnoBranch errno_branch(const std::vector<Instr>& ins, size_t call_index) {
  size_t i = call_index + 1;
  bool inverted = false;
  if (i < ins.size() && ins[i].op == Op::I32Eqz) {
    inverted = true;
    i++;
  } else if (i + 1 < ins.size() && ins[i].op == Op::I32Const && ins[i].n == 0 &&
             ins[i + 1].op == Op::I32Ne) {
    i += 2;
  }
  if (i >= ins.size() || ins[i].op != Op::If) return {};

  // find matching else/end
  size_t depth = 0;
  size_t else_index = 0;
  size_t end_index = 0;
  for (size_t k = i + 1; k < ins.size(); k++) {
    if (ins[k].op == Op::Block || ins[k].op == Op::Loop || ins[k].op == Op::If) depth++;
    if (ins[k].op == Op::Else && depth == 0 && else_index == 0) else_index = k;
    if (ins[k].op == Op::End) {
      if (depth == 0) {
        end_index = k;
        break;
      }
      depth--;
    }
  }
  if (end_index == 0) return {};

  ErrnoBranch b;
  b.found = true;
  if (!inverted) {
    b.begin = i + 1;
    b.end = else_index ? else_index : end_index;
  } else {
    if (!else_index) return {};  // inverted without else: error path is the fallthrough, undecidable
    b.begin = else_index + 1;
    b.end = end_index;
  }
  return b;
}

}  // namespace

GuardLocation locate_guard(const WasmModule& m) { return scan_guard_with_names(m).location; }

Verdict check_p1(const WasmModule& m, std::vector<Evidence>* evidence) {
  auto rg = m.find_func_import("wasi_snapshot_preview1", "random_get");
  if (!rg) {
    return {VerdictValue::Unknown, "no random_get import; no guard initialization to audit"};
  }
  GuardScan guard = scan_guard_with_names(m);

  uint32_t imports = m.num_func_imports();
  for (uint32_t c = 0; c < m.code.size(); c++) {
    const auto& ins = m.code[c].instrs;
    uint32_t func_index = imports + c;
    for (size_t i = 0; i < ins.size(); i++) {
      if (ins[i].op != Op::Call || ins[i].a != *rg) continue;

      ErrnoBranch branch = errno_branch(ins, i);
      if (!branch.found) {
        return {VerdictValue::Unknown,
                "random_get result flow is not a direct branch; undecidable by linear scan"};
      }

      bool saw_multiplier = false;
      bool saw_mul = false;
      for (size_t k = branch.begin; k < branch.end; k++) {
        if (ins[k].op == Op::I32Const &&
            static_cast<uint32_t>(ins[k].n) == ssp::kLegacyFallbackMultiplier) {
          saw_multiplier = true;
        }
        if (ins[k].op == Op::I32Mul) saw_mul = true;
        if (ins[k].op == Op::Unreachable) {
          if (evidence) {
            evidence->push_back({site(func_index, k),
                                 "randomness failure branch traps before any guard store"});
          }
          return {VerdictValue::Pass, "random_get error path aborts before storing a guard"};
        }
        bool guard_store =
            (guard.location.kind == GuardLocation::Kind::Global && ins[k].op == Op::GlobalSet &&
             ins[k].a == guard.location.index) ||
            (ins[k].op == Op::I32Store || ins[k].op == Op::I32Store8 ||
             ins[k].op == Op::I32Store16);
        if (guard_store) {
          std::string what = saw_multiplier && saw_mul
                                 ? "const 1103515245 multiply in error branch"
                                 : "guard written on the randomness-failure path";
          if (evidence) evidence->push_back({site(func_index, k), what});
          return {VerdictValue::Fail, "random_get error path falls back to a deterministic guard"};
        }
      }
      return {VerdictValue::Unknown, "random_get error path neither traps nor stores; undecidable"};
    }
  }
  return {VerdictValue::Unknown, "no function calls the random_get import"};
}

std::pair<Verdict, Verdict> check_p2(const WasmModule& m, std::vector<Evidence>* evidence) {
  GuardScan guard = scan_guard_with_names(m);
  switch (guard.location.kind) {
    case GuardLocation::Kind::Global: {
      if (evidence) {
        evidence->push_back({"global " + std::to_string(guard.location.index),
                             "reference value lives outside linear memory"});
      }
      Verdict p2a{VerdictValue::Pass, "guard stored outside linear memory; no overflow can reach it"};
      Verdict p2b{VerdictValue::Pass,
                  "stored outside linear memory, VM-managed; guest stores cannot write it"};
      return {p2a, p2b};
    }
    case GuardLocation::Kind::LinearMemory: {
      analysis::LayoutReport layout = analysis::classify_layout(m);
      Verdict p2b{VerdictValue::Fail,
                  "linear memory has no permissions; the guard address is always writable"};
      auto reach = analysis::reachable_by_ascending_overflow(layout, guard.location.address);
      Verdict p2a;
      if (!reach) {
        p2a = {VerdictValue::Unknown, "layout unknown; overflow reachability undecidable"};
      } else if (*reach) {
        p2a = {VerdictValue::Fail, "guard at " + std::to_string(guard.location.address) +
                                       " is reachable by an ascending overflow from the stack"};
      } else {
        p2a = {VerdictValue::Pass, "guard at " + std::to_string(guard.location.address) +
                                       " lies below the stack region"};
      }
      if (evidence) {
        evidence->push_back({"address " + std::to_string(guard.location.address),
                             std::string("layout ") + analysis::layout_kind_name(layout.layout)});
      }
      return {p2a, p2b};
    }
    case GuardLocation::Kind::NotFound:
      break;
  }
  return {{VerdictValue::Unknown, "no guard found"}, {VerdictValue::Unknown, "no guard found"}};
}

Verdict check_p3(const WasmModule& m, std::vector<Evidence>* evidence) {
  GuardScan guard = scan_guard_with_names(m);
  std::optional<uint32_t> fail = guard.fail_func;
  if (!fail) {
    for (const auto& [index, name] : m.names.func_names) {
      if (name == "__stack_chk_fail") {
        fail = index;
        break;
      }
    }
  }
  if (!fail || m.is_imported_func(*fail)) {
    return {VerdictValue::Unknown, "no canary-failure target found"};
  }

  const auto& ins = m.code[*fail - m.num_func_imports()].instrs;
  constexpr size_t kBudget = 8;
  for (size_t i = 0; i < ins.size() && i < kBudget; i++) {
    const Instr& x = ins[i];
    if (x.op == Op::Unreachable) {
      if (evidence) {
        evidence->push_back({site(*fail, i), "fail path traps without touching memory"});
      }
      return {VerdictValue::Pass, "fail function traps immediately"};
    }
    if (is_load(x.op) || x.op == Op::Call || x.op == Op::CallIndirect) {
      if (evidence) {
        evidence->push_back({site(*fail, i), "load or call precedes the trap"});
      }
      return {VerdictValue::Fail, "fail function accesses data or calls before trapping"};
    }
    if (x.op == Op::If || x.op == Op::Br || x.op == Op::BrIf || x.op == Op::BrTable ||
        x.op == Op::Loop) {
      return {VerdictValue::Fail, "fail function branches before trapping"};
    }
  }
  return {VerdictValue::Fail, "no trap within the first 8 instructions of the fail function"};
}

RobustnessReport audit(const WasmModule& m) {
  RobustnessReport report;
  GuardScan guard = scan_guard_with_names(m);
  report.guard_location = guard.location;
  report.layout = analysis::classify_layout(m);
  report.evidence["guard"] = guard.evidence;

  report.p1 = check_p1(m, &report.evidence["P1"]);
  auto [p2a, p2b] = check_p2(m, &report.evidence["P2"]);
  report.p2a = p2a;
  report.p2b = p2b;
  report.p3 = check_p3(m, &report.evidence["P3"]);
  return report;
}

int exit_code_for(const RobustnessReport& report) {
  auto values = {report.p1.value, report.p2a.value, report.p2b.value, report.p3.value};
  bool any_fail = false;
  bool any_unknown = false;
  for (VerdictValue v : values) {
    any_fail = any_fail || v == VerdictValue::Fail;
    any_unknown = any_unknown || v == VerdictValue::Unknown;
  }
  if (any_fail) return 2;
  if (any_unknown) return 3;
  return 0;
}

}  // namespace wssp::audit
