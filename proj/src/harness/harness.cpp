/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "harness/harness.hpp"

#include <atomic>
#include <cstring>
#include <random>
#include <thread>

#include "engine/engine.hpp"
#include "wasm/decode.hpp"

namespace wssp::harness {

using engine::HostResult;
using engine::Instance;
using engine::Value;

namespace {

// WASI preview 1 errno values used here.
constexpr uint32_t kErrnoSuccess = 0;
constexpr uint32_t kErrnoRandomFail = 1;
constexpr uint32_t kErrnoBadf = 8;
constexpr uint32_t kErrnoFault = 21;
constexpr uint32_t kErrnoInval = 28;
constexpr uint32_t kErrnoNosys = 52;

struct WasiState {
  const RunSpec* spec = nullptr;
  std::vector<uint8_t> stdout_bytes;
  std::vector<uint8_t> stderr_bytes;
};

HostResult ok_errno(std::span<Value> results, uint32_t errno_value) {
  if (!results.empty()) results[0] = errno_value;
  return HostResult{};
}

HostResult wasi_random_get(WasiState& st, Instance& inst, std::span<const Value> args,
                           std::span<Value> results) {
  uint32_t buf = static_cast<uint32_t>(args[0]);
  uint32_t len = static_cast<uint32_t>(args[1]);
  switch (st.spec->random_mode) {
    case RandomMode::Fail:
      return ok_errno(results, kErrnoRandomFail);
    case RandomMode::Fixed: {
      const auto& pattern = st.spec->fixed_bytes;
      if (pattern.empty()) return ok_errno(results, kErrnoInval);
      std::vector<uint8_t> bytes(len);
      for (uint32_t i = 0; i < len; i++) bytes[i] = pattern[i % pattern.size()];
      if (!inst.mem_write(buf, bytes)) return ok_errno(results, kErrnoFault);
      return ok_errno(results, kErrnoSuccess);
    }
    case RandomMode::Host: {
      std::random_device rd;
      std::vector<uint8_t> bytes(len);
      for (uint32_t i = 0; i < len; i += 4) {
        uint32_t word = rd();
        for (uint32_t j = 0; j < 4 && i + j < len; j++) {
          bytes[i + j] = static_cast<uint8_t>(word >> (8 * j));
        }
      }
      if (!inst.mem_write(buf, bytes)) return ok_errno(results, kErrnoFault);
      return ok_errno(results, kErrnoSuccess);
    }
  }
  return ok_errno(results, kErrnoInval);
}

HostResult wasi_fd_write(WasiState& st, Instance& inst, std::span<const Value> args,
                         std::span<Value> results) {
  uint32_t fd = static_cast<uint32_t>(args[0]);
  uint32_t iovs = static_cast<uint32_t>(args[1]);
  uint32_t iovs_len = static_cast<uint32_t>(args[2]);
  uint32_t nwritten_ptr = static_cast<uint32_t>(args[3]);
  if (fd != 1 && fd != 2) return ok_errno(results, kErrnoBadf);
  std::vector<uint8_t>& sink = fd == 1 ? st.stdout_bytes : st.stderr_bytes;

  uint32_t total = 0;
  for (uint32_t i = 0; i < iovs_len; i++) {
    auto ptr = inst.read_u32(iovs + i * 8);
    auto len = inst.read_u32(iovs + i * 8 + 4);
    if (!ptr || !len) return ok_errno(results, kErrnoFault);
    std::vector<uint8_t> chunk(*len);
    if (!inst.mem_read(*ptr, chunk)) return ok_errno(results, kErrnoFault);
    sink.insert(sink.end(), chunk.begin(), chunk.end());
    total += *len;
  }
  if (!inst.write_u32(nwritten_ptr, total)) return ok_errno(results, kErrnoFault);
  return ok_errno(results, kErrnoSuccess);
}

HostResult wasi_proc_exit(std::span<const Value> args) {
  HostResult r;
  r.signal = HostResult::Signal::Exit;
  r.exit_code = static_cast<uint32_t>(args[0]);
  return r;
}

HostResult wasi_args_sizes_get(const std::vector<std::string>& items, Instance& inst,
                               std::span<const Value> args, std::span<Value> results) {
  uint32_t count_ptr = static_cast<uint32_t>(args[0]);
  uint32_t size_ptr = static_cast<uint32_t>(args[1]);
  uint32_t bytes = 0;
  for (const auto& s : items) bytes += static_cast<uint32_t>(s.size()) + 1;
  if (!inst.write_u32(count_ptr, static_cast<uint32_t>(items.size())) ||
      !inst.write_u32(size_ptr, bytes)) {
    return ok_errno(results, kErrnoFault);
  }
  return ok_errno(results, kErrnoSuccess);
}

HostResult wasi_args_get(const std::vector<std::string>& items, Instance& inst,
                         std::span<const Value> args, std::span<Value> results) {
  uint32_t argv_ptr = static_cast<uint32_t>(args[0]);
  uint32_t buf_ptr = static_cast<uint32_t>(args[1]);
  for (size_t i = 0; i < items.size(); i++) {
    if (!inst.write_u32(argv_ptr + static_cast<uint32_t>(i) * 4, buf_ptr)) {
      return ok_errno(results, kErrnoFault);
    }
    std::vector<uint8_t> bytes(items[i].begin(), items[i].end());
    bytes.push_back(0);
    if (!inst.mem_write(buf_ptr, bytes)) return ok_errno(results, kErrnoFault);
    buf_ptr += static_cast<uint32_t>(bytes.size());
  }
  return ok_errno(results, kErrnoSuccess);
}

HostResult wasi_clock_time_get(Instance& inst, std::span<const Value> args,
                               std::span<Value> results) {
  uint32_t out_ptr = static_cast<uint32_t>(args[2]);
  uint64_t ns = static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::nanoseconds>(
          std::chrono::steady_clock::now().time_since_epoch())
          .count());
  uint8_t bytes[8];
  std::memcpy(bytes, &ns, 8);
  if (!inst.mem_write(out_ptr, bytes)) return ok_errno(results, kErrnoFault);
  return ok_errno(results, kErrnoSuccess);
}

engine::ImportResolver make_resolver(WasiState& st) {
  return [&st](const wasm::Import& imp,
               const wasm::FuncSignature& sig) -> std::optional<engine::HostFunc> {
    if (imp.module == "wasi_snapshot_preview1") {
      if (imp.field == "random_get") {
        return [&st](Instance& inst, std::span<const Value> args, std::span<Value> results) {
          return wasi_random_get(st, inst, args, results);
        };
      }
      if (imp.field == "fd_write") {
        return [&st](Instance& inst, std::span<const Value> args, std::span<Value> results) {
          return wasi_fd_write(st, inst, args, results);
        };
      }
      if (imp.field == "proc_exit") {
        return [](Instance&, std::span<const Value> args, std::span<Value>) {
          return wasi_proc_exit(args);
        };
      }
      if (imp.field == "args_sizes_get") {
        return [&st](Instance& inst, std::span<const Value> args, std::span<Value> results) {
          return wasi_args_sizes_get(st.spec->argv, inst, args, results);
        };
      }
      if (imp.field == "args_get") {
        return [&st](Instance& inst, std::span<const Value> args, std::span<Value> results) {
          return wasi_args_get(st.spec->argv, inst, args, results);
        };
      }
      if (imp.field == "environ_sizes_get") {
        return [&st](Instance& inst, std::span<const Value> args, std::span<Value> results) {
          return wasi_args_sizes_get(st.spec->env, inst, args, results);
        };
      }
      if (imp.field == "environ_get") {
        return [&st](Instance& inst, std::span<const Value> args, std::span<Value> results) {
          return wasi_args_get(st.spec->env, inst, args, results);
        };
      }
      if (imp.field == "clock_time_get") {
        return [](Instance& inst, std::span<const Value> args, std::span<Value> results) {
          return wasi_clock_time_get(inst, args, results);
        };
      }
    }
    // Everything else: a stub returning errno NOSYS when the signature allows.
    bool returns_errno = sig.results.size() == 1 && sig.results[0] == wasm::ValType::I32;
    return [returns_errno](Instance&, std::span<const Value>,
                           std::span<Value> results) -> HostResult {
      if (returns_errno) results[0] = kErrnoNosys;
      return HostResult{};
    };
  };
}

std::string symbol_for(const wasm::WasmModule& m, uint32_t func_index) {
  if (auto n = m.func_name(func_index)) return *n;
  return "func[" + std::to_string(func_index) + "]";
}

RunOutcome classify(const wasm::WasmModule& m, const RunSpec& spec, WasiState& st,
                    const engine::Outcome& out) {
  RunOutcome r;
  r.stdout_bytes = std::move(st.stdout_bytes);
  r.stderr_bytes = std::move(st.stderr_bytes);
  switch (out.kind) {
    case engine::Outcome::Kind::Returned:
      r.category = OutcomeCategory::Silent;
      r.exit_code = 0;
      break;
    case engine::Outcome::Kind::Exited:
      r.category = OutcomeCategory::Silent;
      r.exit_code = out.exit_code;
      break;
    case engine::Outcome::Kind::Trapped: {
      r.trap_kind = engine::trap_kind_name(out.trap.kind);
      r.symbol = symbol_for(m, out.trap.func_index);
      if (out.trap.kind == engine::TrapKind::Deadline ||
          out.trap.kind == engine::TrapKind::FuelExhausted) {
        r.category = OutcomeCategory::Timeout;
      } else if (r.symbol == spec.fail_symbol) {
        r.category = OutcomeCategory::SspFault;
      } else if (r.symbol == spec.init_symbol && r.stdout_bytes.empty()) {
        r.category = OutcomeCategory::StartupAbort;
      } else {
        r.category = OutcomeCategory::MemoryFault;
      }
      break;
    }
  }
  return r;
}

}  // namespace

const char* category_name(OutcomeCategory c) {
  switch (c) {
    case OutcomeCategory::Silent: return "silent";
    case OutcomeCategory::MemoryFault: return "memory-fault";
    case OutcomeCategory::SspFault: return "ssp-fault";
    case OutcomeCategory::Timeout: return "timeout";
    case OutcomeCategory::StartupAbort: return "startup-abort";
  }
  return "?";
}

std::optional<OutcomeCategory> category_from_name(const std::string& s) {
  for (OutcomeCategory c :
       {OutcomeCategory::Silent, OutcomeCategory::MemoryFault, OutcomeCategory::SspFault,
        OutcomeCategory::Timeout, OutcomeCategory::StartupAbort}) {
    if (s == category_name(c)) return c;
  }
  return std::nullopt;
}

RunOutcome run(const RunSpec& spec) {
  wasm::WasmModule m;
  try {
    m = wasm::decode(spec.module_bytes);
  } catch (const wasm::MalformedModule& e) {
    throw EngineReject(e.what());
  }
  return run_module(m, spec);
}

RunOutcome run_module(const wasm::WasmModule& m, const RunSpec& spec) {
  WasiState st;
  st.spec = &spec;

  auto started = std::chrono::steady_clock::now();
  engine::RunLimits limits;
  limits.deadline = started + spec.timeout;
  limits.fuel = spec.fuel;

  std::unique_ptr<Instance> inst;
  engine::Outcome out;
  try {
    inst = std::make_unique<Instance>(m, make_resolver(st));
    out = inst->initialize(limits);
    if (out.kind == engine::Outcome::Kind::Returned) {
      if (auto start_export = m.find_export("_start", wasm::ExportKind::Func)) {
        const auto& sig = m.func_sig(*start_export);
        if (!sig.params.empty()) throw EngineReject("_start must take no parameters");
        out = inst->invoke_export("_start", {}, limits);
      }
    }
  } catch (const engine::InstantiationError& e) {
    throw EngineReject(e.what());
  }

  RunOutcome r = classify(m, spec, st, out);
  r.duration = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
  if (spec.capture_guard) {
    if (auto g = inst->global_by_export("__ssp_debug_guard")) {
      r.guard_value = static_cast<uint32_t>(*g);
    }
  }
  if (spec.probe_addr) {
    r.probe_value = inst->read_u32(*spec.probe_addr);
  }
  return r;
}

EvalReport run_matrix(const std::vector<MatrixEntry>& entries, unsigned jobs) {
  EvalReport report;
  report.rows.resize(entries.size());
  if (jobs == 0) jobs = 1;

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= entries.size()) return;
      const MatrixEntry& e = entries[i];
      EvalReport::Row row;
      row.name = e.name;
      row.flavor = e.flavor;
      row.mode = e.mode;
      row.expected = e.expected;
      try {
        RunOutcome out = e.module ? run_module(*e.module, e.spec) : run(e.spec);
        row.category = out.category;
        row.duration_ms = out.duration.count();
        row.match = !e.expected || *e.expected == out.category;
      } catch (const std::exception& ex) {
        row.error = ex.what();
        row.match = false;
      }
      report.rows[i] = std::move(row);
    }
  };

  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < jobs; i++) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (const auto& row : report.rows) {
    if (!row.match) report.mismatches++;
    if (row.category) report.summary[row.flavor][category_name(*row.category)]++;
  }
  return report;
}

}  // namespace wssp::harness
