/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wssp.h"

namespace {

// Owner for API-allocated strings.
struct ApiString {
  char* value = nullptr;
  ~ApiString() { wssp_free(value); }
  std::string str() const { return value ? value : ""; }
};

struct ModuleHandle {
  wssp_module* value = nullptr;
  ~ModuleHandle() { wssp_module_free(value); }
};

int fail_with(const std::string& context) {
  std::cerr << "wssp: " << context << ": " << wssp_last_error() << "\n";
  return 1;
}

int load_module(const std::string& path, ModuleHandle& out) {
  wssp_status st = wssp_module_read(path.c_str(), &out.value);
  if (st != WSSP_OK) return fail_with("reading " + path);
  return 0;
}

bool parse_hex(const std::string& hex, std::vector<uint8_t>& out) {
  if (hex.empty() || hex.size() % 2 != 0) return false;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  for (size_t i = 0; i < hex.size(); i += 2) {
    int hi = nibble(hex[i]);
    int lo = nibble(hex[i + 1]);
    if (hi < 0 || lo < 0) return false;
    out.push_back(static_cast<uint8_t>(hi << 4 | lo));
  }
  return true;
}

uint64_t fuel_from_env() {
  const char* fuel = std::getenv("WSSP_ENGINE_FUEL");
  if (!fuel || !*fuel) return 0;
  return std::strtoull(fuel, nullptr, 10);
}

int run_exit_code(int outcome) {
  switch (outcome) {
    case WSSP_OUTCOME_SILENT: return 0;
    case WSSP_OUTCOME_SSP_FAULT: return 10;
    case WSSP_OUTCOME_MEMORY_FAULT: return 11;
    case WSSP_OUTCOME_TIMEOUT: return 12;
    case WSSP_OUTCOME_STARTUP_ABORT: return 13;
    default: return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wssp: WebAssembly stack-smashing-protection hardening and audit toolkit"};
  app.require_subcommand(1);

  // instrument
  std::string in_path, out_path;
  std::string mode = "all";
  uint32_t threshold = 8;
  std::string flavor = "hardened";
  int64_t sp_global = -1;
  bool debug_export = false;
  auto* cmd_instrument = app.add_subcommand("instrument", "Rewrite a module with SSP canaries");
  cmd_instrument->add_option("in", in_path, "input .wasm")->required();
  cmd_instrument->add_option("out", out_path, "output .wasm")->required();
  cmd_instrument->add_option("--mode", mode, "all|heuristic")->check(CLI::IsMember({"all", "heuristic"}));
  cmd_instrument->add_option("--threshold", threshold, "heuristic frame-size threshold (bytes)");
  cmd_instrument->add_option("--flavor", flavor, "hardened|legacy")->check(CLI::IsMember({"hardened", "legacy"}));
  cmd_instrument->add_option("--sp-global", sp_global, "stack pointer global index override");
  cmd_instrument->add_flag("--debug-export", debug_export, "export the guard as __ssp_debug_guard");

  // audit / analyze
  std::string audit_in;
  bool json_only = false;
  auto* cmd_audit = app.add_subcommand("audit", "Audit SSP robustness properties P1/P2a/P2b/P3");
  cmd_audit->add_option("in", audit_in, "input .wasm")->required();
  cmd_audit->add_flag("--json", json_only, "machine-readable output only");

  std::string analyze_in;
  bool analyze_json = false;
  auto* cmd_analyze = app.add_subcommand("analyze", "Classify the linear-memory layout");
  cmd_analyze->add_option("in", analyze_in, "input .wasm")->required();
  cmd_analyze->add_flag("--json", analyze_json, "machine-readable output only");

  // run
  std::string run_in;
  std::string random_mode = "host";
  uint32_t timeout_ms = 0;
  std::string stdin_file;
  int64_t probe_addr = -1;
  auto* cmd_run = app.add_subcommand("run", "Execute a guest and classify the outcome");
  cmd_run->add_option("in", run_in, "input .wasm")->required();
  cmd_run->add_option("--random", random_mode, "host|fail|fixed:HEX");
  cmd_run->add_option("--timeout-ms", timeout_ms, "wall-clock limit (default 20000)");
  cmd_run->add_option("--stdin", stdin_file, "file passed as guest stdin");
  cmd_run->add_option("--probe-mem", probe_addr, "read an i32 from memory after the run");

  // fault-inject
  std::string fault_in, fault_out;
  auto* cmd_fault = app.add_subcommand("fault-inject", "Make random_get fail inside the binary");
  cmd_fault->add_option("in", fault_in, "input .wasm")->required();
  cmd_fault->add_option("out", fault_out, "output .wasm")->required();

  // eval
  std::string corpus_dir = "corpus";
  std::string report_file;
  unsigned jobs = 1;
  auto* cmd_eval = app.add_subcommand("eval", "Run the corpus matrix against expectations");
  cmd_eval->add_option("--corpus", corpus_dir, "corpus directory (generated when missing)");
  cmd_eval->add_option("--report", report_file, "write the JSON report here");
  cmd_eval->add_option("--jobs", jobs, "parallel runs (default 1)");

  // corpus
  std::string gen_dir;
  auto* cmd_corpus = app.add_subcommand("corpus", "Generate the synthetic guest corpus");
  cmd_corpus->add_option("dir", gen_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (cmd_instrument->parsed()) {
    ModuleHandle input;
    if (int rc = load_module(in_path, input)) return rc;
    wssp_instrument_options opts{};
    opts.heuristic = mode == "heuristic" ? 1 : 0;
    opts.threshold = threshold;
    opts.legacy = flavor == "legacy" ? 1 : 0;
    opts.debug_export = debug_export ? 1 : 0;
    opts.sp_global = static_cast<int32_t>(sp_global);
    ModuleHandle output;
    ApiString summary;
    wssp_status st = wssp_instrument(input.value, &opts, &output.value, &summary.value);
    if (st == WSSP_ERR_AMBIGUOUS_SP) {
      std::cerr << "wssp: " << wssp_last_error() << "\n";
      return 4;
    }
    if (st != WSSP_OK) return fail_with("instrumenting " + in_path);
    if (wssp_module_write(output.value, out_path.c_str()) != WSSP_OK) {
      return fail_with("writing " + out_path);
    }
    std::cout << summary.str() << "\n";
    return 0;
  }

  if (cmd_audit->parsed()) {
    ModuleHandle input;
    if (int rc = load_module(audit_in, input)) return rc;
    ApiString report;
    int exit_hint = 1;
    if (wssp_audit(input.value, &report.value, &exit_hint) != WSSP_OK) {
      return fail_with("auditing " + audit_in);
    }
    if (!json_only) std::cerr << "audit of " << audit_in << ":\n";
    std::cout << report.str() << "\n";
    return exit_hint;
  }

  if (cmd_analyze->parsed()) {
    ModuleHandle input;
    if (int rc = load_module(analyze_in, input)) return rc;
    ApiString report;
    if (wssp_analyze_layout(input.value, &report.value) != WSSP_OK) {
      return fail_with("analyzing " + analyze_in);
    }
    std::cout << report.str() << "\n";
    return 0;
  }

  if (cmd_run->parsed()) {
    ModuleHandle input;
    if (int rc = load_module(run_in, input)) return rc;
    wssp_run_options opts{};
    opts.probe_addr = probe_addr;
    opts.timeout_ms = timeout_ms;
    opts.fuel = fuel_from_env();
    std::vector<uint8_t> fixed;
    if (random_mode == "host") {
      opts.random_mode = WSSP_RANDOM_HOST;
    } else if (random_mode == "fail") {
      opts.random_mode = WSSP_RANDOM_FAIL;
    } else if (random_mode.rfind("fixed:", 0) == 0) {
      if (!parse_hex(random_mode.substr(6), fixed)) {
        std::cerr << "wssp: bad hex in --random\n";
        return 1;
      }
      opts.random_mode = WSSP_RANDOM_FIXED;
      opts.fixed_bytes = fixed.data();
      opts.fixed_len = fixed.size();
    } else {
      std::cerr << "wssp: --random expects host, fail, or fixed:HEX\n";
      return 1;
    }
    std::vector<uint8_t> stdin_bytes;
    if (!stdin_file.empty()) {
      std::ifstream in(stdin_file, std::ios::binary);
      if (!in) {
        std::cerr << "wssp: cannot open " << stdin_file << "\n";
        return 1;
      }
      stdin_bytes.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      opts.stdin_bytes = stdin_bytes.data();
      opts.stdin_len = stdin_bytes.size();
    }
    ApiString outcome_json;
    int outcome = -1;
    if (wssp_run(input.value, &opts, &outcome_json.value, &outcome) != WSSP_OK) {
      return fail_with("running " + run_in);
    }
    std::cout << outcome_json.str() << "\n";
    return run_exit_code(outcome);
  }

  if (cmd_fault->parsed()) {
    ModuleHandle input;
    if (int rc = load_module(fault_in, input)) return rc;
    ModuleHandle output;
    if (wssp_inject_fault_random(input.value, &output.value) != WSSP_OK) {
      return fail_with("fault-injecting " + fault_in);
    }
    if (wssp_module_write(output.value, fault_out.c_str()) != WSSP_OK) {
      return fail_with("writing " + fault_out);
    }
    return 0;
  }

  if (cmd_eval->parsed()) {
    wssp_eval_options opts{};
    opts.corpus_dir = corpus_dir.c_str();
    opts.report_path = report_file.empty() ? nullptr : report_file.c_str();
    opts.jobs = jobs;
    opts.fuel = fuel_from_env();
    ApiString report_json;
    ApiString table;
    uint64_t mismatches = 0;
    if (wssp_eval(&opts, &report_json.value, &table.value, &mismatches) != WSSP_OK) {
      return fail_with("evaluating corpus " + corpus_dir);
    }
    std::cout << table.str();
    return mismatches == 0 ? 0 : 2;
  }

  if (cmd_corpus->parsed()) {
    ApiString manifest;
    if (wssp_corpus_generate(gen_dir.c_str(), &manifest.value) != WSSP_OK) {
      return fail_with("generating corpus in " + gen_dir);
    }
    std::cout << manifest.str();
    return 0;
  }

  return 1;
}
