/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "wssp.h"

#include <cstdlib>
#include <cstring>
#include <fstream>

#include "analysis/layout.hpp"
#include "audit/checker.hpp"
#include "corpus/corpus.hpp"
#include "corpus/evaluate.hpp"
#include "harness/harness.hpp"
#include "report_json.hpp"
#include "ssp/pass.hpp"
#include "wasm/decode.hpp"
#include "wasm/encode.hpp"
#include "wasm/validate.hpp"

using namespace wssp;

struct wssp_module {
  wasm::WasmModule value;
};

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

wssp_status map_instrument_error(const ssp::InstrumentError& e) {
  using Kind = ssp::InstrumentError::Kind;
  switch (e.kind()) {
    case Kind::AmbiguousStackPointer: return WSSP_ERR_AMBIGUOUS_SP;
    case Kind::AlreadyInstrumented: return WSSP_ERR_ALREADY_INSTRUMENTED;
    case Kind::ImportNotFound: return WSSP_ERR_IMPORT_NOT_FOUND;
    case Kind::InvalidModule: return WSSP_ERR_VALIDATION;
    default: return WSSP_ERR_INSTRUMENT;
  }
}

// Shared try/catch shell so every entry point reports through the same map.
template <typename Fn>
wssp_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const wasm::MalformedModule& e) {
    set_error(e.what());
    return WSSP_ERR_MALFORMED;
  } catch (const ssp::InstrumentError& e) {
    set_error(e.what());
    return map_instrument_error(e);
  } catch (const harness::EngineReject& e) {
    set_error(e.what());
    return WSSP_ERR_ENGINE_REJECT;
  } catch (const wasm::EncodeError& e) {
    set_error(e.what());
    return WSSP_ERR_INTERNAL;
  } catch (const std::exception& e) {
    set_error(e.what());
    return WSSP_ERR_INTERNAL;
  }
}

harness::RunSpec spec_from_options(const wssp_run_options* opts) {
  harness::RunSpec spec;
  if (!opts) return spec;
  switch (opts->random_mode) {
    case WSSP_RANDOM_FIXED: spec.random_mode = harness::RandomMode::Fixed; break;
    case WSSP_RANDOM_FAIL: spec.random_mode = harness::RandomMode::Fail; break;
    default: spec.random_mode = harness::RandomMode::Host; break;
  }
  if (opts->fixed_bytes && opts->fixed_len) {
    spec.fixed_bytes.assign(opts->fixed_bytes, opts->fixed_bytes + opts->fixed_len);
  }
  if (opts->timeout_ms) spec.timeout = std::chrono::milliseconds(opts->timeout_ms);
  spec.fuel = opts->fuel;
  if (opts->stdin_bytes && opts->stdin_len) {
    spec.stdin_bytes.assign(opts->stdin_bytes, opts->stdin_bytes + opts->stdin_len);
  }
  if (opts->probe_addr >= 0) spec.probe_addr = static_cast<uint32_t>(opts->probe_addr);
  spec.capture_guard = true;
  return spec;
}

}  // namespace

extern "C" {

const char* wssp_last_error(void) { return g_last_error.c_str(); }

void wssp_free(void* p) { std::free(p); }

wssp_status wssp_module_decode(const uint8_t* bytes, size_t len, wssp_module** out) {
  if (!bytes || !out) {
    set_error("null argument");
    return WSSP_ERR_INVALID_ARG;
  }
  return guarded([&] {
    auto m = wasm::decode(std::span<const uint8_t>(bytes, len));
    *out = new wssp_module{std::move(m)};
    return WSSP_OK;
  });
}

wssp_status wssp_module_read(const char* path, wssp_module** out) {
  if (!path || !out) {
    set_error("null argument");
    return WSSP_ERR_INVALID_ARG;
  }
  return guarded([&]() -> wssp_status {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      set_error(std::string("cannot open ") + path);
      return WSSP_ERR_IO;
    }
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    auto m = wasm::decode(bytes);
    *out = new wssp_module{std::move(m)};
    return WSSP_OK;
  });
}

wssp_status wssp_module_encode(const wssp_module* m, uint8_t** bytes, size_t* len) {
  if (!m || !bytes || !len) {
    set_error("null argument");
    return WSSP_ERR_INVALID_ARG;
  }
  return guarded([&] {
    auto encoded = wasm::encode(m->value);
    *bytes = static_cast<uint8_t*>(std::malloc(encoded.size()));
    std::memcpy(*bytes, encoded.data(), encoded.size());
    *len = encoded.size();
    return WSSP_OK;
  });
}

wssp_status wssp_module_write(const wssp_module* m, const char* path) {
  if (!m || !path) {
    set_error("null argument");
    return WSSP_ERR_INVALID_ARG;
  }
  return guarded([&]() -> wssp_status {
    auto encoded = wasm::encode(m->value);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      set_error(std::string("cannot write ") + path);
      return WSSP_ERR_IO;
    }
    out.write(reinterpret_cast<const char*>(encoded.data()),
              static_cast<std::streamsize>(encoded.size()));
    return out ? WSSP_OK : WSSP_ERR_IO;
  });
}

void wssp_module_free(wssp_module* m) { delete m; }

wssp_status wssp_module_validate(const wssp_module* m, char** violations_json) {
  if (!m || !violations_json) {
    set_error("null argument");
    return WSSP_ERR_INVALID_ARG;
  }
  return guarded([&] {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& v : wasm::validate(m->value)) {
      nlohmann::json e;
      e["kind"] = wasm::violation_kind_name(v.kind);
      e["message"] = v.message;
      if (v.func_index) e["func"] = *v.func_index;
      arr.push_back(std::move(e));
    }
    *violations_json = dup_string(report::dump_json(arr));
    return WSSP_OK;
  });
}

wssp_status wssp_instrument(const wssp_module* m, const wssp_instrument_options* opts,
                            wssp_module** out, char** summary_json) {
  if (!m || !out) {
    set_error("null argument");
    return WSSP_ERR_INVALID_ARG;
  }
  return guarded([&] {
    ssp::SspConfig cfg;
    ssp::Flavor flavor = ssp::Flavor::Hardened;
    if (opts) {
      if (opts->heuristic) {
        cfg.mode = ssp::SelectionMode::Heuristic;
        if (opts->threshold) cfg.heuristic_threshold = opts->threshold;
      }
      if (opts->legacy) flavor = ssp::Flavor::Legacy;
      cfg.debug_export = opts->debug_export != 0;
      if (opts->sp_global >= 0) cfg.sp_override = static_cast<uint32_t>(opts->sp_global);
    }
    auto [built, summary] = ssp::instrument_auto(m->value, cfg, flavor);
    *out = new wssp_module{std::move(built)};
    if (summary_json) *summary_json = dup_string(report::dump_json(report::to_json(summary)));
    return WSSP_OK;
  });
}

wssp_status wssp_inject_fault_random(const wssp_module* m, wssp_module** out) {
  if (!m || !out) {
    set_error("null argument");
    return WSSP_ERR_INVALID_ARG;
  }
  return guarded([&] {
    auto built = ssp::inject_fault_random(m->value);
    *out = new wssp_module{std::move(built)};
    return WSSP_OK;
  });
}

wssp_status wssp_analyze_layout(const wssp_module* m, char** report_json) {
  if (!m || !report_json) {
    set_error("null argument");
    return WSSP_ERR_INVALID_ARG;
  }
  return guarded([&] {
    auto layout = analysis::classify_layout(m->value);
    *report_json = dup_string(report::dump_json(report::to_json(layout)));
    return WSSP_OK;
  });
}

wssp_status wssp_audit(const wssp_module* m, char** report_json, int* exit_hint) {
  if (!m || !report_json) {
    set_error("null argument");
    return WSSP_ERR_INVALID_ARG;
  }
  return guarded([&] {
    auto report = audit::audit(m->value);
    *report_json = dup_string(report::dump_json(report::to_json(report)));
    if (exit_hint) *exit_hint = audit::exit_code_for(report);
    return WSSP_OK;
  });
}

wssp_status wssp_run(const wssp_module* m, const wssp_run_options* opts, char** outcome_json,
                     int* outcome) {
  if (!m) {
    set_error("null argument");
    return WSSP_ERR_INVALID_ARG;
  }
  return guarded([&] {
    harness::RunSpec spec = spec_from_options(opts);
    harness::RunOutcome result = harness::run_module(m->value, spec);
    if (outcome_json) *outcome_json = dup_string(report::dump_json(report::to_json(result)));
    if (outcome) *outcome = static_cast<int>(result.category);
    return WSSP_OK;
  });
}

wssp_status wssp_corpus_generate(const char* dir, char** manifest_json) {
  if (!dir) {
    set_error("null argument");
    return WSSP_ERR_INVALID_ARG;
  }
  return guarded([&] {
    auto guests = corpus::default_corpus();
    corpus::write_corpus(guests, dir);
    if (manifest_json) *manifest_json = dup_string(corpus::manifest_json_text(guests));
    return WSSP_OK;
  });
}

wssp_status wssp_eval(const wssp_eval_options* opts, char** report_json, char** table_text,
                      uint64_t* mismatches) {
  if (!opts || !opts->corpus_dir) {
    set_error("null argument");
    return WSSP_ERR_INVALID_ARG;
  }
  return guarded([&]() -> wssp_status {
    std::filesystem::path dir(opts->corpus_dir);
    std::vector<corpus::Guest> guests;
    if (std::filesystem::exists(dir / "manifest.json")) {
      guests = corpus::load_corpus(dir);
    } else {
      guests = corpus::default_corpus();
      corpus::write_corpus(guests, dir);
    }
    auto report = corpus::evaluate_corpus(guests, opts->jobs ? opts->jobs : 1, opts->fuel);
    std::string json_text = report::dump_json(report::to_json(report));
    if (opts->report_path) {
      std::ofstream out(opts->report_path);
      if (!out) {
        set_error(std::string("cannot write ") + opts->report_path);
        return WSSP_ERR_IO;
      }
      out << json_text << "\n";
    }
    if (report_json) *report_json = dup_string(json_text);
    if (table_text) *table_text = dup_string(report::eval_table_text(report));
    if (mismatches) *mismatches = report.mismatches;
    return WSSP_OK;
  });
}

}  // extern "C"
