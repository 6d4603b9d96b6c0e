/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "corpus/evaluate.hpp"

#include <memory>

#include "ssp/pass.hpp"

namespace wssp::corpus {

using harness::MatrixEntry;
using harness::RandomMode;
using harness::RunSpec;

harness::EvalReport evaluate_corpus(const std::vector<Guest>& guests, unsigned jobs,
                                    uint64_t fuel) {
  std::vector<std::unique_ptr<wasm::WasmModule>> storage;
  std::vector<MatrixEntry> entries;
  std::vector<harness::EvalReport::Row> failed_builds;

  for (const Guest& g : guests) {
    std::map<std::string, const wasm::WasmModule*> flavors;
    flavors["none"] = &g.module;

    ssp::SspConfig cfg;
    for (ssp::Flavor flavor : {ssp::Flavor::Legacy, ssp::Flavor::Hardened}) {
      const char* flavor_name = flavor == ssp::Flavor::Legacy ? "legacy" : "hardened";
      try {
        auto [built, summary] = ssp::instrument_auto(g.module, cfg, flavor);
        storage.push_back(std::make_unique<wasm::WasmModule>(std::move(built)));
        flavors[flavor_name] = storage.back().get();
      } catch (const std::exception& e) {
        harness::EvalReport::Row row;
        row.name = g.name;
        row.flavor = flavor_name;
        row.mode = "-";
        row.error = std::string("instrumentation failed: ") + e.what();
        row.match = false;
        failed_builds.push_back(std::move(row));
      }
    }

    for (const auto& [flavor_name, modes] : g.tmpl.expected) {
      auto it = flavors.find(flavor_name);
      if (it == flavors.end()) continue;  // build failure already recorded
      for (const auto& [mode, expected] : modes) {
        MatrixEntry e;
        e.name = g.name;
        e.flavor = flavor_name;
        e.mode = mode;
        e.module = it->second;
        e.expected = expected;
        e.spec.fuel = fuel;
        if (g.tmpl.timeout_ms) e.spec.timeout = std::chrono::milliseconds(g.tmpl.timeout_ms);
        if (mode == "fail") {
          e.spec.random_mode = RandomMode::Fail;
        } else if (mode == "host") {
          e.spec.random_mode = RandomMode::Host;
        } else {
          e.spec.random_mode = RandomMode::Fixed;
          e.spec.fixed_bytes = {0xDE, 0xAD, 0xBE, 0xEF};
        }
        entries.push_back(std::move(e));
      }
    }
  }

  harness::EvalReport report = harness::run_matrix(entries, jobs);
  for (auto& row : failed_builds) {
    report.mismatches++;
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace wssp::corpus
