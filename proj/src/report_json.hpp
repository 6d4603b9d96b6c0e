/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <string>

#include <json.hpp>

#include "analysis/layout.hpp"
#include "audit/checker.hpp"
#include "harness/harness.hpp"
#include "ssp/pass.hpp"

namespace wssp::report {

nlohmann::json to_json(const analysis::LayoutReport& r);
nlohmann::json to_json(const audit::RobustnessReport& r);
nlohmann::json to_json(const ssp::InstrumentationSummary& s);
nlohmann::json to_json(const harness::RunOutcome& o);
nlohmann::json to_json(const harness::EvalReport& r);

std::string eval_table_text(const harness::EvalReport& r);
std::string audit_text(const audit::RobustnessReport& r);

// dump with invalid UTF-8 replaced, so raw guest output cannot break reports
std::string dump_json(const nlohmann::json& j, int indent = 2);

}  // namespace wssp::report
