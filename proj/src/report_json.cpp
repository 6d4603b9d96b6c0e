/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "report_json.hpp"

#include <iomanip>
#include <sstream>

namespace wssp::report {

using nlohmann::json;

namespace {

// Guest output may be arbitrary bytes; dump_json() below replaces invalid
// UTF-8 instead of throwing.
json bytes_field(const std::vector<uint8_t>& bytes) {
  json j = json::object();
  j["len"] = bytes.size();
  j["text"] = std::string(bytes.begin(), bytes.end());
  return j;
}

json verdict_json(const audit::Verdict& v) {
  return json{{"verdict", audit::verdict_name(v.value)}, {"rationale", v.rationale}};
}

json evidence_json(const std::vector<audit::Evidence>& evidence) {
  json arr = json::array();
  for (const auto& e : evidence) arr.push_back(json{{"site", e.site}, {"description", e.description}});
  return arr;
}

}  // namespace

json to_json(const analysis::LayoutReport& r) {
  json j;
  j["layout"] = analysis::layout_kind_name(r.layout);
  j["sp_global"] = r.sp_global ? json(*r.sp_global) : json(nullptr);
  j["sp_initial"] = r.sp_initial ? json(*r.sp_initial) : json(nullptr);
  j["data_range"] =
      r.data_range ? json{{"lo", r.data_range->lo}, {"hi", r.data_range->hi}} : json(nullptr);
  j["stack_region"] =
      r.stack_region ? json{{"lo", r.stack_region->lo}, {"hi", r.stack_region->hi}} : json(nullptr);
  j["ambiguous_sp"] = r.ambiguous_sp;
  j["evidence"] = r.evidence;
  return j;
}

json to_json(const audit::RobustnessReport& r) {
  json guard;
  switch (r.guard_location.kind) {
    case audit::GuardLocation::Kind::Global:
      guard = json{{"kind", "global"}, {"index", r.guard_location.index}};
      break;
    case audit::GuardLocation::Kind::LinearMemory:
      guard = json{{"kind", "linear-memory"}, {"address", r.guard_location.address}};
      break;
    case audit::GuardLocation::Kind::NotFound:
      guard = json{{"kind", "not-found"}};
      break;
  }
  json properties;
  auto property = [&](const char* name, const audit::Verdict& v) {
    json p = verdict_json(v);
    auto it = r.evidence.find(name == std::string("P2a") || name == std::string("P2b") ? "P2"
                                                                                       : name);
    p["evidence"] = it != r.evidence.end() ? evidence_json(it->second) : json::array();
    properties[name] = p;
  };
  property("P1", r.p1);
  property("P2a", r.p2a);
  property("P2b", r.p2b);
  property("P3", r.p3);

  json j;
  j["guard_location"] = guard;
  j["layout"] = to_json(r.layout);
  j["properties"] = properties;
  return j;
}

json to_json(const ssp::InstrumentationSummary& s) {
  json skipped = json::array();
  for (const auto& sk : s.functions_skipped) {
    skipped.push_back(json{{"func", sk.func_index}, {"reason", sk.reason}});
  }
  json j;
  j["flavor"] = s.flavor == ssp::Flavor::Hardened ? "hardened" : "legacy";
  j["functions_instrumented"] = s.functions_instrumented;
  j["functions_skipped"] = skipped;
  j["functions_frameless"] = s.functions_frameless;
  j["guard_global_index"] = s.guard_global_index;
  j["injected"] = json{{"init", s.init_func_index}, {"fail", s.fail_func_index}};
  j["size_delta_bytes"] = s.size_delta_bytes;
  if (s.guard_slot_address) j["guard_slot_address"] = *s.guard_slot_address;
  return j;
}

json to_json(const harness::RunOutcome& o) {
  json j;
  j["outcome"] = harness::category_name(o.category);
  j["exit_code"] = o.exit_code;
  j["stdout"] = bytes_field(o.stdout_bytes);
  j["stderr"] = bytes_field(o.stderr_bytes);
  if (!o.trap_kind.empty()) j["trap_kind"] = o.trap_kind;
  if (!o.symbol.empty()) j["symbol"] = o.symbol;
  j["duration_ms"] = o.duration.count();
  if (o.guard_value) j["guard"] = *o.guard_value;
  if (o.probe_value) j["probe"] = *o.probe_value;
  return j;
}

json to_json(const harness::EvalReport& r) {
  json runs = json::array();
  for (const auto& row : r.rows) {
    json e;
    e["name"] = row.name;
    e["flavor"] = row.flavor;
    e["mode"] = row.mode;
    e["outcome"] = row.category ? json(harness::category_name(*row.category)) : json(nullptr);
    e["duration_ms"] = row.duration_ms;
    if (row.expected) e["expected"] = harness::category_name(*row.expected);
    e["match"] = row.match;
    if (!row.error.empty()) e["error"] = row.error;
    runs.push_back(std::move(e));
  }
  json j;
  j["runs"] = runs;
  j["summary"] = r.summary;
  j["mismatches"] = r.mismatches;
  return j;
}

std::string eval_table_text(const harness::EvalReport& r) {
  size_t name_w = 4;
  for (const auto& row : r.rows) name_w = std::max(name_w, row.name.size());

  std::ostringstream out;
  out << std::left << std::setw(static_cast<int>(name_w) + 2) << "name" << std::setw(10)
      << "flavor" << std::setw(7) << "mode" << std::setw(15) << "outcome" << std::setw(15)
      << "expected" << "match\n";
  for (const auto& row : r.rows) {
    out << std::left << std::setw(static_cast<int>(name_w) + 2) << row.name << std::setw(10)
        << row.flavor << std::setw(7) << row.mode << std::setw(15)
        << (row.category ? harness::category_name(*row.category)
                         : (row.error.empty() ? "?" : "error"))
        << std::setw(15) << (row.expected ? harness::category_name(*row.expected) : "-")
        << (row.match ? "yes" : "NO") << "\n";
  }
  out << "\nsummary:\n";
  for (const auto& [flavor, cats] : r.summary) {
    out << "  " << std::left << std::setw(10) << flavor;
    bool first = true;
    for (const auto& [cat, count] : cats) {
      if (!first) out << ", ";
      out << cat << "=" << count;
      first = false;
    }
    out << "\n";
  }
  out << "mismatches: " << r.mismatches << "\n";
  return out.str();
}

std::string dump_json(const nlohmann::json& j, int indent) {
  return j.dump(indent, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string audit_text(const audit::RobustnessReport& r) {
  std::ostringstream out;
  auto line = [&](const char* name, const audit::Verdict& v) {
    out << "  " << std::left << std::setw(5) << name << std::setw(9)
        << audit::verdict_name(v.value) << v.rationale << "\n";
  };
  out << "guard: ";
  switch (r.guard_location.kind) {
    case audit::GuardLocation::Kind::Global:
      out << "global " << r.guard_location.index << " (VM-managed)\n";
      break;
    case audit::GuardLocation::Kind::LinearMemory:
      out << "linear memory @" << r.guard_location.address << "\n";
      break;
    case audit::GuardLocation::Kind::NotFound:
      out << "not found\n";
      break;
  }
  out << "layout: " << analysis::layout_kind_name(r.layout.layout) << "\n";
  line("P1", r.p1);
  line("P2a", r.p2a);
  line("P2b", r.p2b);
  line("P3", r.p3);
  return out.str();
}

}  // namespace wssp::report
