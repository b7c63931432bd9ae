#pragma once

// JSON encodings of precise-error regions, factorization outcomes and
// ledgers.

#include <cmath>
#include <string>

#include "json.hpp"
#include "pw/analogue_factorizer.hpp"
#include "pw/crypto_ledger.hpp"
#include "pw/error.hpp"
#include "pw/precision_model.hpp"

namespace pw {

using nlohmann::json;

// Infinite amounts are written as the string "inf".
inline json amount_json(Amount a) { return a == kInfinite ? json("inf") : json(a); }

inline json region_to_json(const PreciseErrorRegion& r) {
  const bool mc = std::holds_alternative<MonteCarloMode>(r.mode);
  json j;
  j["dimension"] = r.dimension;
  j["measure"] = std::isinf(r.measure) ? json("inf") : json(r.measure);
  j["mode"] = mc ? "mc" : "analytic";
  j["mc_samples"] = r.mc_samples;
  j["mc_stderr"] = r.mc_stderr;
  return j;
}

inline json outcome_to_json(const factorizer::FactorizationOutcome& o) {
  json j;
  j["requested_n"] = o.requested_n;
  j["halvings"] = o.halvings;
  j["corrected_m"] = o.corrected_m;
  j["candidates"] = json::array();
  for (const auto& c : o.candidates) j["candidates"].push_back({{"factor", c.factor}, {"verified", c.verified}});
  j["resources"] = {{"time", amount_json(o.resources.time)},
                    {"space", amount_json(o.resources.space)},
                    {"precision", amount_json(o.resources.precision)}};
  j["output_precision"] = amount_json(o.output_precision);
  j["suspect_miscorrection"] = o.suspect_miscorrection;
  const auto f = o.nontrivial_factor();
  j["nontrivial_factor"] = f ? json(*f) : json(nullptr);
  return j;
}

inline json ledger_to_json(const ledger::Ledger& l) {
  json arr = json::array();
  for (const auto& e : l.events()) {
    json costs = json::object();
    for (const auto& [c, amount] : e.costs) costs[ledger::category_key(c)] = amount;
    arr.push_back({{"agent", e.agent}, {"subprocess", e.subprocess}, {"costs", costs}});
  }
  return arr;
}

/// Parses the ledger array; absent cost keys mean 0 and unknown keys are
/// rejected.
inline ledger::Ledger ledger_from_json(const json& arr) {
  if (!arr.is_array()) throw DomainError("ledger JSON must be an array");
  ledger::Ledger l;
  for (const auto& item : arr) {
    ledger::CostEvent e;
    try {
      e.agent = item.at("agent").get<ledger::AgentId>();
      e.subprocess = item.at("subprocess").get<std::string>();
      for (const auto& [key, value] : item.at("costs").items()) {
        bool known = false;
        for (auto c : ledger::kCategories) {
          if (key == ledger::category_key(c)) {
            e.costs[c] = value.get<std::int64_t>();
            known = true;
          }
        }
        if (!known) throw DomainError("unknown cost category '" + key + "'");
      }
    } catch (const json::exception& ex) {
      throw DomainError(std::string("malformed ledger event: ") + ex.what());
    }
    l.append(std::move(e));
  }
  return l;
}

}  // namespace pw
