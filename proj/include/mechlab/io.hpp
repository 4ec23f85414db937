// Copyright 2026 The mechlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mechlab/enumerate.hpp"
#include "mechlab/error.hpp"
#include "mechlab/model.hpp"
#include "mechlab/multi_item.hpp"
#include "mechlab/numeric.hpp"
#include "mechlab/oracle.hpp"
#include "mechlab/verify.hpp"

// JSON instance, mechanism and report formats. All numbers are written as
// strings: "p/q" in lowest terms in exact mode, decimal in float mode.
// Tables are listed in lexicographic profile order.

namespace mechlab::io {

using nlohmann::json;

inline constexpr int kFormatVersion = 1;

inline const char* kSingleItem = "single-item";
inline const char* kSingleParameter = "single-parameter";
inline const char* kMultiItem = "multi-item";

/// Accepts "p/q", decimal strings and JSON numbers. Decimal JSON numbers are
/// read through their shortest text form, so 0.1 becomes exactly 1/10.
inline Rational number_from_json(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return parse_rational(j.dump());
  if (j.is_number_float()) return parse_rational(j.dump());
  throw InputError("expected a number, got " + j.dump());
}

template <class Num>
json number_to_json(const Num& v) {
  return to_string(v);
}

template <class Num>
json numbers_to_json(const std::vector<Num>& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(number_to_json(x));
  return out;
}

inline std::vector<Rational> numbers_from_json(const json& j) {
  if (!j.is_array()) throw InputError("expected an array of numbers");
  std::vector<Rational> out;
  for (const auto& x : j) out.push_back(number_from_json(x));
  return out;
}

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InputError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline void check_format(const json& j) {
  if (!j.is_object()) throw InputError("document must be a JSON object");
  if (j.contains("format") && j.at("format") != kFormatVersion)
    throw InputError("unsupported format version " + j.at("format").dump());
}

inline json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("invalid JSON: ") + e.what());
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
}

/// Pretty-printed JSON, one entry per line, trailing newline.
inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Instances

struct Instance {
  std::string model;
  std::optional<ExplicitDistribution<Rational>> distribution;  // single-item / single-parameter
  FeasibilitySystem feasibility;
  std::optional<MultiItemInstance<Rational>> multi;
};

inline ValueGrid<Rational> grid_from_json(const json& j) {
  if (!j.is_array()) throw InputError("grid must be an array of value lists");
  std::vector<std::vector<Rational>> values;
  for (const auto& row : j) values.push_back(numbers_from_json(row));
  return ValueGrid<Rational>(std::move(values));
}

template <class Num>
json grid_to_json(const ValueGrid<Num>& grid) {
  json out = json::array();
  for (std::size_t i = 0; i < grid.bidders(); ++i) out.push_back(numbers_to_json(grid.values(i)));
  return out;
}

inline FeasibilitySystem feasibility_from_json(const json& j, std::size_t n) {
  if (!j.is_array()) throw InputError("feasible must be an array of 0/1 vectors");
  std::vector<AllocationVector> vs;
  for (const auto& row : j) {
    if (!row.is_array()) throw InputError("feasible vector must be an array");
    AllocationVector v;
    for (const auto& c : row) {
      if (!c.is_number_integer() || (c.get<int>() != 0 && c.get<int>() != 1))
        throw InputError("feasible vector entries must be 0 or 1");
      v.push_back(static_cast<std::uint8_t>(c.get<int>()));
    }
    vs.push_back(std::move(v));
  }
  return FeasibilitySystem(n, std::move(vs));
}

inline json feasibility_to_json(const FeasibilitySystem& fs) {
  json out = json::array();
  for (const auto& v : fs.vectors()) {
    json row = json::array();
    for (auto c : v) row.push_back(static_cast<int>(c));
    out.push_back(std::move(row));
  }
  return out;
}

inline Valuation<Rational> valuation_from_json(const json& j, std::size_t items) {
  return Valuation<Rational>(items, numbers_from_json(j));
}

inline Instance instance_from_json(const json& j) {
  check_format(j);
  Instance inst;
  inst.model = j.value("model", std::string(kSingleItem));
  if (inst.model == kMultiItem) {
    const std::size_t items = field(j, "items").get<std::size_t>();
    std::vector<std::vector<Valuation<Rational>>> types;
    for (const auto& bidder : field(j, "types")) {
      std::vector<Valuation<Rational>> list;
      for (const auto& t : bidder) list.push_back(valuation_from_json(t, items));
      types.push_back(std::move(list));
    }
    std::vector<TypeSupportEntry<Rational>> support;
    for (const auto& e : field(j, "support"))
      support.push_back({field(e, "types").get<Profile>(), number_from_json(field(e, "probability"))});
    inst.multi = MultiItemInstance<Rational>(items, std::move(types), std::move(support));
    return inst;
  }
  if (inst.model != kSingleItem && inst.model != kSingleParameter)
    throw InputError("unknown model '" + inst.model + "'");

  std::vector<std::pair<std::vector<Rational>, Rational>> entries;
  for (const auto& e : field(j, "support"))
    entries.push_back({numbers_from_json(field(e, "profile")), number_from_json(field(e, "probability"))});
  if (j.contains("grid")) {
    auto grid = grid_from_json(j.at("grid"));
    std::vector<SupportEntry<Rational>> support;
    for (auto& [vals, p] : entries) support.push_back({grid.profile_of(vals), p});
    inst.distribution = ExplicitDistribution<Rational>(std::move(grid), std::move(support), GridCoverage::kSuperset);
  } else {
    inst.distribution = ExplicitDistribution<Rational>::from_values(entries);
  }
  const std::size_t n = inst.distribution->grid().bidders();
  if (inst.model == kSingleParameter)
    inst.feasibility = feasibility_from_json(field(j, "feasible"), n);
  else
    inst.feasibility = FeasibilitySystem::single_item(n);
  return inst;
}

inline Instance load_instance(const std::string& path) {
  return instance_from_json(parse_document(read_file(path)));
}

inline json instance_to_json(const ExplicitDistribution<Rational>& dist, const FeasibilitySystem& fs) {
  json j;
  j["format"] = kFormatVersion;
  j["model"] = fs.is_single_item() ? kSingleItem : kSingleParameter;
  j["grid"] = grid_to_json(dist.grid());
  json support = json::array();
  for (const auto& e : dist.support())
    support.push_back({{"profile", numbers_to_json(dist.grid().values_of(e.profile))},
                       {"probability", number_to_json(e.probability)}});
  j["support"] = std::move(support);
  if (!fs.is_single_item()) j["feasible"] = feasibility_to_json(fs);
  return j;
}

inline json instance_to_json(const MultiItemInstance<Rational>& inst) {
  json j;
  j["format"] = kFormatVersion;
  j["model"] = kMultiItem;
  j["items"] = inst.items();
  json types = json::array();
  for (std::size_t i = 0; i < inst.bidders(); ++i) {
    json list = json::array();
    for (const auto& t : inst.types(i)) list.push_back(numbers_to_json(t.table()));
    types.push_back(std::move(list));
  }
  j["types"] = std::move(types);
  json support = json::array();
  for (const auto& e : inst.support())
    support.push_back({{"types", e.types}, {"probability", number_to_json(e.probability)}});
  j["support"] = std::move(support);
  return j;
}

// ---------------------------------------------------------------------------
// Single-parameter mechanisms

template <class Num = Rational>
struct MechanismBundle {
  ValueGrid<Num> grid;
  FeasibilitySystem feasibility;
  InterimMechanism<Num> interim;
  std::optional<ExPostMechanism<Num>> expost;
  std::vector<std::pair<DeterministicMechanism<Num>, Num>> universal;
};

template <class Num>
json mechanism_to_json(const ValueGrid<Num>& grid, const FeasibilitySystem& fs,
                       const InterimMechanism<Num>& interim, const ExPostMechanism<Num>* expost,
                       const std::vector<std::pair<DeterministicMechanism<Num>, Num>>& universal = {}) {
  json j;
  j["format"] = kFormatVersion;
  j["model"] = fs.is_single_item() ? kSingleItem : kSingleParameter;
  j["grid"] = grid_to_json(grid);
  j["feasible"] = feasibility_to_json(fs);
  json table = json::array();
  for (std::size_t f = 0; f < grid.cells(); ++f) {
    json row;
    row["profile"] = numbers_to_json(grid.values_of(grid.unflatten(f)));
    row["allocation"] = numbers_to_json(interim.allocation_at(f));
    std::vector<Num> pay;
    for (std::size_t i = 0; i < grid.bidders(); ++i) pay.push_back(interim.payment(f, i));
    row["payment"] = numbers_to_json(pay);
    table.push_back(std::move(row));
  }
  j["interim"] = std::move(table);
  if (expost) {
    json lots = json::array();
    for (std::size_t f = 0; f < grid.cells(); ++f) {
      json outs = json::array();
      for (const auto& o : expost->lottery(f))
        outs.push_back({{"vector", o.vector},
                        {"probability", number_to_json(o.probability)},
                        {"payments", numbers_to_json(o.payments)}});
      lots.push_back({{"profile", numbers_to_json(grid.values_of(grid.unflatten(f)))},
                      {"outcomes", std::move(outs)}});
    }
    j["expost"] = std::move(lots);
  }
  if (!universal.empty()) {
    json parts = json::array();
    for (const auto& [mech, prob] : universal) {
      json pays = json::array();
      for (std::size_t f = 0; f < grid.cells(); ++f) {
        std::vector<Num> p;
        for (std::size_t i = 0; i < grid.bidders(); ++i) p.push_back(mech.payment(f, i));
        pays.push_back(numbers_to_json(p));
      }
      parts.push_back({{"probability", number_to_json(prob)},
                       {"choice", mech.choices()},
                       {"payments", std::move(pays)}});
    }
    j["universal"] = std::move(parts);
  }
  return j;
}

/// Reads a single-parameter mechanism file in exact arithmetic. When the
/// interim table is omitted it is derived from the ex-post lotteries or, failing
/// that, from the universal decomposition.
inline MechanismBundle<Rational> mechanism_from_json(const json& j) {
  check_format(j);
  if (j.value("model", std::string(kSingleItem)) == kMultiItem)
    throw InputError("multi-item mechanism where a single-parameter one was expected");
  auto grid = grid_from_json(field(j, "grid"));
  const std::size_t n = grid.bidders();
  FeasibilitySystem fs = j.contains("feasible") ? feasibility_from_json(j.at("feasible"), n)
                                                : FeasibilitySystem::single_item(n);
  auto flat_of = [&](const json& row) { return grid.flat(grid.profile_of(numbers_from_json(field(row, "profile")))); };

  MechanismBundle<Rational> out{grid, fs, InterimMechanism<Rational>(grid), std::nullopt, {}};
  if (j.contains("expost")) {
    std::vector<ExPostMechanism<Rational>::Lottery> lots(grid.cells());
    std::vector<bool> seen(grid.cells(), false);
    for (const auto& row : j.at("expost")) {
      std::size_t f = flat_of(row);
      if (seen[f]) throw InputError("duplicate ex-post profile");
      seen[f] = true;
      for (const auto& o : field(row, "outcomes"))
        lots[f].push_back(Outcome<Rational>{field(o, "vector").get<std::size_t>(),
                                            numbers_from_json(field(o, "payments")),
                                            number_from_json(field(o, "probability"))});
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
      throw InputError("ex-post table does not cover the full grid");
    out.expost = ExPostMechanism<Rational>(grid, fs, std::move(lots));
  }
  if (j.contains("universal")) {
    for (const auto& part : j.at("universal")) {
      auto choice = field(part, "choice").get<std::vector<std::size_t>>();
      std::vector<Rational> pay;
      for (const auto& row : field(part, "payments")) {
        auto p = numbers_from_json(row);
        if (p.size() != n) throw DimensionError("payment row has wrong length");
        pay.insert(pay.end(), p.begin(), p.end());
      }
      out.universal.push_back({DeterministicMechanism<Rational>(grid, fs, std::move(choice), std::move(pay)),
                               number_from_json(field(part, "probability"))});
    }
  }
  if (j.contains("interim")) {
    std::vector<bool> seen(grid.cells(), false);
    for (const auto& row : j.at("interim")) {
      std::size_t f = flat_of(row);
      if (seen[f]) throw InputError("duplicate interim profile");
      seen[f] = true;
      auto x = numbers_from_json(field(row, "allocation"));
      auto p = numbers_from_json(field(row, "payment"));
      if (x.size() != n || p.size() != n) throw DimensionError("interim row has wrong length");
      for (std::size_t i = 0; i < n; ++i) {
        out.interim.set_allocation(f, i, x[i]);
        out.interim.set_payment(f, i, p[i]);
      }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
      throw InputError("interim table does not cover the full grid");
  } else if (out.expost) {
    out.interim = interim_of(*out.expost);
  } else if (!out.universal.empty()) {
    for (const auto& [mech, prob] : out.universal) {
      auto part = mech.to_interim();
      for (std::size_t f = 0; f < grid.cells(); ++f)
        for (std::size_t i = 0; i < n; ++i) {
          out.interim.set_allocation(f, i, Rational(out.interim.allocation(f, i) + prob * part.allocation(f, i)));
          out.interim.set_payment(f, i, Rational(out.interim.payment(f, i) + prob * part.payment(f, i)));
        }
    }
  } else {
    throw InputError("mechanism file has no interim, expost or universal table");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Multi-item mechanisms

template <class Num>
json multi_mechanism_to_json(const MultiMechanism<Num>& mech, const MultiItemInstance<Rational>& inst,
                             std::size_t max_assignments) {
  AssignmentSpace space(mech.bidders, mech.items, max_assignments);
  json j;
  j["format"] = kFormatVersion;
  j["model"] = kMultiItem;
  j["items"] = mech.items;
  j["bidders"] = mech.bidders;
  json rows = json::array();
  for (std::size_t f = 0; f < mech.lotteries.size(); ++f) {
    json lot = json::array();
    for (const auto& w : mech.lotteries[f])
      lot.push_back({{"owners", space.owners(w.assignment)}, {"probability", number_to_json(w.probability)}});
    std::vector<Num> pay;
    for (std::size_t i = 0; i < mech.bidders; ++i) pay.push_back(mech.payment(f, i));
    rows.push_back({{"types", inst.indexer().unflatten(f)}, {"lottery", std::move(lot)},
                    {"payments", numbers_to_json(pay)}});
  }
  j["profiles"] = std::move(rows);
  return j;
}

inline MultiMechanism<Rational> multi_mechanism_from_json(const json& j, const MultiItemInstance<Rational>& inst) {
  check_format(j);
  if (j.value("model", std::string()) != kMultiItem) throw InputError("not a multi-item mechanism file");
  MultiMechanism<Rational> mech;
  mech.items = field(j, "items").get<std::size_t>();
  mech.bidders = field(j, "bidders").get<std::size_t>();
  if (mech.items != inst.items() || mech.bidders != inst.bidders())
    throw DimensionError("mechanism does not match instance shape");
  mech.lotteries.resize(inst.profiles());
  mech.payments.assign(inst.profiles() * mech.bidders, Rational(0));
  std::vector<bool> seen(inst.profiles(), false);
  for (const auto& row : field(j, "profiles")) {
    std::size_t f = inst.indexer().flat(field(row, "types").get<Profile>());
    if (seen[f]) throw InputError("duplicate type profile");
    seen[f] = true;
    for (const auto& w : field(row, "lottery")) {
      auto owners = field(w, "owners").get<std::vector<std::size_t>>();
      if (owners.size() != mech.items) throw DimensionError("owner list has wrong length");
      std::size_t code = 0;
      for (std::size_t k = owners.size(); k-- > 0;) {
        if (owners[k] > mech.bidders) throw InputError("item owner out of range");
        code = code * (mech.bidders + 1) + owners[k];
      }
      mech.lotteries[f].push_back({code, number_from_json(field(w, "probability"))});
    }
    auto pay = numbers_from_json(field(row, "payments"));
    if (pay.size() != mech.bidders) throw DimensionError("payment row has wrong length");
    for (std::size_t i = 0; i < mech.bidders; ++i) mech.payments[f * mech.bidders + i] = pay[i];
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end())
    throw InputError("mechanism does not cover every type profile");
  return mech;
}

// ---------------------------------------------------------------------------
// Reports

/// Witness profiles are printed as grid values; multi-item ones as type
/// indices (pass a null grid).
template <class Num>
json report_to_json(const VerifyReport<Num>& report, const ValueGrid<Num>* grid) {
  json j;
  j["pass"] = report.pass;
  json checks = json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"name", c.name},
                      {"pass", c.pass},
                      {"witnesses", c.witnesses},
                      {"convention_dependent", c.convention_dependent}});
  j["checks"] = std::move(checks);
  json ws = json::array();
  for (const auto& w : report.witnesses) {
    json o;
    o["check"] = w.check;
    if (w.part) o["part"] = *w.part;
    if (w.bidder) o["bidder"] = *w.bidder;
    if (grid) o["profile"] = numbers_to_json(grid->values_of(w.profile));
    else o["types"] = w.profile;
    if (w.deviation) {
      o["deviation_index"] = *w.deviation;
      bool value_deviation = w.check != "expost_ir" && w.bidder && grid;
      if (value_deviation) o["deviation_value"] = number_to_json(grid->value(*w.bidder, *w.deviation));
    }
    o["lhs"] = number_to_json(w.lhs);
    o["rhs"] = number_to_json(w.rhs);
    o["relation"] = w.relation;
    if (!w.note.empty()) o["note"] = w.note;
    ws.push_back(std::move(o));
  }
  j["witnesses"] = std::move(ws);
  return j;
}

inline json ledger_to_json(const QueryLedger& ledger) {
  return {{"point_queries", ledger.point_queries()},
          {"conditional_queries", ledger.conditional_queries()},
          {"total_queries", ledger.total()}};
}

}  // namespace mechlab::io
