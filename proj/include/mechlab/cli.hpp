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
#include <cstdint>
#include <exception>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mechlab/enumerate.hpp"
#include "mechlab/error.hpp"
#include "mechlab/io.hpp"
#include "mechlab/lp.hpp"
#include "mechlab/mechanisms.hpp"
#include "mechlab/model.hpp"
#include "mechlab/multi_item.hpp"
#include "mechlab/optimal.hpp"
#include "mechlab/oracle.hpp"
#include "mechlab/verify.hpp"

namespace mechlab::cli {

enum ExitCode : int {
  kSuccess = 0,
  kVerificationFailed = 1,
  kInputError = 2,
  kResourceError = 3,
};

struct Options {
  bool float_mode = false;
  bool allow_negative_payments = false;
  std::optional<std::uint64_t> budget;
  std::uint64_t seed = 0;
  std::size_t limits = EnumLimits{}.max_cells;
  std::size_t max_assignments = MultiSolveOptions{}.max_assignments;
  std::size_t threads = 1;
  std::string output;
  std::string instance;
  std::string mechanism;
  std::string builtin;
  std::string lp_dump;
  std::vector<std::string> point;
  bool extension = false;
};

namespace detail {

using io::json;

template <class To>
To num(const Rational& r) {
  return NumTraits<To>::from_rational(r);
}

template <class To>
std::vector<To> nums(const std::vector<Rational>& v) {
  std::vector<To> out;
  for (const auto& x : v) out.push_back(num<To>(x));
  return out;
}

template <class To>
io::MechanismBundle<To> bundle_cast(const io::MechanismBundle<Rational>& b) {
  auto grid = grid_cast<To>(b.grid);
  InterimMechanism<To> interim(grid);
  for (std::size_t f = 0; f < grid.cells(); ++f)
    for (std::size_t i = 0; i < grid.bidders(); ++i) {
      interim.set_allocation(f, i, num<To>(b.interim.allocation(f, i)));
      interim.set_payment(f, i, num<To>(b.interim.payment(f, i)));
    }
  std::optional<ExPostMechanism<To>> expost;
  if (b.expost) {
    std::vector<typename ExPostMechanism<To>::Lottery> lots;
    for (const auto& lot : b.expost->lotteries()) {
      typename ExPostMechanism<To>::Lottery l;
      for (const auto& o : lot) l.push_back(Outcome<To>{o.vector, nums<To>(o.payments), num<To>(o.probability)});
      lots.push_back(std::move(l));
    }
    expost = ExPostMechanism<To>(grid, b.feasibility, std::move(lots));
  }
  std::vector<std::pair<DeterministicMechanism<To>, To>> parts;
  for (const auto& [mech, prob] : b.universal) {
    std::vector<To> pay;
    for (std::size_t f = 0; f < grid.cells(); ++f)
      for (std::size_t i = 0; i < grid.bidders(); ++i) pay.push_back(num<To>(mech.payment(f, i)));
    parts.push_back({DeterministicMechanism<To>(grid, b.feasibility, mech.choices(), std::move(pay)), num<To>(prob)});
  }
  return io::MechanismBundle<To>{grid, b.feasibility, std::move(interim), std::move(expost), std::move(parts)};
}

template <class To>
MultiItemInstance<To> multi_cast(const MultiItemInstance<Rational>& inst) {
  std::vector<std::vector<Valuation<To>>> types(inst.bidders());
  for (std::size_t i = 0; i < inst.bidders(); ++i)
    for (const auto& t : inst.types(i)) types[i].push_back(Valuation<To>(inst.items(), nums<To>(t.table())));
  std::vector<TypeSupportEntry<To>> support;
  for (const auto& e : inst.support()) support.push_back({e.types, num<To>(e.probability)});
  return MultiItemInstance<To>(inst.items(), std::move(types), std::move(support));
}

template <class To>
MultiMechanism<To> multi_mech_cast(const MultiMechanism<Rational>& m) {
  MultiMechanism<To> out{m.items, m.bidders, {}, nums<To>(m.payments)};
  for (const auto& lot : m.lotteries) {
    std::vector<AssignmentWeight<To>> l;
    for (const auto& w : lot) l.push_back({w.assignment, num<To>(w.probability)});
    out.lotteries.push_back(std::move(l));
  }
  return out;
}

inline io::Instance require_instance(const Options& o) {
  if (o.instance.empty()) throw InputError("--instance is required");
  return io::load_instance(o.instance);
}

inline void require_single(const io::Instance& inst) {
  if (!inst.distribution) throw InputError("this command needs a single-item or single-parameter instance");
}

template <class Num>
json base_report(const char* command, const Options& o) {
  json r;
  r["command"] = command;
  r["mode"] = NumTraits<Num>::kModeName;
  r["seed"] = o.seed;
  return r;
}

/// Builtin reference mechanisms, as interim + deterministic ex-post tables.
template <class Num>
io::MechanismBundle<Num> builtin(const std::string& name, const ValueGrid<Num>& grid, const FeasibilitySystem& fs) {
  if (!fs.is_single_item()) throw InputError("builtin mechanisms need a single-item instance");
  auto from_det = [&](const DeterministicMechanism<Num>& m) {
    return io::MechanismBundle<Num>{grid, fs, m.to_interim(), m.to_expost(), {}};
  };
  if (name == "zero") {
    auto z = zero_mechanism(grid);
    return io::MechanismBundle<Num>{grid, fs, z, canonical_expost(z, fs), {}};
  }
  if (name == "vickrey") return from_det(vickrey(grid));
  if (name == "vickrey-threshold") return from_det(vickrey_grid_threshold(grid));
  if (name == "first-price") return from_det(first_price(grid));
  throw InputError("unknown builtin mechanism '" + name + "'");
}

template <class Num>
io::MechanismBundle<Num> load_mechanism(const Options& o, const ValueGrid<Num>& grid, const FeasibilitySystem& fs) {
  if (!o.builtin.empty()) {
    if (!o.mechanism.empty()) throw InputError("give either --mechanism or --builtin, not both");
    return builtin(o.builtin, grid, fs);
  }
  if (o.mechanism.empty()) throw InputError("--mechanism or --builtin is required");
  auto exact = io::mechanism_from_json(io::parse_document(io::read_file(o.mechanism)));
  io::MechanismBundle<Num> b;
  if constexpr (std::is_same_v<Num, Rational>) b = std::move(exact);
  else b = bundle_cast<Num>(exact);
  if (!(b.grid == grid)) throw DimensionError("mechanism grid differs from the instance grid");
  if (!(b.feasibility == fs)) throw DimensionError("mechanism feasibility system differs from the instance");
  return b;
}

template <class Num>
ExplicitDistribution<Num> distribution(const io::Instance& inst) {
  if constexpr (std::is_same_v<Num, Rational>) return *inst.distribution;
  else return distribution_cast<Num>(*inst.distribution);
}

template <class Num>
MultiItemInstance<Num> multi(const io::Instance& inst) {
  if constexpr (std::is_same_v<Num, Rational>) return *inst.multi;
  else return multi_cast<Num>(*inst.multi);
}

inline void emit(std::ostream& out, const Options& o, json report, const char* key, json mechanism) {
  if (!o.output.empty()) {
    io::write_file(o.output, io::dump(mechanism));
    report["output"] = o.output;
  } else {
    report[key] = std::move(mechanism);
  }
  out << io::dump(report);
}

template <class Num>
int solve(const Options& o, std::ostream& out) {
  auto inst = require_instance(o);
  require_single(inst);
  auto dist = distribution<Num>(inst);
  SolveOptions opts{o.allow_negative_payments};
  auto lp = build_optimal_lp(dist, inst.feasibility, opts);
  if (!o.lp_dump.empty()) io::write_file(o.lp_dump, lp.to_lp_text());
  auto result = solve_optimal(dist, inst.feasibility, opts);
  auto report = base_report<Num>("solve", o);
  report["model"] = inst.model;
  report["revenue"] = io::number_to_json(result.revenue);
  report["allow_negative_payments"] = o.allow_negative_payments;
  report["expost_representable"] = result.expost.has_value();
  report["lp"] = {{"variables", lp.variable_count()}, {"constraints", lp.constraints().size()}};
  auto mech = io::mechanism_to_json(dist.grid(), inst.feasibility, result.interim,
                                    result.expost ? &*result.expost : nullptr);
  emit(out, o, std::move(report), "mechanism", std::move(mech));
  return kSuccess;
}

template <class Num>
int solve_det(const Options& o, std::ostream& out) {
  auto inst = require_instance(o);
  require_single(inst);
  auto dist = distribution<Num>(inst);
  EnumLimits limits;
  limits.max_cells = o.limits;
  limits.threads = o.threads;
  auto result = enumerate_deterministic_optimal(dist, inst.feasibility, limits);
  auto report = base_report<Num>("solve-det", o);
  report["model"] = inst.model;
  report["revenue"] = io::number_to_json(result.revenue);
  report["candidates"] = result.candidates;
  auto expost = result.mechanism.to_expost();
  auto mech = io::mechanism_to_json(dist.grid(), inst.feasibility, result.mechanism.to_interim(), &expost,
                                    {{result.mechanism, Num(1)}});
  emit(out, o, std::move(report), "mechanism", std::move(mech));
  return kSuccess;
}

template <class Num>
int solve_multi_cmd(const Options& o, std::ostream& out) {
  auto inst = require_instance(o);
  if (!inst.multi) throw InputError("solve-multi needs a multi-item instance");
  auto mi = multi<Num>(inst);
  MultiSolveOptions opts{o.allow_negative_payments, o.max_assignments};
  auto result = solve_multi(mi, opts);
  auto check = verify_multi(result.mechanism, mi, opts);
  if (!check.pass) throw std::logic_error("multi-item LP output failed its own verification");
  auto report = base_report<Num>("solve-multi", o);
  report["model"] = inst.model;
  report["revenue"] = io::number_to_json(result.revenue);
  report["allow_negative_payments"] = o.allow_negative_payments;
  report["verified"] = check.pass;
  emit(out, o, std::move(report), "mechanism",
       io::multi_mechanism_to_json(result.mechanism, *inst.multi, o.max_assignments));
  return kSuccess;
}

template <class Num>
int verify(const Options& o, std::ostream& out) {
  auto inst = require_instance(o);
  auto report = base_report<Num>("verify", o);
  VerifyReport<Num> vr;
  if (inst.multi) {
    if (o.mechanism.empty()) throw InputError("--mechanism is required for multi-item instances");
    auto exact = io::multi_mechanism_from_json(io::parse_document(io::read_file(o.mechanism)), *inst.multi);
    MultiSolveOptions opts{o.allow_negative_payments, o.max_assignments};
    if constexpr (std::is_same_v<Num, Rational>) vr = verify_multi(exact, *inst.multi, opts);
    else vr = verify_multi(multi_mech_cast<Num>(exact), multi<Num>(inst), opts);
    auto body = io::report_to_json<Num>(vr, nullptr);
    report.update(body);
  } else {
    auto dist = distribution<Num>(inst);
    auto mech = load_mechanism<Num>(o, dist.grid(), inst.feasibility);
    vr = check_truthful(mech.interim);
    vr.merge(check_ir(mech.interim));
    vr.merge(check_feasible(mech.interim, inst.feasibility));
    if (mech.expost) {
      if (!(interim_of(*mech.expost) == mech.interim) && NumTraits<Num>::kExact)
        throw InputError("ex-post lotteries do not reproduce the interim table");
      vr.merge(check_expost_ir(*mech.expost));
    }
    if (!mech.universal.empty()) vr.merge(check_universal(mech.universal));
    if (o.extension) {
      auto ext = check_extension(mech.interim);
      // grid IC is already reported above
      std::erase_if(ext.checks, [](const auto& c) { return c.name == "truthful"; });
      std::erase_if(ext.witnesses, [](const auto& w) { return w.check == "truthful"; });
      ext.pass = ext.witnesses.empty();
      vr.merge(std::move(ext));
    }
    report["revenue"] = io::number_to_json(expected_revenue(mech.interim, dist));
    auto body = io::report_to_json<Num>(vr, &dist.grid());
    report.update(body);
  }
  out << io::dump(report);
  return vr.pass ? kSuccess : kVerificationFailed;
}

template <class Num>
Num mechanism_revenue(const Options& o, const io::Instance& inst) {
  if (inst.multi) {
    if (o.mechanism.empty()) throw InputError("--mechanism is required for multi-item instances");
    auto exact = io::multi_mechanism_from_json(io::parse_document(io::read_file(o.mechanism)), *inst.multi);
    if constexpr (std::is_same_v<Num, Rational>) return expected_revenue(exact, *inst.multi);
    else return expected_revenue(multi_mech_cast<Num>(exact), multi<Num>(inst));
  }
  auto dist = distribution<Num>(inst);
  auto mech = load_mechanism<Num>(o, dist.grid(), inst.feasibility);
  return expected_revenue(mech.interim, dist);
}

template <class Num>
int revenue(const Options& o, std::ostream& out) {
  auto inst = require_instance(o);
  out << to_string(mechanism_revenue<Num>(o, inst)) << "\n";
  return kSuccess;
}

template <class Num>
int ratio(const Options& o, std::ostream& out) {
  auto inst = require_instance(o);
  Num mech = mechanism_revenue<Num>(o, inst);
  Num opt = inst.multi
                ? solve_multi(multi<Num>(inst), MultiSolveOptions{o.allow_negative_payments, o.max_assignments}).revenue
                : solve_optimal(distribution<Num>(inst), inst.feasibility,
                                SolveOptions{o.allow_negative_payments}).revenue;
  out << to_string(approximation_ratio(mech, opt)) << "\n";
  return kSuccess;
}

template <class Num>
int decompose(const Options& o, std::ostream& out) {
  auto inst = require_instance(o);
  require_single(inst);
  std::vector<Num> x;
  for (const auto& s : o.point) x.push_back(num<Num>(parse_rational(s)));
  auto dec = decompose_allocation(x, inst.feasibility);
  json r = base_report<Num>("decompose", o);
  r["in_hull"] = dec.in_hull;
  if (dec.in_hull) {
    json terms = json::array();
    for (const auto& t : dec.terms)
      terms.push_back({{"vector", io::feasibility_to_json(inst.feasibility)[t.vector]},
                       {"index", t.vector},
                       {"weight", io::number_to_json(t.weight)}});
    r["terms"] = std::move(terms);
  } else {
    r["certificate"] = {{"normal", io::numbers_to_json(dec.certificate->normal)},
                        {"offset", io::number_to_json(dec.certificate->offset)}};
  }
  out << io::dump(r);
  return kSuccess;
}

template <class Num>
int oracle_stats(const Options& o, std::ostream& out) {
  auto inst = require_instance(o);
  require_single(inst);
  auto dist = distribution<Num>(inst);
  auto oracle = std::make_shared<const ExplicitOracle<Num>>(dist);
  const std::uint64_t budget = o.budget.value_or(default_budget(dist.grid()));
  auto capped = with_budget<Num>(oracle, budget);
  auto rebuilt = materialize(*capped);
  json r = base_report<Num>("oracle-stats", o);
  r["budget"] = budget;
  r["default_budget"] = default_budget(dist.grid());
  r["cells"] = dist.grid().cells();
  r["combined_support"] = dist.grid().combined_support();
  r["ledger"] = io::ledger_to_json(*capped->ledger());
  r["materialized_matches"] = (rebuilt == ExplicitDistribution<Num>(dist.grid(), dist.support()));
  out << io::dump(r);
  return kSuccess;
}

template <class Num>
int dispatch(const std::string& command, const Options& o, std::ostream& out) {
  if (command == "solve") return solve<Num>(o, out);
  if (command == "solve-det") return solve_det<Num>(o, out);
  if (command == "solve-multi") return solve_multi_cmd<Num>(o, out);
  if (command == "verify") return verify<Num>(o, out);
  if (command == "revenue") return revenue<Num>(o, out);
  if (command == "ratio") return ratio<Num>(o, out);
  if (command == "decompose") return decompose<Num>(o, out);
  if (command == "oracle-stats") return oracle_stats<Num>(o, out);
  throw InputError("unknown command '" + command + "'");
}

}  // namespace detail

/// Runs one CLI invocation. args excludes the program name. Results go to
/// `out`, diagnostics to `err`.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"mechlab: optimal truthful auctions over correlated discrete values"};
  app.require_subcommand(1, 1);
  app.fallthrough();
  Options o;
  bool exact_flag = false;
  app.add_flag("--exact", exact_flag, "Exact rational arithmetic (default)");
  app.add_flag("--float", o.float_mode, "Floating-point arithmetic with 1e-9 tolerance");
  app.add_flag("--allow-negative-payments", o.allow_negative_payments, "Drop the p >= 0 payment bound");
  app.add_option("--budget", o.budget, "Oracle query budget (default 16*(n+sum|V_i|)^2)");
  app.add_option("--seed", o.seed, "Seed recorded in reports");
  app.add_option("--limits", o.limits, "Grid-cell limit for deterministic enumeration");
  app.add_option("--max-assignments", o.max_assignments, "Size guard on (n+1)^m for multi-item LPs");
  app.add_option("--threads", o.threads, "Worker threads for deterministic enumeration");
  app.add_option("--output", o.output, "Write the mechanism file here instead of embedding it");

  auto with_instance = [&](CLI::App* sub) {
    sub->add_option("-i,--instance,instance", o.instance, "Instance file")->required();
  };
  auto with_mechanism = [&](CLI::App* sub) {
    sub->add_option("-m,--mechanism", o.mechanism, "Mechanism file");
    sub->add_option("--builtin", o.builtin, "zero | vickrey | vickrey-threshold | first-price");
  };
  auto* solve = app.add_subcommand("solve", "Revenue-optimal truthful-in-expectation mechanism (LP)");
  with_instance(solve);
  solve->add_option("--lp-dump", o.lp_dump, "Write the LP in text form");
  with_instance(app.add_subcommand("solve-det", "Revenue-optimal deterministic mechanism (enumeration)"));
  with_instance(app.add_subcommand("solve-multi", "Revenue-optimal multi-item mechanism (LP)"));
  auto* verify = app.add_subcommand("verify", "Check a mechanism against truthfulness, IR, feasibility");
  with_instance(verify);
  with_mechanism(verify);
  verify->add_flag("--extension", o.extension, "Also check truthfulness of the round-down extension");
  auto* revenue = app.add_subcommand("revenue", "Expected revenue of a mechanism");
  with_instance(revenue);
  with_mechanism(revenue);
  auto* ratio = app.add_subcommand("ratio", "Approximation ratio OPT / revenue");
  with_instance(ratio);
  with_mechanism(ratio);
  auto* decompose = app.add_subcommand("decompose", "Convex decomposition of an allocation vector");
  with_instance(decompose);
  decompose->add_option("--point", o.point, "Allocation vector entries")->required();
  with_instance(app.add_subcommand("oracle-stats", "Materialize through the budgeted oracle"));

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  if (exact_flag && o.float_mode) {
    err << "error: --exact and --float are mutually exclusive\n";
    return kInputError;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return o.float_mode ? detail::dispatch<double>(command, o, out)
                        : detail::dispatch<Rational>(command, o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::kResource ? kResourceError : kInputError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed document: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace mechlab::cli
