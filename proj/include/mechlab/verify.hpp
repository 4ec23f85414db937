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

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mechlab/error.hpp"
#include "mechlab/model.hpp"
#include "mechlab/numeric.hpp"
#include "mechlab/optimal.hpp"

namespace mechlab {

/// One violated inequality: `lhs relation rhs` was required and fails.
template <class Num = Rational>
struct Witness {
  std::string check;
  std::optional<std::size_t> part;        // universal decompositions only
  std::optional<std::size_t> bidder;      // absent for per-profile checks
  Profile profile;                        // grid indices of the evaluated profile
  std::optional<std::size_t> deviation;   // grid index of the report, or outcome index
  Num lhs{0};
  Num rhs{0};
  std::string relation;                   // ">=", "<=" or "=="
  std::string note;
};

struct CheckSummary {
  std::string name;
  bool pass = true;
  std::size_t witnesses = 0;
  /// Result depends on the artifact's below-grid null-outcome convention.
  bool convention_dependent = false;
};

template <class Num = Rational>
struct VerifyReport {
  bool pass = true;
  std::vector<CheckSummary> checks;
  std::vector<Witness<Num>> witnesses;

  void merge(VerifyReport other) {
    pass = pass && other.pass;
    for (auto& c : other.checks) checks.push_back(std::move(c));
    for (auto& w : other.witnesses) witnesses.push_back(std::move(w));
  }
};

namespace detail {

template <class Num>
class ReportBuilder {
 public:
  explicit ReportBuilder(std::string name, bool convention_dependent = false) {
    summary_.name = std::move(name);
    summary_.convention_dependent = convention_dependent;
  }

  /// Records a witness when lhs >= rhs fails.
  void require_geq(Witness<Num> w) {
    w.relation = ">=";
    if (NumTraits<Num>::violates_geq(w.lhs, w.rhs)) add(std::move(w));
  }
  void require_leq(Witness<Num> w) {
    w.relation = "<=";
    if (violates_leq(w.lhs, w.rhs)) add(std::move(w));
  }
  void require_eq(Witness<Num> w) {
    w.relation = "==";
    if (!NumTraits<Num>::equal(w.lhs, w.rhs)) add(std::move(w));
  }

  VerifyReport<Num> finish() && {
    VerifyReport<Num> r;
    summary_.witnesses = witnesses_.size();
    summary_.pass = witnesses_.empty();
    r.pass = summary_.pass;
    r.checks.push_back(std::move(summary_));
    r.witnesses = std::move(witnesses_);
    return r;
  }

 private:
  void add(Witness<Num> w) {
    if (w.check.empty()) w.check = summary_.name;
    witnesses_.push_back(std::move(w));
  }

  CheckSummary summary_;
  std::vector<Witness<Num>> witnesses_;
};

template <class Num>
Num utility(const InterimMechanism<Num>& m, std::size_t f, std::size_t i, const Num& value) {
  return Num(value * m.allocation(f, i) - m.payment(f, i));
}

/// Calls fn(i, base) once per bidder i and per v_{-i}, with base the flat
/// profile where bidder i reports the lowest value.
template <class Num, class Fn>
void for_each_line(const ValueGrid<Num>& grid, Fn fn) {
  const auto& idx = grid.indexer();
  for (std::size_t i = 0; i < grid.bidders(); ++i)
    for (std::size_t base = 0; base < grid.cells(); ++base)
      if (idx.digit(base, i) == 0) fn(i, base);
}

}  // namespace detail

/// x_i(v) v_i - p_i(v) >= x_i(v'_i, v_{-i}) v_i - p_i(v'_i, v_{-i}) for
/// every bidder, every v_{-i} and every ordered pair of own values.
template <class Num>
VerifyReport<Num> check_truthful(const InterimMechanism<Num>& mech) {
  const auto& grid = mech.grid();
  const auto& idx = grid.indexer();
  detail::ReportBuilder<Num> out("truthful");
  detail::for_each_line(grid, [&](std::size_t i, std::size_t base) {
    for (std::size_t t = 0; t < grid.size(i); ++t) {
      std::size_t ft = idx.with_digit(base, i, t);
      const Num& v = grid.value(i, t);
      for (std::size_t r = 0; r < grid.size(i); ++r) {
        if (r == t) continue;
        std::size_t fr = idx.with_digit(base, i, r);
        out.require_geq({.check = "truthful", .bidder = i, .profile = grid.unflatten(ft),
                         .deviation = r, .lhs = detail::utility(mech, ft, i, v),
                         .rhs = detail::utility(mech, fr, i, v)});
      }
    }
  });
  return std::move(out).finish();
}

/// p_i(v) <= v_i x_i(v) at every grid profile.
template <class Num>
VerifyReport<Num> check_ir(const InterimMechanism<Num>& mech) {
  const auto& grid = mech.grid();
  detail::ReportBuilder<Num> out("ir");
  for (std::size_t i = 0; i < grid.bidders(); ++i)
    for (std::size_t f = 0; f < grid.cells(); ++f)
      out.require_leq({.check = "ir", .bidder = i, .profile = grid.unflatten(f),
                       .lhs = mech.payment(f, i),
                       .rhs = Num(grid.value_at(f, i) * mech.allocation(f, i))});
  return std::move(out).finish();
}

/// Every realized winner pays at most its value; every non-winner pays 0.
/// Deviation indexes the outcome within the profile's lottery.
template <class Num>
VerifyReport<Num> check_expost_ir(const ExPostMechanism<Num>& mech) {
  const auto& grid = mech.grid();
  const auto& fs = mech.feasibility();
  detail::ReportBuilder<Num> out("expost_ir");
  for (std::size_t i = 0; i < grid.bidders(); ++i) {
    for (std::size_t f = 0; f < grid.cells(); ++f) {
      const auto& lot = mech.lottery(f);
      for (std::size_t o = 0; o < lot.size(); ++o) {
        Witness<Num> w{.check = "expost_ir", .bidder = i, .profile = grid.unflatten(f),
                       .deviation = o, .lhs = lot[o].payments[i]};
        if (fs.vector(lot[o].vector)[i]) {
          w.rhs = grid.value_at(f, i);
          out.require_leq(std::move(w));
        } else {
          w.rhs = Num(0);
          w.note = "non-winner payment";
          out.require_eq(std::move(w));
        }
      }
    }
  }
  return std::move(out).finish();
}

/// x(v) lies in conv(fs) at every profile; failures carry the separating
/// hyperplane as normal.x <= offset.
template <class Num>
VerifyReport<Num> check_feasible(const InterimMechanism<Num>& mech, const FeasibilitySystem& fs) {
  const auto& grid = mech.grid();
  if (fs.bidders() != grid.bidders()) throw DimensionError("feasibility system and grid disagree on n");
  detail::ReportBuilder<Num> out("feasible");
  for (std::size_t f = 0; f < grid.cells(); ++f) {
    auto x = mech.allocation_at(f);
    auto dec = decompose_allocation(x, fs);
    if (dec.in_hull) continue;
    const auto& cert = *dec.certificate;
    Num lhs(0);
    for (std::size_t i = 0; i < x.size(); ++i) lhs += Num(cert.normal[i] * x[i]);
    std::string note = "separating normal (";
    for (std::size_t i = 0; i < cert.normal.size(); ++i)
      note += (i ? "," : "") + to_string(cert.normal[i]);
    note += ")";
    Witness<Num> w{.check = "feasible", .profile = grid.unflatten(f), .lhs = lhs,
                   .rhs = cert.offset, .note = std::move(note)};
    out.require_leq(std::move(w));
  }
  return std::move(out).finish();
}

/// Truthfulness of the round-down extension over all non-negative reals.
///
/// Utilities are linear in the true value, so on each interval between grid
/// points it suffices to test the endpoints:
///  - grid IC (check_truthful);
///  - values just below g_{k+1} still prefer outcome k ("extension.below_next");
///  - values above g_K never prefer another outcome: x_K >= x_j, and equal
///    allocations need p_K <= p_j ("extension.above_top");
///  - values in [0, g_1) get the null outcome and must not envy any grid
///    outcome, tested at g_1 and at 0 ("extension.below_bottom"). This part
///    is convention dependent and skipped when g_1 = 0.
template <class Num>
VerifyReport<Num> check_extension(const InterimMechanism<Num>& mech) {
  const auto& grid = mech.grid();
  const auto& idx = grid.indexer();
  auto report = check_truthful(mech);

  detail::ReportBuilder<Num> next("extension.below_next");
  detail::ReportBuilder<Num> top("extension.above_top");
  detail::ReportBuilder<Num> bottom("extension.below_bottom", true);
  detail::for_each_line(grid, [&](std::size_t i, std::size_t base) {
    const std::size_t K = grid.size(i);
    auto cell = [&](std::size_t k) { return idx.with_digit(base, i, k); };
    for (std::size_t k = 0; k + 1 < K; ++k) {
      const Num& g = grid.value(i, k + 1);
      for (std::size_t j = 0; j < K; ++j) {
        if (j == k) continue;
        next.require_geq({.bidder = i, .profile = grid.unflatten(cell(k)), .deviation = j,
                          .lhs = detail::utility(mech, cell(k), i, g),
                          .rhs = detail::utility(mech, cell(j), i, g),
                          .note = "true value just below " + to_string(g)});
      }
    }
    const std::size_t last = cell(K - 1);
    for (std::size_t j = 0; j + 1 < K; ++j) {
      const Num& xK = mech.allocation(last, i);
      const Num& xj = mech.allocation(cell(j), i);
      if (NumTraits<Num>::equal(xK, xj)) {
        top.require_leq({.bidder = i, .profile = grid.unflatten(last), .deviation = j,
                         .lhs = mech.payment(last, i), .rhs = mech.payment(cell(j), i),
                         .note = "equal allocations: payment comparison"});
      } else {
        top.require_geq({.bidder = i, .profile = grid.unflatten(last), .deviation = j,
                         .lhs = xK, .rhs = xj, .note = "allocation slope above top value"});
      }
    }
    const Num& g1 = grid.value(i, 0);
    if (NumTraits<Num>::is_positive(g1)) {
      for (std::size_t j = 0; j < K; ++j) {
        bottom.require_leq({.bidder = i, .profile = grid.unflatten(cell(0)), .deviation = j,
                            .lhs = detail::utility(mech, cell(j), i, g1), .rhs = Num(0),
                            .note = "true value just below " + to_string(g1)});
        bottom.require_leq({.bidder = i, .profile = grid.unflatten(cell(0)), .deviation = j,
                            .lhs = detail::utility(mech, cell(j), i, Num(0)), .rhs = Num(0),
                            .note = "true value 0"});
      }
    }
  });
  report.merge(std::move(next).finish());
  report.merge(std::move(top).finish());
  report.merge(std::move(bottom).finish());
  return report;
}

/// Recomputes both sides of an interim-mechanism witness from the mechanism.
template <class Num>
std::pair<Num, Num> replay_witness(const InterimMechanism<Num>& mech, const Witness<Num>& w) {
  const auto& grid = mech.grid();
  const auto& idx = grid.indexer();
  const std::size_t f = grid.flat(w.profile);
  if (w.check == "ir") {
    const std::size_t i = *w.bidder;
    return {mech.payment(f, i), Num(grid.value_at(f, i) * mech.allocation(f, i))};
  }
  if (w.check == "feasible") throw ContractError("feasibility witnesses replay via the certificate");
  const std::size_t i = *w.bidder;
  const std::size_t k = w.profile[i];
  const std::size_t fj = idx.with_digit(f, i, *w.deviation);
  if (w.check == "truthful") {
    const Num& v = grid.value(i, k);
    return {detail::utility(mech, f, i, v), detail::utility(mech, fj, i, v)};
  }
  if (w.check == "extension.below_next") {
    const Num& g = grid.value(i, k + 1);
    return {detail::utility(mech, f, i, g), detail::utility(mech, fj, i, g)};
  }
  if (w.check == "extension.above_top") {
    if (w.relation == "<=") return {mech.payment(f, i), mech.payment(fj, i)};
    return {mech.allocation(f, i), mech.allocation(fj, i)};
  }
  if (w.check == "extension.below_bottom") {
    Num v = w.note == "true value 0" ? Num(0) : grid.value(i, 0);
    return {detail::utility(mech, fj, i, v), Num(0)};
  }
  throw ContractError("cannot replay witness of check '" + w.check + "'");
}

/// A universally truthful mechanism: a lottery over deterministic parts,
/// each of which must pass check_truthful and check_extension.
template <class Num>
VerifyReport<Num> check_universal(
    const std::vector<std::pair<DeterministicMechanism<Num>, Num>>& parts) {
  if (parts.empty()) throw InputError("universal decomposition has no parts");
  Num total(0);
  for (const auto& [mech, prob] : parts) {
    if (!NumTraits<Num>::is_positive(prob)) throw InputError("part probability must be positive");
    if (!(mech.grid() == parts.front().first.grid())) throw DimensionError("parts use different grids");
    total += prob;
  }
  if (!NumTraits<Num>::equal(total, Num(1)))
    throw InputError("part probabilities sum to " + to_string(total));

  VerifyReport<Num> report;
  CheckSummary summary{.name = "universal", .convention_dependent = true};
  for (std::size_t k = 0; k < parts.size(); ++k) {
    auto sub = check_extension(parts[k].first.to_interim());
    for (auto& w : sub.witnesses) {
      w.part = k;
      report.witnesses.push_back(std::move(w));
    }
  }
  summary.witnesses = report.witnesses.size();
  summary.pass = report.witnesses.empty();
  report.pass = summary.pass;
  report.checks.push_back(std::move(summary));
  return report;
}

}  // namespace mechlab
