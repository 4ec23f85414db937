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
#include <optional>
#include <string>
#include <vector>

#include "mechlab/error.hpp"
#include "mechlab/lp.hpp"
#include "mechlab/model.hpp"
#include "mechlab/numeric.hpp"

namespace mechlab {

struct SolveOptions {
  /// Drops the p_i(v) >= 0 bound. IR still caps payments from above.
  bool allow_negative_payments = false;
};

template <class Num = Rational>
struct HullTerm {
  Num weight;
  std::size_t vector;  // index into the FeasibilitySystem

  bool operator==(const HullTerm&) const = default;
};

/// normal . F <= offset for every feasible F, while normal . x > offset.
template <class Num = Rational>
struct SeparatingHyperplane {
  std::vector<Num> normal;
  Num offset;
};

template <class Num = Rational>
struct HullDecomposition {
  bool in_hull = false;
  std::vector<HullTerm<Num>> terms;  // sorted by vector index, weights > 0
  std::optional<SeparatingHyperplane<Num>> certificate;
};

namespace detail {

template <class Num>
Num dot(const std::vector<Num>& a, const AllocationVector& f) {
  Num s(0);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (f[i]) s += a[i];
  return s;
}

template <class Num>
HullDecomposition<Num> decompose_single_item(const std::vector<Num>& x, const FeasibilitySystem& fs) {
  using T = NumTraits<Num>;
  const std::size_t n = x.size();
  HullDecomposition<Num> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (T::is_negative(x[i])) {
      std::vector<Num> normal(n, Num(0));
      normal[i] = Num(-1);
      out.certificate = SeparatingHyperplane<Num>{std::move(normal), Num(0)};
      return out;
    }
  }
  Num sum(0);
  for (const auto& xi : x) sum += xi;
  if (T::violates_geq(Num(1), sum)) {
    out.certificate = SeparatingHyperplane<Num>{std::vector<Num>(n, Num(1)), Num(1)};
    return out;
  }
  out.in_hull = true;
  for (std::size_t i = 0; i < n; ++i)
    if (T::is_positive(x[i])) out.terms.push_back({x[i], *fs.unit_index(i)});
  Num rest = Num(1) - sum;
  if (T::is_positive(rest)) out.terms.push_back({rest, fs.zero_index()});
  std::sort(out.terms.begin(), out.terms.end(),
            [](const auto& a, const auto& b) { return a.vector < b.vector; });
  return out;
}

}  // namespace detail

/// Decides x in conv(fs) via LP and, when it is, returns a basic (hence at
/// most n+1 term) convex combination; otherwise a separating hyperplane with
/// normal in [-1,1]^n. Works for any feasibility system.
template <class Num>
HullDecomposition<Num> decompose_allocation_lp(const std::vector<Num>& x, const FeasibilitySystem& fs) {
  using T = NumTraits<Num>;
  const std::size_t n = fs.bidders();
  if (x.size() != n) throw DimensionError("allocation has wrong length");
  HullDecomposition<Num> out;

  LinearProgram<Num> mix;
  for (std::size_t k = 0; k < fs.size(); ++k) mix.add_variable("mu" + std::to_string(k));
  {
    std::vector<Term<Num>> sum;
    for (std::size_t k = 0; k < fs.size(); ++k) sum.push_back({k, Num(1)});
    mix.add_constraint(std::move(sum), Relation::kEqual, Num(1), "convexity");
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<Term<Num>> row;
    for (std::size_t k = 0; k < fs.size(); ++k)
      if (fs.vector(k)[i]) row.push_back({k, Num(1)});
    mix.add_constraint(std::move(row), Relation::kEqual, x[i], "coord" + std::to_string(i));
  }
  auto sol = solve(mix);
  if (sol.status == LPStatus::kOptimal) {
    out.in_hull = true;
    for (std::size_t k = 0; k < fs.size(); ++k)
      if (T::is_positive(sol.values[k])) out.terms.push_back({sol.values[k], k});
    return out;
  }

  // Separation: max a.x - b  s.t.  a.F - b <= 0 for all F, a in [-1,1]^n.
  LinearProgram<Num> sep;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t v = sep.add_variable("a" + std::to_string(i), Num(-1), Num(1));
    sep.set_objective(v, x[i]);
  }
  std::size_t bvar = sep.add_variable("b", std::nullopt, std::nullopt);
  sep.set_objective(bvar, Num(-1));
  for (std::size_t k = 0; k < fs.size(); ++k) {
    std::vector<Term<Num>> row;
    for (std::size_t i = 0; i < n; ++i)
      if (fs.vector(k)[i]) row.push_back({i, Num(1)});
    row.push_back({bvar, Num(-1)});
    sep.add_constraint(std::move(row), Relation::kLessEqual, Num(0));
  }
  auto cert = solve(sep);
  if (cert.status != LPStatus::kOptimal || !T::is_positive(cert.objective))
    throw std::logic_error("hull separation LP produced no certificate");
  std::vector<Num> normal(cert.values.begin(), cert.values.begin() + static_cast<std::ptrdiff_t>(n));
  out.certificate = SeparatingHyperplane<Num>{std::move(normal), cert.values[bvar]};
  return out;
}

/// Convex decomposition of an allocation vector over the feasible vectors.
/// Single-item systems take a closed-form path; others go through an LP.
template <class Num>
HullDecomposition<Num> decompose_allocation(const std::vector<Num>& x, const FeasibilitySystem& fs) {
  if (x.size() != fs.bidders()) throw DimensionError("allocation has wrong length");
  if (fs.is_single_item()) return detail::decompose_single_item(x, fs);
  return decompose_allocation_lp(x, fs);
}

/// Variable layout of the optimal-mechanism LP: one convex weight per
/// (profile, feasible vector), then one payment per (profile, bidder).
struct OptimalLayout {
  std::size_t cells = 0;
  std::size_t vectors = 0;
  std::size_t bidders = 0;

  std::size_t lambda(std::size_t f, std::size_t k) const { return f * vectors + k; }
  std::size_t payment(std::size_t f, std::size_t i) const {
    return cells * vectors + f * bidders + i;
  }
  std::size_t variables() const { return cells * (vectors + bidders); }
};

/// LP whose optimum is the revenue of the best truthful-in-expectation,
/// interim-IR mechanism with allocations in conv(fs).
///
/// Rows are emitted in this order: one convexity equality per profile; IC
/// rows per bidder, per v_{-i}, per ordered pair (v_i, v'_i); IR rows per
/// profile and bidder. IC and IR cover the whole grid, not just the support.
template <class Num>
LinearProgram<Num> build_optimal_lp(const ExplicitDistribution<Num>& dist, const FeasibilitySystem& fs,
                                    const SolveOptions& opts = {}) {
  const auto& grid = dist.grid();
  const std::size_t n = grid.bidders();
  if (fs.bidders() != n) throw DimensionError("feasibility system and grid disagree on n");
  const OptimalLayout lay{grid.cells(), fs.size(), n};
  const auto& idx = grid.indexer();

  LinearProgram<Num> lp;
  for (std::size_t f = 0; f < lay.cells; ++f)
    for (std::size_t k = 0; k < lay.vectors; ++k)
      lp.add_variable("lam_" + std::to_string(f) + "_" + std::to_string(k));
  const std::optional<Num> pay_lower =
      opts.allow_negative_payments ? std::nullopt : std::optional<Num>(Num(0));
  for (std::size_t f = 0; f < lay.cells; ++f)
    for (std::size_t i = 0; i < n; ++i)
      lp.add_variable("p_" + std::to_string(f) + "_" + std::to_string(i), pay_lower);

  for (const auto& e : dist.support()) {
    std::size_t f = grid.flat(e.profile);
    for (std::size_t i = 0; i < n; ++i) lp.set_objective(lay.payment(f, i), e.probability);
  }

  for (std::size_t f = 0; f < lay.cells; ++f) {
    std::vector<Term<Num>> row;
    for (std::size_t k = 0; k < lay.vectors; ++k) row.push_back({lay.lambda(f, k), Num(1)});
    lp.add_constraint(std::move(row), Relation::kEqual, Num(1), "conv_" + std::to_string(f));
  }

  // value * x_i(f) as terms over lambda
  auto alloc_terms = [&](std::size_t f, std::size_t i, const Num& value, std::vector<Term<Num>>& out) {
    for (std::size_t k = 0; k < lay.vectors; ++k)
      if (fs.vector(k)[i]) out.push_back({lay.lambda(f, k), value});
  };

  // u_i(truth) >= u_i(report), written as report - truth <= 0
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t base = 0; base < lay.cells; ++base) {
      if (idx.digit(base, i) != 0) continue;  // one pass per v_{-i}
      for (std::size_t t = 0; t < grid.size(i); ++t) {
        for (std::size_t r = 0; r < grid.size(i); ++r) {
          if (t == r) continue;
          const std::size_t ft = idx.with_digit(base, i, t);
          const std::size_t fr = idx.with_digit(base, i, r);
          const Num& v = grid.value(i, t);
          std::vector<Term<Num>> row;
          alloc_terms(fr, i, v, row);
          row.push_back({lay.payment(fr, i), Num(-1)});
          alloc_terms(ft, i, Num(-v), row);
          row.push_back({lay.payment(ft, i), Num(1)});
          lp.add_constraint(std::move(row), Relation::kLessEqual, Num(0),
                            "ic_" + std::to_string(i) + "_" + std::to_string(ft) + "_" +
                                std::to_string(r));
        }
      }
    }
  }

  // p_i(v) - v_i x_i(v) <= 0
  for (std::size_t f = 0; f < lay.cells; ++f) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Term<Num>> row{{lay.payment(f, i), Num(1)}};
      alloc_terms(f, i, Num(-grid.value_at(f, i)), row);
      lp.add_constraint(std::move(row), Relation::kLessEqual, Num(0),
                        "ir_" + std::to_string(f) + "_" + std::to_string(i));
    }
  }
  return lp;
}

template <class Num = Rational>
struct OptimalResult {
  InterimMechanism<Num> interim;
  /// Absent only when negative payments are allowed and some bidder is paid
  /// at a profile where that bidder never wins (no losers-pay-zero ex-post form).
  std::optional<ExPostMechanism<Num>> expost;
  Num revenue;
};

/// Attaches interim payments to a decomposed lottery: bidder i pays
/// p_i(v)/x_i(v) in every outcome where bidder i wins and nothing otherwise.
template <class Num>
std::optional<ExPostMechanism<Num>> proportional_expost(const InterimMechanism<Num>& mech,
                                                        const FeasibilitySystem& fs) {
  const auto& grid = mech.grid();
  const std::size_t n = grid.bidders();
  std::vector<typename ExPostMechanism<Num>::Lottery> lots(grid.cells());
  for (std::size_t f = 0; f < grid.cells(); ++f) {
    auto dec = decompose_allocation(mech.allocation_at(f), fs);
    if (!dec.in_hull) throw InputError("allocation outside the feasible hull at profile " + std::to_string(f));
    std::vector<Num> charge(n, Num(0));
    for (std::size_t i = 0; i < n; ++i) {
      const Num& x = mech.allocation(f, i);
      const Num& p = mech.payment(f, i);
      if (NumTraits<Num>::is_zero(x)) {
        if (!NumTraits<Num>::is_zero(p)) return std::nullopt;
      } else {
        charge[i] = Num(p / x);
      }
    }
    for (const auto& term : dec.terms) {
      std::vector<Num> pay(n, Num(0));
      for (std::size_t i = 0; i < n; ++i)
        if (fs.vector(term.vector)[i]) pay[i] = charge[i];
      lots[f].push_back(Outcome<Num>{term.vector, std::move(pay), term.weight});
    }
  }
  return ExPostMechanism<Num>(grid, fs, std::move(lots));
}

/// Revenue-optimal truthful-in-expectation mechanism for `dist`.
template <class Num>
OptimalResult<Num> solve_optimal(const ExplicitDistribution<Num>& dist, const FeasibilitySystem& fs,
                                 const SolveOptions& opts = {}) {
  const auto& grid = dist.grid();
  const std::size_t n = grid.bidders();
  auto lp = build_optimal_lp(dist, fs, opts);
  auto sol = solve(lp);
  if (sol.status != LPStatus::kOptimal)
    throw std::logic_error(std::string("optimal-mechanism LP reported ") + to_string(sol.status));

  Num bound(0);
  for (const auto& e : dist.support()) {
    Num top(0);
    for (std::size_t i = 0; i < n; ++i) top += grid.value(i, grid.size(i) - 1);
    bound += Num(e.probability * top);
  }
  if (NumTraits<Num>::violates_geq(bound, sol.objective))
    throw std::logic_error("LP optimum exceeds the IR revenue bound");

  const OptimalLayout lay{grid.cells(), fs.size(), n};
  InterimMechanism<Num> interim(grid);
  for (std::size_t f = 0; f < lay.cells; ++f) {
    for (std::size_t i = 0; i < n; ++i) {
      Num x(0);
      for (std::size_t k = 0; k < lay.vectors; ++k)
        if (fs.vector(k)[i]) x += sol.values[lay.lambda(f, k)];
      interim.set_allocation(f, i, std::move(x));
      interim.set_payment(f, i, sol.values[lay.payment(f, i)]);
    }
  }
  auto expost = proportional_expost(interim, fs);
  return OptimalResult<Num>{std::move(interim), std::move(expost), sol.objective};
}

}  // namespace mechlab
