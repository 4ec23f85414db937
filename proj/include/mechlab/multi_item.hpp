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
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mechlab/error.hpp"
#include "mechlab/lp.hpp"
#include "mechlab/model.hpp"
#include "mechlab/numeric.hpp"
#include "mechlab/verify.hpp"

namespace mechlab {

/// Bundle of items as a bitmask; bit j set means item j is included.
using Bundle = std::uint32_t;

inline constexpr std::size_t kMaxItems = 20;

/// Explicit bundle valuation over m items: one value per bundle, v(empty) = 0.
template <class Num = Rational>
class Valuation {
 public:
  Valuation() = default;
  Valuation(std::size_t items, std::vector<Num> table) : items_(items), table_(std::move(table)) {
    if (items_ > kMaxItems) throw SizeError("too many items for an explicit valuation table");
    if (table_.size() != (std::size_t{1} << items_))
      throw DimensionError("valuation table needs 2^m entries");
    if (!NumTraits<Num>::is_zero(table_[0])) throw InputError("empty bundle must have value 0");
    for (const auto& v : table_)
      if (NumTraits<Num>::is_negative(v)) throw InputError("bundle values must be non-negative");
  }

  /// Additive valuation from per-item values.
  static Valuation additive(const std::vector<Num>& item_values) {
    std::vector<Num> t(std::size_t{1} << item_values.size(), Num(0));
    for (std::size_t b = 0; b < t.size(); ++b)
      for (std::size_t j = 0; j < item_values.size(); ++j)
        if (b >> j & 1) t[b] += item_values[j];
    return Valuation(item_values.size(), std::move(t));
  }

  std::size_t items() const { return items_; }
  const Num& value(Bundle b) const { return table_.at(b); }
  const std::vector<Num>& table() const { return table_; }

  Valuation scaled(const Num& c) const {
    auto t = table_;
    for (auto& v : t) v = Num(v * c);
    return Valuation(items_, std::move(t));
  }

  bool operator==(const Valuation& o) const { return items_ == o.items_ && table_ == o.table_; }

 private:
  std::size_t items_ = 0;
  std::vector<Num> table_;
};

template <class Num = Rational>
struct TypeSupportEntry {
  Profile types;  // one type index per bidder
  Num probability;
};

/// Per-bidder type lists and an explicit support over type profiles.
template <class Num = Rational>
class MultiItemInstance {
 public:
  MultiItemInstance() = default;
  MultiItemInstance(std::size_t items, std::vector<std::vector<Valuation<Num>>> types,
                    std::vector<TypeSupportEntry<Num>> support)
      : items_(items), types_(std::move(types)), support_(std::move(support)) {
    if (types_.empty()) throw InputError("instance needs at least one bidder");
    std::vector<std::size_t> radix;
    for (const auto& list : types_) {
      if (list.empty()) throw InputError("bidder with empty type list");
      for (const auto& t : list)
        if (t.items() != items_) throw DimensionError("valuation item count mismatch");
      radix.push_back(list.size());
    }
    indexer_ = ProfileIndexer(std::move(radix));
    if (support_.empty()) throw InputError("empty support");
    std::sort(support_.begin(), support_.end(),
              [](const auto& a, const auto& b) { return a.types < b.types; });
    std::vector<std::vector<bool>> seen(types_.size());
    for (std::size_t i = 0; i < types_.size(); ++i) seen[i].assign(types_[i].size(), false);
    Num total(0);
    for (std::size_t e = 0; e < support_.size(); ++e) {
      indexer_.flat(support_[e].types);
      if (e > 0 && support_[e - 1].types == support_[e].types) throw InputError("duplicate support profile");
      if (!NumTraits<Num>::is_positive(support_[e].probability))
        throw InputError("support probability must be positive");
      total += support_[e].probability;
      for (std::size_t i = 0; i < types_.size(); ++i) seen[i][support_[e].types[i]] = true;
    }
    if (!NumTraits<Num>::equal(total, Num(1))) throw InputError("probabilities sum to " + to_string(total));
    for (std::size_t i = 0; i < seen.size(); ++i)
      for (std::size_t k = 0; k < seen[i].size(); ++k)
        if (!seen[i][k])
          throw InputError("type " + std::to_string(k) + " of bidder " + std::to_string(i) +
                           " never occurs in the support");
  }

  std::size_t items() const { return items_; }
  std::size_t bidders() const { return types_.size(); }
  const std::vector<Valuation<Num>>& types(std::size_t i) const { return types_.at(i); }
  const Valuation<Num>& type(std::size_t i, std::size_t k) const { return types_.at(i).at(k); }
  const std::vector<TypeSupportEntry<Num>>& support() const { return support_; }
  const ProfileIndexer& indexer() const { return indexer_; }
  std::size_t profiles() const { return indexer_.cells(); }

  MultiItemInstance scaled(const Num& c) const {
    auto t = types_;
    for (auto& list : t)
      for (auto& v : list) v = v.scaled(c);
    return MultiItemInstance(items_, std::move(t), support_);
  }

 private:
  std::size_t items_ = 0;
  std::vector<std::vector<Valuation<Num>>> types_;
  std::vector<TypeSupportEntry<Num>> support_;
  ProfileIndexer indexer_;
};

/// All (n+1)^m ways to give each item to nobody or to one bidder. Assignment
/// a encodes item j's owner as base-(n+1) digit j (0 = unassigned).
class AssignmentSpace {
 public:
  AssignmentSpace(std::size_t bidders, std::size_t items, std::size_t max_assignments) : n_(bidders), m_(items) {
    std::size_t count = 1;
    for (std::size_t j = 0; j < m_; ++j) {
      if (count > max_assignments / (n_ + 1))
        throw SizeError("(n+1)^m = " + describe() + " assignments exceed the cap of " +
                        std::to_string(max_assignments));
      count *= n_ + 1;
    }
    bundles_.assign(count * n_, 0);
    for (std::size_t a = 0; a < count; ++a) {
      std::size_t code = a;
      for (std::size_t j = 0; j < m_; ++j) {
        std::size_t owner = code % (n_ + 1);
        code /= n_ + 1;
        if (owner > 0) bundles_[a * n_ + owner - 1] |= Bundle{1} << j;
      }
    }
    count_ = count;
  }

  std::size_t size() const { return count_; }
  Bundle bundle(std::size_t a, std::size_t i) const { return bundles_[a * n_ + i]; }
  /// Owner of each item: 0 for none, otherwise bidder index + 1.
  std::vector<std::size_t> owners(std::size_t a) const {
    std::vector<std::size_t> out(m_);
    for (std::size_t j = 0; j < m_; ++j) {
      out[j] = a % (n_ + 1);
      a /= n_ + 1;
    }
    return out;
  }

 private:
  std::string describe() const {
    return std::to_string(n_ + 1) + "^" + std::to_string(m_);
  }

  std::size_t n_, m_;
  std::size_t count_ = 0;
  std::vector<Bundle> bundles_;
};

struct MultiSolveOptions {
  bool allow_negative_payments = false;
  /// Size guard on (n+1)^m.
  std::size_t max_assignments = 6561;
};

template <class Num = Rational>
struct AssignmentWeight {
  std::size_t assignment;
  Num probability;
};

/// Per type profile: a lottery over assignments and expected payments.
template <class Num = Rational>
struct MultiMechanism {
  std::size_t items = 0;
  std::size_t bidders = 0;
  std::vector<std::vector<AssignmentWeight<Num>>> lotteries;  // by flat type profile
  std::vector<Num> payments;                                   // flat profile * n + i
  const Num& payment(std::size_t f, std::size_t i) const { return payments.at(f * bidders + i); }
};

namespace detail {

template <class Num>
Num expected_bundle_value(const std::vector<AssignmentWeight<Num>>& lot, const AssignmentSpace& space,
                          const Valuation<Num>& val, std::size_t i) {
  Num s(0);
  for (const auto& w : lot) s += Num(w.probability * val.value(space.bundle(w.assignment, i)));
  return s;
}

struct MultiLayout {
  std::size_t profiles, assignments, bidders;
  std::size_t lambda(std::size_t f, std::size_t a) const { return f * assignments + a; }
  std::size_t payment(std::size_t f, std::size_t i) const {
    return profiles * assignments + f * bidders + i;
  }
};

}  // namespace detail

/// Revenue LP over assignment lotteries. Truthfulness-in-expectation is
/// imposed for every bidder, every t_{-i} in the product of the other type
/// lists and every ordered pair of own types; interim IR at every profile.
template <class Num>
LinearProgram<Num> build_multi_lp(const MultiItemInstance<Num>& inst, const MultiSolveOptions& opts = {}) {
  const std::size_t n = inst.bidders();
  AssignmentSpace space(n, inst.items(), opts.max_assignments);
  const auto& idx = inst.indexer();
  const detail::MultiLayout lay{inst.profiles(), space.size(), n};

  LinearProgram<Num> lp;
  for (std::size_t f = 0; f < lay.profiles; ++f)
    for (std::size_t a = 0; a < lay.assignments; ++a)
      lp.add_variable("lam_" + std::to_string(f) + "_" + std::to_string(a));
  const std::optional<Num> pay_lower =
      opts.allow_negative_payments ? std::nullopt : std::optional<Num>(Num(0));
  for (std::size_t f = 0; f < lay.profiles; ++f)
    for (std::size_t i = 0; i < n; ++i)
      lp.add_variable("p_" + std::to_string(f) + "_" + std::to_string(i), pay_lower);

  for (const auto& e : inst.support()) {
    std::size_t f = idx.flat(e.types);
    for (std::size_t i = 0; i < n; ++i) lp.set_objective(lay.payment(f, i), e.probability);
  }
  for (std::size_t f = 0; f < lay.profiles; ++f) {
    std::vector<Term<Num>> row;
    for (std::size_t a = 0; a < lay.assignments; ++a) row.push_back({lay.lambda(f, a), Num(1)});
    lp.add_constraint(std::move(row), Relation::kEqual, Num(1), "conv_" + std::to_string(f));
  }
  auto value_terms = [&](std::size_t f, std::size_t i, const Valuation<Num>& val, bool negate,
                         std::vector<Term<Num>>& out) {
    for (std::size_t a = 0; a < lay.assignments; ++a) {
      const Num& v = val.value(space.bundle(a, i));
      if (NumTraits<Num>::is_zero(v)) continue;
      out.push_back({lay.lambda(f, a), negate ? Num(-v) : v});
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t base = 0; base < lay.profiles; ++base) {
      if (idx.digit(base, i) != 0) continue;
      for (std::size_t t = 0; t < inst.types(i).size(); ++t) {
        for (std::size_t r = 0; r < inst.types(i).size(); ++r) {
          if (r == t) continue;
          const auto& val = inst.type(i, t);
          const std::size_t ft = idx.with_digit(base, i, t);
          const std::size_t fr = idx.with_digit(base, i, r);
          std::vector<Term<Num>> row;
          value_terms(fr, i, val, false, row);
          row.push_back({lay.payment(fr, i), Num(-1)});
          value_terms(ft, i, val, true, row);
          row.push_back({lay.payment(ft, i), Num(1)});
          lp.add_constraint(std::move(row), Relation::kLessEqual, Num(0),
                            "ic_" + std::to_string(i) + "_" + std::to_string(ft) + "_" + std::to_string(r));
        }
      }
    }
  }
  for (std::size_t f = 0; f < lay.profiles; ++f) {
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<Term<Num>> row{{lay.payment(f, i), Num(1)}};
      value_terms(f, i, inst.type(i, idx.digit(f, i)), true, row);
      lp.add_constraint(std::move(row), Relation::kLessEqual, Num(0),
                        "ir_" + std::to_string(f) + "_" + std::to_string(i));
    }
  }
  return lp;
}

template <class Num = Rational>
struct MultiResult {
  MultiMechanism<Num> mechanism;
  Num revenue;
};

template <class Num>
MultiResult<Num> solve_multi(const MultiItemInstance<Num>& inst, const MultiSolveOptions& opts = {}) {
  const std::size_t n = inst.bidders();
  AssignmentSpace space(n, inst.items(), opts.max_assignments);
  auto lp = build_multi_lp(inst, opts);
  auto sol = solve(lp);
  if (sol.status != LPStatus::kOptimal)
    throw std::logic_error(std::string("multi-item LP reported ") + to_string(sol.status));
  const detail::MultiLayout lay{inst.profiles(), space.size(), n};
  MultiMechanism<Num> mech;
  mech.items = inst.items();
  mech.bidders = n;
  mech.lotteries.resize(lay.profiles);
  mech.payments.assign(lay.profiles * n, Num(0));
  for (std::size_t f = 0; f < lay.profiles; ++f) {
    for (std::size_t a = 0; a < lay.assignments; ++a) {
      const Num& w = sol.values[lay.lambda(f, a)];
      if (NumTraits<Num>::is_positive(w)) mech.lotteries[f].push_back({a, w});
    }
    for (std::size_t i = 0; i < n; ++i) mech.payments[f * n + i] = sol.values[lay.payment(f, i)];
  }
  return MultiResult<Num>{std::move(mech), sol.objective};
}

template <class Num>
Num expected_revenue(const MultiMechanism<Num>& mech, const MultiItemInstance<Num>& inst) {
  Num total(0);
  for (const auto& e : inst.support()) {
    std::size_t f = inst.indexer().flat(e.types);
    Num s(0);
    for (std::size_t i = 0; i < inst.bidders(); ++i) s += mech.payment(f, i);
    total += Num(e.probability * s);
  }
  return total;
}

/// Max expected welfare over assignment lotteries, solved with the same
/// enumeration (lambda variables only, welfare objective).
template <class Num>
Num max_expected_welfare(const MultiItemInstance<Num>& inst, const MultiSolveOptions& opts = {}) {
  const std::size_t n = inst.bidders();
  AssignmentSpace space(n, inst.items(), opts.max_assignments);
  const auto& idx = inst.indexer();
  LinearProgram<Num> lp;
  std::vector<std::size_t> first_var(inst.support().size());
  for (std::size_t e = 0; e < inst.support().size(); ++e) {
    const auto& entry = inst.support()[e];
    const std::size_t f = idx.flat(entry.types);
    std::vector<Term<Num>> conv;
    for (std::size_t a = 0; a < space.size(); ++a) {
      std::size_t v = lp.add_variable("lam_" + std::to_string(f) + "_" + std::to_string(a));
      Num welfare(0);
      for (std::size_t i = 0; i < n; ++i) welfare += inst.type(i, entry.types[i]).value(space.bundle(a, i));
      lp.set_objective(v, Num(entry.probability * welfare));
      conv.push_back({v, Num(1)});
    }
    lp.add_constraint(std::move(conv), Relation::kEqual, Num(1));
  }
  auto sol = solve(lp);
  if (sol.status != LPStatus::kOptimal) throw std::logic_error("welfare LP not optimal");
  return sol.objective;
}

/// Replays the LP's inequality forms on a solved multi-item mechanism:
/// lottery validity, IC over the full type product, interim IR, and (unless
/// negative payments are allowed) payment sign. Profiles are type indices.
template <class Num>
VerifyReport<Num> verify_multi(const MultiMechanism<Num>& mech, const MultiItemInstance<Num>& inst,
                               const MultiSolveOptions& opts = {}) {
  const std::size_t n = inst.bidders();
  if (mech.bidders != n || mech.items != inst.items() || mech.lotteries.size() != inst.profiles())
    throw DimensionError("mechanism does not match instance");
  AssignmentSpace space(n, inst.items(), opts.max_assignments);
  const auto& idx = inst.indexer();

  detail::ReportBuilder<Num> lot_check("multi.lottery");
  for (std::size_t f = 0; f < inst.profiles(); ++f) {
    Num total(0);
    for (const auto& w : mech.lotteries[f]) {
      if (w.assignment >= space.size()) throw InputError("assignment index out of range");
      lot_check.require_geq({.profile = idx.unflatten(f), .lhs = w.probability, .rhs = Num(0)});
      total += w.probability;
    }
    lot_check.require_eq({.profile = idx.unflatten(f), .lhs = total, .rhs = Num(1),
                          .note = "lottery mass"});
  }

  auto value_at = [&](std::size_t f, std::size_t i, const Valuation<Num>& val) {
    return detail::expected_bundle_value(mech.lotteries[f], space, val, i);
  };

  detail::ReportBuilder<Num> ic("multi.truthful");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t base = 0; base < inst.profiles(); ++base) {
      if (idx.digit(base, i) != 0) continue;
      for (std::size_t t = 0; t < inst.types(i).size(); ++t)
        for (std::size_t r = 0; r < inst.types(i).size(); ++r) {
          if (r == t) continue;
          const auto& val = inst.type(i, t);
          std::size_t ft = idx.with_digit(base, i, t), fr = idx.with_digit(base, i, r);
          ic.require_geq({.bidder = i, .profile = idx.unflatten(ft), .deviation = r,
                          .lhs = Num(value_at(ft, i, val) - mech.payment(ft, i)),
                          .rhs = Num(value_at(fr, i, val) - mech.payment(fr, i))});
        }
    }

  detail::ReportBuilder<Num> ir("multi.ir");
  detail::ReportBuilder<Num> sign("multi.payment_sign");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < inst.profiles(); ++f) {
      ir.require_leq({.bidder = i, .profile = idx.unflatten(f), .lhs = mech.payment(f, i),
                      .rhs = value_at(f, i, inst.type(i, idx.digit(f, i)))});
      if (!opts.allow_negative_payments)
        sign.require_geq({.bidder = i, .profile = idx.unflatten(f), .lhs = mech.payment(f, i),
                          .rhs = Num(0)});
    }

  auto report = std::move(lot_check).finish();
  report.merge(std::move(ic).finish());
  report.merge(std::move(ir).finish());
  if (!opts.allow_negative_payments) report.merge(std::move(sign).finish());
  return report;
}

template <class Num = Rational>
struct ChargedAssignment {
  std::size_t assignment;
  Num probability;
  std::vector<Num> charges;  // per bidder
};

/// Ex-post form charging bidder i in proportion to the value of the bundle
/// they receive: charge = v(S_i(A)) * p_i / E[v(S_i)]. Bidders receiving the
/// empty bundle are never charged.
template <class Num>
std::vector<std::vector<ChargedAssignment<Num>>> multi_expost(const MultiMechanism<Num>& mech,
                                                              const MultiItemInstance<Num>& inst,
                                                              const MultiSolveOptions& opts = {}) {
  const std::size_t n = inst.bidders();
  AssignmentSpace space(n, inst.items(), opts.max_assignments);
  const auto& idx = inst.indexer();
  std::vector<std::vector<ChargedAssignment<Num>>> out(inst.profiles());
  for (std::size_t f = 0; f < inst.profiles(); ++f) {
    std::vector<std::optional<Num>> ratio(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& val = inst.type(i, idx.digit(f, i));
      Num denom = detail::expected_bundle_value(mech.lotteries[f], space, val, i);
      if (NumTraits<Num>::is_zero(denom)) {
        if (!NumTraits<Num>::is_zero(mech.payment(f, i)))
          throw NonRepresentableError("bidder " + std::to_string(i) + " pays " +
                                      to_string(mech.payment(f, i)) +
                                      " with zero expected bundle value at profile " + std::to_string(f));
      } else {
        ratio[i] = Num(mech.payment(f, i) / denom);
      }
    }
    for (const auto& w : mech.lotteries[f]) {
      ChargedAssignment<Num> c{w.assignment, w.probability, std::vector<Num>(n, Num(0))};
      for (std::size_t i = 0; i < n; ++i) {
        Bundle b = space.bundle(w.assignment, i);
        if (b == 0 || !ratio[i]) continue;
        c.charges[i] = Num(inst.type(i, idx.digit(f, i)).value(b) * *ratio[i]);
      }
      out[f].push_back(std::move(c));
    }
  }
  return out;
}

/// Single-item distribution as a one-item instance: type k of bidder i
/// values the item at V_i[k].
template <class Num>
MultiItemInstance<Num> as_multi_item(const ExplicitDistribution<Num>& dist) {
  const auto& grid = dist.grid();
  std::vector<std::vector<Valuation<Num>>> types(grid.bidders());
  for (std::size_t i = 0; i < grid.bidders(); ++i)
    for (const auto& v : grid.values(i)) types[i].push_back(Valuation<Num>(1, {Num(0), v}));
  std::vector<TypeSupportEntry<Num>> support;
  for (const auto& e : dist.support()) support.push_back({e.profile, e.probability});
  return MultiItemInstance<Num>(1, std::move(types), std::move(support));
}

}  // namespace mechlab
