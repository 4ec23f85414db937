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
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "mechlab/error.hpp"
#include "mechlab/numeric.hpp"

namespace mechlab {

/// A bid profile as one grid index per bidder. Values are recovered through
/// the owning grid; indices make lexicographic ordering and table lookup
/// canonical.
using Profile = std::vector<std::size_t>;

/// Mixed-radix indexer over a product of finite sets. Coordinate 0 is the
/// most significant digit, so flat order is lexicographic order.
class ProfileIndexer {
 public:
  ProfileIndexer() = default;
  explicit ProfileIndexer(std::vector<std::size_t> radix) : radix_(std::move(radix)) {
    strides_.assign(radix_.size(), 1);
    std::size_t total = 1;
    for (std::size_t i = radix_.size(); i-- > 0;) {
      strides_[i] = total;
      if (radix_[i] == 0) throw InputError("empty coordinate set");
      if (total > std::numeric_limits<std::size_t>::max() / radix_[i])
        throw SizeError("profile space too large to index");
      total *= radix_[i];
    }
    cells_ = total;
  }

  std::size_t dims() const { return radix_.size(); }
  std::size_t radix(std::size_t i) const { return radix_[i]; }
  std::size_t stride(std::size_t i) const { return strides_[i]; }
  std::size_t cells() const { return cells_; }

  std::size_t flat(const Profile& p) const {
    if (p.size() != radix_.size()) throw DimensionError("profile has wrong length");
    std::size_t f = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] >= radix_[i]) throw DimensionError("profile index out of range");
      f += p[i] * strides_[i];
    }
    return f;
  }

  Profile unflatten(std::size_t f) const {
    Profile p(radix_.size());
    for (std::size_t i = 0; i < radix_.size(); ++i) {
      p[i] = f / strides_[i];
      f %= strides_[i];
    }
    return p;
  }

  /// Coordinate i of the flat index f.
  std::size_t digit(std::size_t f, std::size_t i) const { return (f / strides_[i]) % radix_[i]; }

  /// Flat index of f with coordinate i replaced by k.
  std::size_t with_digit(std::size_t f, std::size_t i, std::size_t k) const {
    return f - digit(f, i) * strides_[i] + k * strides_[i];
  }

  bool operator==(const ProfileIndexer& o) const { return radix_ == o.radix_; }

 private:
  std::vector<std::size_t> radix_;
  std::vector<std::size_t> strides_;
  std::size_t cells_ = 0;
};

/// Per-bidder candidate values V_1..V_n, each strictly increasing and >= 0.
template <class Num = Rational>
class ValueGrid {
 public:
  ValueGrid() = default;
  explicit ValueGrid(std::vector<std::vector<Num>> values) : values_(std::move(values)) {
    if (values_.empty()) throw InputError("grid needs at least one bidder");
    std::vector<std::size_t> radix;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      const auto& vi = values_[i];
      if (vi.empty()) throw InputError("bidder " + std::to_string(i) + " has no values");
      for (std::size_t k = 0; k < vi.size(); ++k) {
        if (NumTraits<Num>::is_negative(vi[k]))
          throw InputError("negative value for bidder " + std::to_string(i));
        if (k > 0 && !(vi[k - 1] < vi[k]))
          throw InputError("values of bidder " + std::to_string(i) + " not strictly increasing");
      }
      radix.push_back(vi.size());
    }
    indexer_ = ProfileIndexer(std::move(radix));
  }

  std::size_t bidders() const { return values_.size(); }
  std::size_t size(std::size_t i) const { return values_[i].size(); }
  const std::vector<Num>& values(std::size_t i) const { return values_[i]; }
  const std::vector<std::vector<Num>>& all_values() const { return values_; }
  const Num& value(std::size_t i, std::size_t k) const { return values_[i][k]; }
  const ProfileIndexer& indexer() const { return indexer_; }

  /// Number of profiles in V_1 x ... x V_n.
  std::size_t cells() const { return indexer_.cells(); }
  /// Sum_i |V_i|, the combined marginal support size.
  std::size_t combined_support() const {
    std::size_t s = 0;
    for (const auto& v : values_) s += v.size();
    return s;
  }

  std::optional<std::size_t> index_of(std::size_t i, const Num& v) const {
    const auto& vi = values_[i];
    for (std::size_t k = 0; k < vi.size(); ++k)
      if (NumTraits<Num>::equal(vi[k], v)) return k;
    return std::nullopt;
  }

  std::size_t flat(const Profile& p) const { return indexer_.flat(p); }
  Profile unflatten(std::size_t f) const { return indexer_.unflatten(f); }
  /// Value of bidder i at flat profile f.
  const Num& value_at(std::size_t f, std::size_t i) const {
    return values_[i][indexer_.digit(f, i)];
  }
  std::vector<Num> values_of(const Profile& p) const {
    std::vector<Num> out;
    out.reserve(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out.push_back(values_[i].at(p[i]));
    return out;
  }

  /// Looks up a profile given by values. Throws if any value is off-grid.
  Profile profile_of(const std::vector<Num>& vals) const {
    if (vals.size() != bidders()) throw DimensionError("profile has wrong length");
    Profile p(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
      auto k = index_of(i, vals[i]);
      if (!k) throw InputError("value " + to_string(vals[i]) + " not on grid of bidder " +
                               std::to_string(i));
      p[i] = *k;
    }
    return p;
  }

  ValueGrid scaled(const Num& c) const {
    auto v = values_;
    for (auto& row : v)
      for (auto& x : row) x = Num(x * c);
    return ValueGrid(std::move(v));
  }

  bool operator==(const ValueGrid& o) const { return values_ == o.values_; }

 private:
  std::vector<std::vector<Num>> values_;
  ProfileIndexer indexer_;
};

template <class To>
ValueGrid<To> grid_cast(const ValueGrid<Rational>& g) {
  std::vector<std::vector<To>> v;
  for (const auto& row : g.all_values()) {
    std::vector<To> r;
    for (const auto& x : row) r.push_back(NumTraits<To>::from_rational(x));
    v.push_back(std::move(r));
  }
  return ValueGrid<To>(std::move(v));
}

template <class Num = Rational>
struct SupportEntry {
  Profile profile;
  Num probability;
};

/// How a distribution's grid relates to its support.
enum class GridCoverage {
  kMarginalSupport,  // every grid value occurs in the support (the default model)
  kSuperset,         // grid may carry values of zero marginal mass
};

/// The joint value distribution as an enumerated support. Entries are kept
/// in lexicographic profile order.
template <class Num = Rational>
class ExplicitDistribution {
 public:
  ExplicitDistribution() = default;

  ExplicitDistribution(ValueGrid<Num> grid, std::vector<SupportEntry<Num>> support,
                       GridCoverage coverage = GridCoverage::kMarginalSupport)
      : grid_(std::move(grid)), support_(std::move(support)) {
    if (support_.empty()) throw InputError("empty support");
    std::sort(support_.begin(), support_.end(),
              [](const auto& a, const auto& b) { return a.profile < b.profile; });
    Num total(0);
    std::vector<std::vector<bool>> seen(grid_.bidders());
    for (std::size_t i = 0; i < grid_.bidders(); ++i) seen[i].assign(grid_.size(i), false);
    for (std::size_t e = 0; e < support_.size(); ++e) {
      const auto& entry = support_[e];
      grid_.flat(entry.profile);  // validates length and range
      if (e > 0 && support_[e - 1].profile == entry.profile)
        throw InputError("duplicate support profile");
      if (!NumTraits<Num>::is_positive(entry.probability) || Num(1) < entry.probability)
        throw InputError("support probability outside (0,1]");
      total += entry.probability;
      for (std::size_t i = 0; i < entry.profile.size(); ++i) seen[i][entry.profile[i]] = true;
    }
    if constexpr (NumTraits<Num>::kExact) {
      if (total != 1) throw InputError("probabilities sum to " + to_string(total) + ", not 1");
    } else {
      if (std::abs(total - 1.0) > 1e-12) throw InputError("probabilities do not sum to 1");
    }
    if (coverage == GridCoverage::kMarginalSupport) {
      for (std::size_t i = 0; i < seen.size(); ++i)
        for (std::size_t k = 0; k < seen[i].size(); ++k)
          if (!seen[i][k])
            throw InputError("grid value " + to_string(grid_.value(i, k)) + " of bidder " +
                             std::to_string(i) + " has no support mass");
    }
    dense_.assign(grid_.cells(), Num(0));
    for (const auto& entry : support_) dense_[grid_.flat(entry.profile)] = entry.probability;
  }

  /// Builds the distribution from value profiles; the grid is the set of
  /// marginal supports.
  static ExplicitDistribution from_values(
      const std::vector<std::pair<std::vector<Num>, Num>>& entries) {
    if (entries.empty()) throw InputError("empty support");
    std::size_t n = entries.front().first.size();
    std::vector<std::vector<Num>> values(n);
    for (const auto& [vals, prob] : entries) {
      if (vals.size() != n) throw DimensionError("support profiles differ in length");
      for (std::size_t i = 0; i < n; ++i) values[i].push_back(vals[i]);
    }
    for (auto& v : values) {
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
    }
    ValueGrid<Num> grid(std::move(values));
    std::vector<SupportEntry<Num>> support;
    for (const auto& [vals, prob] : entries) support.push_back({grid.profile_of(vals), prob});
    return ExplicitDistribution(std::move(grid), std::move(support));
  }

  const ValueGrid<Num>& grid() const { return grid_; }
  const std::vector<SupportEntry<Num>>& support() const { return support_; }
  /// Probability of the flat profile f (zero off the support).
  const Num& probability_at(std::size_t f) const { return dense_.at(f); }

  /// Same probabilities, every value multiplied by c.
  ExplicitDistribution scaled(const Num& c) const {
    return ExplicitDistribution(grid_.scaled(c), support_, GridCoverage::kSuperset);
  }

  bool operator==(const ExplicitDistribution& o) const {
    if (!(grid_ == o.grid_) || support_.size() != o.support_.size()) return false;
    for (std::size_t e = 0; e < support_.size(); ++e)
      if (support_[e].profile != o.support_[e].profile ||
          !(support_[e].probability == o.support_[e].probability))
        return false;
    return true;
  }

 private:
  ValueGrid<Num> grid_;
  std::vector<SupportEntry<Num>> support_;
  std::vector<Num> dense_;
};

template <class To>
ExplicitDistribution<To> distribution_cast(const ExplicitDistribution<Rational>& d) {
  std::vector<SupportEntry<To>> support;
  for (const auto& e : d.support())
    support.push_back({e.profile, NumTraits<To>::from_rational(e.probability)});
  return ExplicitDistribution<To>(grid_cast<To>(d.grid()), std::move(support),
                                  GridCoverage::kSuperset);
}

using AllocationVector = std::vector<std::uint8_t>;

/// Explicit set of feasible 0/1 allocation vectors. Randomized allocations
/// must lie in the convex hull of these vectors.
class FeasibilitySystem {
 public:
  FeasibilitySystem() = default;
  FeasibilitySystem(std::size_t n, std::vector<AllocationVector> vectors)
      : n_(n), vectors_(std::move(vectors)) {
    if (n_ == 0) throw InputError("feasibility system needs n >= 1");
    bool has_zero = false;
    for (std::size_t k = 0; k < vectors_.size(); ++k) {
      const auto& v = vectors_[k];
      if (v.size() != n_) throw DimensionError("feasible vector has wrong length");
      for (auto c : v)
        if (c > 1) throw InputError("feasible vectors must be 0/1");
      if (std::all_of(v.begin(), v.end(), [](auto c) { return c == 0; })) {
        has_zero = true;
        zero_index_ = k;
      }
      for (std::size_t j = 0; j < k; ++j)
        if (vectors_[j] == v) throw InputError("duplicate feasible vector");
    }
    if (!has_zero) throw InputError("feasibility system must contain the all-zero vector");
  }

  /// {0, e_1, ..., e_n} in that order: index 0 is "no sale", index i+1 sells
  /// to bidder i.
  static FeasibilitySystem single_item(std::size_t n) {
    std::vector<AllocationVector> vs;
    vs.emplace_back(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      AllocationVector e(n, 0);
      e[i] = 1;
      vs.push_back(std::move(e));
    }
    return FeasibilitySystem(n, std::move(vs));
  }

  std::size_t bidders() const { return n_; }
  std::size_t size() const { return vectors_.size(); }
  const AllocationVector& vector(std::size_t k) const { return vectors_.at(k); }
  const std::vector<AllocationVector>& vectors() const { return vectors_; }
  std::size_t zero_index() const { return zero_index_; }

  std::optional<std::size_t> index_of(const AllocationVector& v) const {
    for (std::size_t k = 0; k < vectors_.size(); ++k)
      if (vectors_[k] == v) return k;
    return std::nullopt;
  }

  /// Index of e_i, if present.
  std::optional<std::size_t> unit_index(std::size_t i) const {
    AllocationVector e(n_, 0);
    e[i] = 1;
    return index_of(e);
  }

  /// True iff the vector set is exactly {0, e_1, ..., e_n}.
  bool is_single_item() const {
    if (vectors_.size() != n_ + 1) return false;
    for (std::size_t i = 0; i < n_; ++i)
      if (!unit_index(i)) return false;
    return true;
  }

  bool operator==(const FeasibilitySystem& o) const {
    return n_ == o.n_ && vectors_ == o.vectors_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<AllocationVector> vectors_;
  std::size_t zero_index_ = 0;
};

/// Expected allocation x_i(v) and expected payment p_i(v) on the full grid.
template <class Num = Rational>
class InterimMechanism {
 public:
  InterimMechanism() = default;
  /// All-zero mechanism.
  explicit InterimMechanism(ValueGrid<Num> grid)
      : grid_(std::move(grid)),
        alloc_(grid_.cells() * grid_.bidders(), Num(0)),
        pay_(grid_.cells() * grid_.bidders(), Num(0)) {}

  const ValueGrid<Num>& grid() const { return grid_; }
  std::size_t bidders() const { return grid_.bidders(); }

  const Num& allocation(std::size_t f, std::size_t i) const { return alloc_.at(f * bidders() + i); }
  const Num& payment(std::size_t f, std::size_t i) const { return pay_.at(f * bidders() + i); }
  void set_allocation(std::size_t f, std::size_t i, Num v) { alloc_.at(f * bidders() + i) = std::move(v); }
  void set_payment(std::size_t f, std::size_t i, Num v) { pay_.at(f * bidders() + i) = std::move(v); }

  std::vector<Num> allocation_at(std::size_t f) const {
    return {alloc_.begin() + static_cast<std::ptrdiff_t>(f * bidders()),
            alloc_.begin() + static_cast<std::ptrdiff_t>((f + 1) * bidders())};
  }

  bool operator==(const InterimMechanism& o) const {
    return grid_ == o.grid_ && alloc_ == o.alloc_ && pay_ == o.pay_;
  }

 private:
  ValueGrid<Num> grid_;
  std::vector<Num> alloc_;
  std::vector<Num> pay_;
};

template <class Num = Rational>
struct Outcome {
  std::size_t vector = 0;  // index into the FeasibilitySystem
  std::vector<Num> payments;
  Num probability;
};

/// Per-profile lottery over (feasible vector, payment vector) outcomes.
///
/// Construction checks the lottery structure only. The losers-pay-zero rule
/// is a property checked by verify::check_expost_ir so that violating inputs
/// can still be loaded and diagnosed.
template <class Num = Rational>
class ExPostMechanism {
 public:
  using Lottery = std::vector<Outcome<Num>>;

  ExPostMechanism() = default;
  ExPostMechanism(ValueGrid<Num> grid, FeasibilitySystem fs, std::vector<Lottery> lotteries)
      : grid_(std::move(grid)), fs_(std::move(fs)), lotteries_(std::move(lotteries)) {
    if (fs_.bidders() != grid_.bidders()) throw DimensionError("feasibility/grid bidder mismatch");
    if (lotteries_.size() != grid_.cells()) throw DimensionError("one lottery per grid profile");
    for (const auto& lot : lotteries_) {
      if (lot.empty()) throw InputError("empty lottery");
      Num total(0);
      for (const auto& o : lot) {
        if (o.vector >= fs_.size()) throw InputError("outcome vector index out of range");
        if (o.payments.size() != grid_.bidders()) throw DimensionError("payment vector length");
        if (!NumTraits<Num>::is_positive(o.probability))
          throw InputError("outcome probability must be positive");
        total += o.probability;
      }
      if (!NumTraits<Num>::equal(total, Num(1)))
        throw InputError("outcome probabilities sum to " + to_string(total));
    }
  }

  const ValueGrid<Num>& grid() const { return grid_; }
  const FeasibilitySystem& feasibility() const { return fs_; }
  const Lottery& lottery(std::size_t f) const { return lotteries_.at(f); }
  const std::vector<Lottery>& lotteries() const { return lotteries_; }

 private:
  ValueGrid<Num> grid_;
  FeasibilitySystem fs_;
  std::vector<Lottery> lotteries_;
};

/// A 0/1 mechanism: one feasible vector per profile, non-winners pay 0.
template <class Num = Rational>
class DeterministicMechanism {
 public:
  DeterministicMechanism() = default;
  DeterministicMechanism(ValueGrid<Num> grid, FeasibilitySystem fs, std::vector<std::size_t> choice,
                         std::vector<Num> payments)
      : grid_(std::move(grid)), fs_(std::move(fs)), choice_(std::move(choice)),
        payments_(std::move(payments)) {
    if (fs_.bidders() != grid_.bidders()) throw DimensionError("feasibility/grid bidder mismatch");
    if (choice_.size() != grid_.cells()) throw DimensionError("one choice per grid profile");
    if (payments_.size() != grid_.cells() * grid_.bidders())
      throw DimensionError("payment table size");
    for (std::size_t f = 0; f < choice_.size(); ++f) {
      if (choice_[f] >= fs_.size()) throw InputError("choice index out of range");
      for (std::size_t i = 0; i < grid_.bidders(); ++i)
        if (!wins(f, i) && !NumTraits<Num>::is_zero(payment(f, i)))
          throw InputError("non-winner charged in deterministic mechanism");
    }
  }

  const ValueGrid<Num>& grid() const { return grid_; }
  const FeasibilitySystem& feasibility() const { return fs_; }
  std::size_t choice(std::size_t f) const { return choice_.at(f); }
  const std::vector<std::size_t>& choices() const { return choice_; }
  bool wins(std::size_t f, std::size_t i) const { return fs_.vector(choice_.at(f))[i] == 1; }
  const Num& payment(std::size_t f, std::size_t i) const {
    return payments_.at(f * grid_.bidders() + i);
  }

  InterimMechanism<Num> to_interim() const {
    InterimMechanism<Num> m(grid_);
    for (std::size_t f = 0; f < grid_.cells(); ++f)
      for (std::size_t i = 0; i < grid_.bidders(); ++i) {
        m.set_allocation(f, i, Num(wins(f, i) ? 1 : 0));
        m.set_payment(f, i, payment(f, i));
      }
    return m;
  }

  ExPostMechanism<Num> to_expost() const {
    std::vector<typename ExPostMechanism<Num>::Lottery> lots;
    for (std::size_t f = 0; f < grid_.cells(); ++f) {
      std::vector<Num> pay(grid_.bidders());
      for (std::size_t i = 0; i < grid_.bidders(); ++i) pay[i] = payment(f, i);
      lots.push_back({Outcome<Num>{choice_[f], std::move(pay), Num(1)}});
    }
    return ExPostMechanism<Num>(grid_, fs_, std::move(lots));
  }

 private:
  ValueGrid<Num> grid_;
  FeasibilitySystem fs_;
  std::vector<std::size_t> choice_;
  std::vector<Num> payments_;
};

/// Sum over the support of Pr[v] * sum_i p_i(v).
template <class Num>
Num expected_revenue(const InterimMechanism<Num>& mech, const ExplicitDistribution<Num>& dist) {
  if (!(mech.grid() == dist.grid())) throw DimensionError("mechanism and distribution grids differ");
  Num total(0);
  for (const auto& e : dist.support()) {
    std::size_t f = dist.grid().flat(e.profile);
    Num sum(0);
    for (std::size_t i = 0; i < mech.bidders(); ++i) sum += mech.payment(f, i);
    total += Num(e.probability * sum);
  }
  return total;
}

/// opt_revenue / mech_revenue. Both zero gives 1.
template <class Num>
Num approximation_ratio(const Num& mech_revenue, const Num& opt_revenue) {
  if (NumTraits<Num>::is_zero(mech_revenue)) {
    if (NumTraits<Num>::is_zero(opt_revenue)) return Num(1);
    throw UndefinedRatioError("mechanism revenue is zero while optimum is " +
                              to_string(opt_revenue));
  }
  return Num(opt_revenue / mech_revenue);
}

template <class Num>
InterimMechanism<Num> interim_of(const ExPostMechanism<Num>& mech) {
  const auto& grid = mech.grid();
  const auto& fs = mech.feasibility();
  InterimMechanism<Num> out(grid);
  for (std::size_t f = 0; f < grid.cells(); ++f) {
    for (std::size_t i = 0; i < grid.bidders(); ++i) {
      Num x(0), p(0);
      for (const auto& o : mech.lottery(f)) {
        if (fs.vector(o.vector)[i]) x += o.probability;
        p += Num(o.probability * o.payments[i]);
      }
      out.set_allocation(f, i, std::move(x));
      out.set_payment(f, i, std::move(p));
    }
  }
  return out;
}

/// Single-item ex-post form: bidder i wins w.p. x_i(v) and then pays
/// p_i(v)/x_i(v); the residual mass goes to "no sale" with zero payments.
template <class Num>
ExPostMechanism<Num> canonical_expost(const InterimMechanism<Num>& mech, const FeasibilitySystem& fs) {
  const auto& grid = mech.grid();
  if (fs.bidders() != grid.bidders()) throw DimensionError("feasibility/grid bidder mismatch");
  if (!fs.is_single_item()) throw ContractError("canonical_expost needs a single-item system");
  const std::size_t n = grid.bidders();
  std::vector<typename ExPostMechanism<Num>::Lottery> lots(grid.cells());
  for (std::size_t f = 0; f < grid.cells(); ++f) {
    std::vector<std::pair<std::size_t, Outcome<Num>>> outs;
    Num residual(1);
    for (std::size_t i = 0; i < n; ++i) {
      const Num& x = mech.allocation(f, i);
      const Num& p = mech.payment(f, i);
      if (NumTraits<Num>::is_negative(x))
        throw InputError("negative allocation at profile " + std::to_string(f));
      if (NumTraits<Num>::is_zero(x)) {
        if (!NumTraits<Num>::is_zero(p))
          throw NonRepresentableError("bidder " + std::to_string(i) +
                                      " is charged with zero allocation at profile " +
                                      std::to_string(f));
        continue;
      }
      std::vector<Num> pay(n, Num(0));
      pay[i] = Num(p / x);
      std::size_t k = *fs.unit_index(i);
      outs.push_back({k, Outcome<Num>{k, std::move(pay), x}});
      residual -= x;
    }
    if (NumTraits<Num>::is_negative(residual))
      throw InputError("allocation sums above 1 at profile " + std::to_string(f));
    if (NumTraits<Num>::is_positive(residual)) {
      std::size_t k = fs.zero_index();
      outs.push_back({k, Outcome<Num>{k, std::vector<Num>(n, Num(0)), residual}});
    }
    std::sort(outs.begin(), outs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [k, o] : outs) lots[f].push_back(std::move(o));
  }
  return ExPostMechanism<Num>(grid, fs, std::move(lots));
}

template <class Num = Rational>
struct ExecutionResult {
  std::size_t vector = 0;
  AllocationVector allocation;
  std::vector<Num> payments;
};

/// Runs an ex-post mechanism on arbitrary non-negative bids.
///
/// Each bid rounds down to the largest grid value <= bid. A bidder below their
/// lowest grid value is evaluated at that lowest value but cannot win: any
/// drawn outcome that would allocate to that bidder becomes the all-zero outcome.
/// Sampling is exact: a 53-bit uniform draw u/2^53 is compared to the
/// cumulative lottery mass.
template <class Num>
ExecutionResult<Num> execute(const ExPostMechanism<Num>& mech, const std::vector<Num>& bids,
                             std::uint64_t seed) {
  const auto& grid = mech.grid();
  const auto& fs = mech.feasibility();
  const std::size_t n = grid.bidders();
  if (bids.size() != n) throw DimensionError("bid vector has wrong length");

  Profile prof(n, 0);
  std::vector<bool> excluded(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& vi = grid.values(i);
    if (bids[i] < vi.front()) {
      excluded[i] = true;
      continue;
    }
    auto it = std::upper_bound(vi.begin(), vi.end(), bids[i]);
    prof[i] = static_cast<std::size_t>(std::distance(vi.begin(), it)) - 1;
  }

  const auto& lot = mech.lottery(grid.flat(prof));
  std::mt19937_64 rng(seed);
  const std::uint64_t draw = rng() >> 11;
  Rational unit(mpz_class(static_cast<unsigned long>(draw)), mpz_class(1) << 53);
  unit.canonicalize();
  const Num u = NumTraits<Num>::from_rational(unit);
  const Outcome<Num>* chosen = &lot.back();
  Num cumulative(0);
  for (const auto& o : lot) {
    cumulative += o.probability;
    if (u < cumulative) {
      chosen = &o;
      break;
    }
  }

  ExecutionResult<Num> out{chosen->vector, fs.vector(chosen->vector), chosen->payments};
  for (std::size_t i = 0; i < n; ++i) {
    if (excluded[i] && out.allocation[i]) {
      out.vector = fs.zero_index();
      out.allocation.assign(n, 0);
      out.payments.assign(n, Num(0));
      break;
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    if (excluded[i]) out.payments[i] = Num(0);
  return out;
}

}  // namespace mechlab
