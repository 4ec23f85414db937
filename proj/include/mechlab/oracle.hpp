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

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mechlab/error.hpp"
#include "mechlab/model.hpp"
#include "mechlab/numeric.hpp"

namespace mechlab {

enum class QueryKind { kPoint, kConditional };

/// Thread-safe query counters with an optional cap on the total. A query
/// either reserves a slot and is counted, or is rejected with BudgetError.
class QueryLedger {
 public:
  QueryLedger() = default;
  QueryLedger(const QueryLedger&) = delete;
  QueryLedger& operator=(const QueryLedger&) = delete;

  void charge(QueryKind kind, std::optional<std::uint64_t> cap = std::nullopt) {
    std::uint64_t cur = total_.load();
    do {
      if (cap && cur >= *cap)
        throw BudgetError("oracle query budget of " + std::to_string(*cap) + " exhausted");
    } while (!total_.compare_exchange_weak(cur, cur + 1));
    (kind == QueryKind::kPoint ? point_ : conditional_).fetch_add(1);
  }

  std::uint64_t point_queries() const { return point_.load(); }
  std::uint64_t conditional_queries() const { return conditional_.load(); }
  std::uint64_t total() const { return total_.load(); }

 private:
  std::atomic<std::uint64_t> point_{0};
  std::atomic<std::uint64_t> conditional_{0};
  std::atomic<std::uint64_t> total_{0};
};

/// 16 * (n + sum_i |V_i|)^2.
template <class Num>
std::uint64_t default_budget(const ValueGrid<Num>& grid) {
  const std::uint64_t s = grid.bidders() + grid.combined_support();
  return 16 * s * s;
}

/// Query access to a joint distribution over a known grid of marginal
/// supports. Every answered query is charged to the ledger.
template <class Num = Rational>
class DistributionOracle {
 public:
  virtual ~DistributionOracle() = default;

  /// V_1..V_n. Free of charge.
  virtual const ValueGrid<Num>& marginal_supports() const = 0;

  /// Pr[a_1=v_1, ..., a_n=v_n].
  Num query_point(const Profile& profile) const {
    check_profile(profile);
    charge(QueryKind::kPoint);
    return answer_point(profile);
  }

  /// Pr[a_i=v_i | a_S=v_S] with indices into the grid; i must not be in S.
  Num query_conditional(std::size_t i, std::size_t vi, const std::vector<std::size_t>& subset,
                        const std::vector<std::size_t>& subset_values) const {
    const auto& grid = marginal_supports();
    if (i >= grid.bidders() || vi >= grid.size(i)) throw InputError("conditional target off grid");
    if (subset.size() != subset_values.size()) throw DimensionError("subset and values differ in length");
    for (std::size_t k = 0; k < subset.size(); ++k) {
      if (subset[k] == i) throw ContractError("conditioning set contains the queried bidder");
      if (subset[k] >= grid.bidders() || subset_values[k] >= grid.size(subset[k]))
        throw InputError("conditioning value off grid");
      for (std::size_t l = 0; l < k; ++l)
        if (subset[l] == subset[k]) throw InputError("conditioning set repeats a bidder");
    }
    charge(QueryKind::kConditional);
    return answer_conditional(i, vi, subset, subset_values);
  }

  const std::shared_ptr<QueryLedger>& ledger() const { return ledger_; }

 protected:
  explicit DistributionOracle(std::shared_ptr<QueryLedger> ledger) : ledger_(std::move(ledger)) {}

  virtual void charge(QueryKind kind) const { ledger_->charge(kind); }
  virtual Num answer_point(const Profile& profile) const = 0;
  virtual Num answer_conditional(std::size_t i, std::size_t vi, const std::vector<std::size_t>& subset,
                                 const std::vector<std::size_t>& subset_values) const = 0;

  static Num forward_point(const DistributionOracle& o, const Profile& p) { return o.answer_point(p); }
  static Num forward_conditional(const DistributionOracle& o, std::size_t i, std::size_t vi,
                                 const std::vector<std::size_t>& s, const std::vector<std::size_t>& vs) {
    return o.answer_conditional(i, vi, s, vs);
  }

 private:
  void check_profile(const Profile& p) const { marginal_supports().flat(p); }

  std::shared_ptr<QueryLedger> ledger_;
};

/// Oracle answering from an explicit table.
template <class Num = Rational>
class ExplicitOracle final : public DistributionOracle<Num> {
 public:
  explicit ExplicitOracle(ExplicitDistribution<Num> dist)
      : DistributionOracle<Num>(std::make_shared<QueryLedger>()), dist_(std::move(dist)) {}

  const ValueGrid<Num>& marginal_supports() const override { return dist_.grid(); }

 protected:
  Num answer_point(const Profile& p) const override { return dist_.probability_at(dist_.grid().flat(p)); }

  Num answer_conditional(std::size_t i, std::size_t vi, const std::vector<std::size_t>& subset,
                         const std::vector<std::size_t>& subset_values) const override {
    Num joint(0), condition(0);
    for (const auto& e : dist_.support()) {
      bool match = true;
      for (std::size_t k = 0; k < subset.size() && match; ++k)
        match = e.profile[subset[k]] == subset_values[k];
      if (!match) continue;
      condition += e.probability;
      if (e.profile[i] == vi) joint += e.probability;
    }
    if (NumTraits<Num>::is_zero(condition))
      throw UndefinedConditionalError("conditioning event has probability zero");
    return Num(joint / condition);
  }

 private:
  ExplicitDistribution<Num> dist_;
};

/// Wrapper enforcing a cap on the total number of queries; shares the inner
/// oracle's ledger, so counts from both views agree.
template <class Num = Rational>
class BudgetedOracle final : public DistributionOracle<Num> {
 public:
  BudgetedOracle(std::shared_ptr<const DistributionOracle<Num>> inner, std::uint64_t budget)
      : DistributionOracle<Num>(inner->ledger()), inner_(std::move(inner)), budget_(budget) {}

  const ValueGrid<Num>& marginal_supports() const override { return inner_->marginal_supports(); }
  std::uint64_t budget() const { return budget_; }

 protected:
  void charge(QueryKind kind) const override { this->ledger()->charge(kind, budget_); }
  Num answer_point(const Profile& p) const override { return this->forward_point(*inner_, p); }
  Num answer_conditional(std::size_t i, std::size_t vi, const std::vector<std::size_t>& s,
                         const std::vector<std::size_t>& vs) const override {
    return this->forward_conditional(*inner_, i, vi, s, vs);
  }

 private:
  std::shared_ptr<const DistributionOracle<Num>> inner_;
  std::uint64_t budget_;
};

template <class Num>
std::shared_ptr<BudgetedOracle<Num>> with_budget(std::shared_ptr<const DistributionOracle<Num>> oracle,
                                                 std::uint64_t budget) {
  return std::make_shared<BudgetedOracle<Num>>(std::move(oracle), budget);
}

template <class Num>
const ValueGrid<Num>& marginal_supports(const DistributionOracle<Num>& oracle) {
  return oracle.marginal_supports();
}

/// Rebuilds the explicit distribution with exactly prod_i |V_i| point
/// queries, in lexicographic profile order.
template <class Num>
ExplicitDistribution<Num> materialize(const DistributionOracle<Num>& oracle) {
  const auto& grid = oracle.marginal_supports();
  std::vector<SupportEntry<Num>> support;
  for (std::size_t f = 0; f < grid.cells(); ++f) {
    Profile p = grid.unflatten(f);
    Num pr = oracle.query_point(p);
    if (NumTraits<Num>::is_positive(pr)) support.push_back({std::move(p), std::move(pr)});
  }
  return ExplicitDistribution<Num>(grid, std::move(support));
}

}  // namespace mechlab
