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
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "mechlab/model.hpp"
#include "mechlab/multi_item.hpp"

// Random instance generators and brute-force reference computations that do
// not go through the library's solvers.

namespace mechlab::testing {

using Q = Rational;
using Rng = std::mt19937_64;

/// Canonical a/b.
inline Q frac(long a, long b) {
  Q q(a, b);
  q.canonicalize();
  return q;
}

inline std::size_t uniform(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline std::vector<Q> random_values(Rng& rng, std::size_t count, std::size_t lo = 1, std::size_t hi = 9) {
  std::set<std::size_t> picked;
  while (picked.size() < count) picked.insert(uniform(rng, lo, hi));
  std::vector<Q> out;
  for (auto v : picked) out.push_back(Q(static_cast<unsigned long>(v)));
  return out;
}

/// Random positive weights normalized into exact probabilities.
inline std::vector<Q> random_probabilities(Rng& rng, std::size_t count) {
  std::vector<Q> w;
  Q total(0);
  for (std::size_t k = 0; k < count; ++k) {
    w.emplace_back(static_cast<unsigned long>(uniform(rng, 1, 12)));
    total += w.back();
  }
  for (auto& x : w) x /= total;
  return w;
}

/// Random distribution on a random grid where every grid value carries mass.
inline ExplicitDistribution<Q> random_distribution(Rng& rng, std::size_t bidders, std::size_t max_values,
                                                   std::size_t extra_profiles = 2) {
  std::vector<std::vector<Q>> values;
  for (std::size_t i = 0; i < bidders; ++i) values.push_back(random_values(rng, uniform(rng, 1, max_values)));
  ValueGrid<Q> grid(values);
  std::set<Profile> support;
  auto random_profile = [&] {
    Profile p(bidders);
    for (std::size_t i = 0; i < bidders; ++i) p[i] = uniform(rng, 0, grid.size(i) - 1);
    return p;
  };
  for (std::size_t e = 0; e < extra_profiles; ++e) support.insert(random_profile());
  for (std::size_t i = 0; i < bidders; ++i)
    for (std::size_t k = 0; k < grid.size(i); ++k) {
      bool covered = std::any_of(support.begin(), support.end(), [&](const Profile& p) { return p[i] == k; });
      if (covered) continue;
      Profile p = random_profile();
      p[i] = k;
      support.insert(p);
    }
  auto probs = random_probabilities(rng, support.size());
  std::vector<SupportEntry<Q>> entries;
  std::size_t k = 0;
  for (const auto& p : support) entries.push_back({p, probs[k++]});
  return ExplicitDistribution<Q>(grid, entries);
}

/// Best single-bidder posted price: max over grid prices r of r * Pr[v >= r].
inline Q best_posted_price_revenue(const ExplicitDistribution<Q>& dist) {
  const auto& grid = dist.grid();
  Q best(0);
  for (const auto& r : grid.values(0)) {
    Q mass(0);
    for (const auto& e : dist.support())
      if (!(grid.value(0, e.profile[0]) < r)) mass += e.probability;
    best = std::max(best, Q(r * mass));
  }
  return best;
}

/// Random interim mechanism on the single-item hull with losers paying 0.
/// With `ir` the payments satisfy p <= v x; otherwise payments are drawn up
/// to 2 v x, so IR typically fails somewhere.
inline InterimMechanism<Q> random_interim(Rng& rng, const ValueGrid<Q>& grid, bool ir) {
  InterimMechanism<Q> m(grid);
  const std::size_t n = grid.bidders();
  for (std::size_t f = 0; f < grid.cells(); ++f) {
    auto w = random_probabilities(rng, n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      Q x = uniform(rng, 0, 3) == 0 ? Q(0) : w[i];
      Q share = frac(static_cast<long>(uniform(rng, 0, 8)), 8);
      if (!ir) share *= 2;
      m.set_allocation(f, i, x);
      m.set_payment(f, i, Q(share * grid.value_at(f, i) * x));
    }
  }
  return m;
}

inline MultiItemInstance<Q> random_multi_instance(Rng& rng, std::size_t bidders, std::size_t items,
                                                  std::size_t max_types) {
  std::vector<std::vector<Valuation<Q>>> types(bidders);
  for (auto& list : types) {
    std::size_t count = uniform(rng, 1, max_types);
    for (std::size_t k = 0; k < count; ++k) {
      std::vector<Q> table(std::size_t{1} << items, Q(0));
      for (std::size_t b = 1; b < table.size(); ++b) table[b] = Q(static_cast<unsigned long>(uniform(rng, 0, 6)));
      list.emplace_back(items, table);
    }
  }
  std::vector<std::size_t> radix;
  for (const auto& l : types) radix.push_back(l.size());
  ProfileIndexer idx(radix);
  std::set<Profile> support;
  for (std::size_t i = 0; i < bidders; ++i)
    for (std::size_t k = 0; k < types[i].size(); ++k) {
      Profile p(bidders);
      for (std::size_t j = 0; j < bidders; ++j) p[j] = uniform(rng, 0, types[j].size() - 1);
      p[i] = k;
      support.insert(p);
    }
  auto probs = random_probabilities(rng, support.size());
  std::vector<TypeSupportEntry<Q>> entries;
  std::size_t k = 0;
  for (const auto& p : support) entries.push_back({p, probs[k++]});
  return MultiItemInstance<Q>(items, std::move(types), std::move(entries));
}

inline ExplicitDistribution<Q> pair_instance() {
  return ExplicitDistribution<Q>::from_values({{{Q(1), Q(1)}, Q(1, 2)}, {{Q(2), Q(2)}, Q(1, 2)}});
}

inline ExplicitDistribution<Q> uniform_two_by_two() {
  return ExplicitDistribution<Q>::from_values({{{Q(1), Q(1)}, Q(1, 4)},
                                               {{Q(1), Q(2)}, Q(1, 4)},
                                               {{Q(2), Q(1)}, Q(1, 4)},
                                               {{Q(2), Q(2)}, Q(1, 4)}});
}

}  // namespace mechlab::testing
