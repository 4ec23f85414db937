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

#include <gtest/gtest.h>

#include "mechlab/enumerate.hpp"
#include "mechlab/mechanisms.hpp"
#include "mechlab/verify.hpp"
#include "support.hpp"

namespace mechlab {
namespace {

using testing::Q;

ExplicitDistribution<Q> single(std::vector<std::pair<long, Q>> entries) {
  std::vector<std::pair<std::vector<Q>, Q>> rows;
  for (auto& [v, p] : entries) rows.push_back({{Q(v)}, p});
  return ExplicitDistribution<Q>::from_values(rows);
}

// Reference: brute force over every map grid -> feasible vector, keeping
// only monotone ones, with critical payments computed independently.
Q brute_force_deterministic(const ExplicitDistribution<Q>& d, const FeasibilitySystem& fs) {
  const auto& g = d.grid();
  const std::size_t cells = g.cells(), n = g.bidders();
  std::vector<std::size_t> choice(cells, 0);
  Q best(-1);
  while (true) {
    bool monotone = true;
    for (std::size_t f = 0; f < cells && monotone; ++f) {
      auto p = g.unflatten(f);
      for (std::size_t i = 0; i < n && monotone; ++i) {
        if (!fs.vector(choice[f])[i]) continue;
        for (std::size_t k = p[i] + 1; k < g.size(i); ++k) {
          auto q = p;
          q[i] = k;
          if (!fs.vector(choice[g.flat(q)])[i]) monotone = false;
        }
      }
    }
    if (monotone) {
      Q revenue(0);
      for (const auto& e : d.support()) {
        std::size_t f = g.flat(e.profile);
        for (std::size_t i = 0; i < n; ++i) {
          if (!fs.vector(choice[f])[i]) continue;
          Q lowest = g.value(i, e.profile[i]);
          for (std::size_t k = 0; k < e.profile[i]; ++k) {
            auto q = e.profile;
            q[i] = k;
            if (fs.vector(choice[g.flat(q)])[i]) {
              lowest = g.value(i, k);
              break;
            }
          }
          revenue += e.probability * lowest;
        }
      }
      if (best < revenue) best = revenue;
    }
    std::size_t pos = cells;
    while (pos > 0 && ++choice[pos - 1] == fs.size()) choice[--pos] = 0;
    if (pos == 0) break;
  }
  return best;
}

TEST(EnumerateDeterministic, Examples) {
  auto fs1 = FeasibilitySystem::single_item(1);
  EXPECT_EQ(enumerate_deterministic_optimal(single({{1, Q(1, 2)}, {2, Q(1, 2)}}), fs1).revenue, Q(1));
  EXPECT_EQ(enumerate_deterministic_optimal(single({{5, Q(1)}}), fs1).revenue, Q(5));
  auto pair = enumerate_deterministic_optimal(testing::pair_instance(), FeasibilitySystem::single_item(2));
  EXPECT_EQ(pair.revenue, Q(3, 2));
  EXPECT_EQ(expected_revenue(pair.mechanism.to_interim(), testing::pair_instance()), Q(3, 2));
}

TEST(EnumerateDeterministic, MatchesBruteForce) {
  testing::Rng rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    auto d = testing::random_distribution(rng, 2, 3);
    auto fs = FeasibilitySystem::single_item(2);
    auto r = enumerate_deterministic_optimal(d, fs);
    EXPECT_EQ(r.revenue, brute_force_deterministic(d, fs));
    EXPECT_EQ(expected_revenue(r.mechanism.to_interim(), d), r.revenue);
  }
}

TEST(EnumerateDeterministic, GeneralFeasibilityMatchesBruteForce) {
  testing::Rng rng(42);
  FeasibilitySystem fs(2, {{0, 0}, {1, 1}, {1, 0}});
  for (int trial = 0; trial < 10; ++trial) {
    auto d = testing::random_distribution(rng, 2, 2);
    auto r = enumerate_deterministic_optimal(d, fs);
    EXPECT_EQ(r.revenue, brute_force_deterministic(d, fs));
    EXPECT_TRUE(check_truthful(r.mechanism.to_interim()).pass);
  }
}

TEST(EnumerateDeterministic, OutputsPassTruthfulAndExtension) {
  testing::Rng rng(43);
  for (int trial = 0; trial < 25; ++trial) {
    auto d = testing::random_distribution(rng, 2, 3);
    auto r = enumerate_deterministic_optimal(d, FeasibilitySystem::single_item(2));
    auto rep = check_extension(r.mechanism.to_interim());
    EXPECT_TRUE(rep.pass);
  }
}

TEST(EnumerateDeterministic, OverchargeCreatesTruthfulViolation) {
  testing::Rng rng(44);
  auto fs = FeasibilitySystem::single_item(2);
  int probes = 0;
  for (int trial = 0; trial < 30; ++trial) {
    auto d = testing::random_distribution(rng, 2, 3);
    auto m = enumerate_deterministic_optimal(d, fs).mechanism.to_interim();
    const auto& g = m.grid();
    for (std::size_t f = 0; f < g.cells(); ++f)
      for (std::size_t i = 0; i < 2; ++i) {
        if (m.allocation(f, i) != 1) continue;
        // Raising the charge is only a violation if a cheaper own report exists.
        auto p = g.unflatten(f);
        bool lower_alternative = p[i] > 0;
        if (!lower_alternative) continue;
        auto probe = m;
        probe.set_payment(f, i, Q(m.payment(f, i) + Q(1, 7)));
        EXPECT_FALSE(check_truthful(probe).pass);
        ++probes;
      }
  }
  EXPECT_GT(probes, 0);
}

TEST(EnumerateDeterministic, SerialAndThreadedAgree) {
  testing::Rng rng(45);
  for (int trial = 0; trial < 10; ++trial) {
    auto d = testing::random_distribution(rng, 2, 3);
    auto fs = FeasibilitySystem::single_item(2);
    auto serial = enumerate_deterministic_optimal(d, fs);
    auto threaded = enumerate_deterministic_optimal(d, fs, EnumLimits{.threads = 3});
    EXPECT_EQ(serial.revenue, threaded.revenue);
    EXPECT_EQ(serial.mechanism.choices(), threaded.mechanism.choices());
    EXPECT_EQ(serial.candidates, threaded.candidates);
  }
}

TEST(EnumerateDeterministic, LimitsAreEnforced) {
  auto d = testing::uniform_two_by_two();
  auto fs = FeasibilitySystem::single_item(2);
  EXPECT_THROW(enumerate_deterministic_optimal(d, fs, EnumLimits{.max_cells = 3}), SizeError);
  EXPECT_THROW(enumerate_deterministic_optimal(d, fs, EnumLimits{.max_candidates = 2}), SizeError);
  EXPECT_NO_THROW(enumerate_deterministic_optimal(d, fs));
}

TEST(CriticalPayment, Examples) {
  ValueGrid<Q> g({{Q(1), Q(2)}});
  auto fs = FeasibilitySystem::single_item(1);
  EXPECT_EQ(critical_payment(g, fs, {1, 1}, {1}, 0), Q(1));
  EXPECT_EQ(critical_payment(g, fs, {1, 1}, {0}, 0), Q(1));
  EXPECT_EQ(critical_payment(g, fs, {0, 1}, {1}, 0), Q(2));
  EXPECT_THROW(critical_payment(g, fs, {0, 1}, {0}, 0), ContractError);
}

TEST(CriticalPayment, VickreyWinnerFunctionOnTwoByTwo) {
  // Winner is the highest bidder, lowest index on ties. Critical values were
  // computed by hand: at (1,2) bidder 1 would lose the tie at (1,1), so its
  // threshold is its own value 2, not the second-highest value 1.
  auto d = testing::uniform_two_by_two();
  const auto& g = d.grid();
  auto fs = FeasibilitySystem::single_item(2);
  auto vick = vickrey(g);
  std::vector<std::size_t> choice = vick.choices();
  struct Row {
    Profile p;
    std::size_t winner;
    Q pay;
  };
  for (const Row& r : {Row{{0, 0}, 0, Q(1)}, Row{{0, 1}, 1, Q(2)}, Row{{1, 0}, 0, Q(1)}, Row{{1, 1}, 0, Q(2)}}) {
    EXPECT_TRUE(vick.wins(g.flat(r.p), r.winner));
    EXPECT_EQ(critical_payment(g, fs, choice, r.p, r.winner), r.pay);
  }
  EXPECT_EQ(vickrey_grid_threshold(g).choices(), choice);
}

}  // namespace
}  // namespace mechlab
