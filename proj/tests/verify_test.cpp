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

#include "mechlab/mechanisms.hpp"
#include "mechlab/optimal.hpp"
#include "mechlab/verify.hpp"
#include "support.hpp"

namespace mechlab {
namespace {

using testing::frac;
using testing::Q;

ValueGrid<Q> two_by_two() { return testing::uniform_two_by_two().grid(); }

TEST(CheckTruthful, VickreyPasses) {
  testing::Rng rng(51);
  for (int trial = 0; trial < 10; ++trial) {
    auto g = testing::random_distribution(rng, 3, 3).grid();
    EXPECT_TRUE(check_truthful(vickrey(g).to_interim()).pass);
    EXPECT_TRUE(check_truthful(vickrey_grid_threshold(g).to_interim()).pass);
  }
}

TEST(CheckTruthful, FirstPriceFailsWithReplayableWitness) {
  auto g = two_by_two();
  auto m = first_price(g).to_interim();
  auto rep = check_truthful(m);
  ASSERT_FALSE(rep.pass);
  // Bidder with value 2 facing a bid of 1 gains 1 by reporting 1.
  bool found = false;
  for (const auto& w : rep.witnesses) {
    EXPECT_EQ(replay_witness(m, w), std::make_pair(w.lhs, w.rhs));
    if (*w.bidder == 0 && w.profile == Profile{1, 0} && *w.deviation == 0) {
      EXPECT_EQ(w.lhs, Q(0));
      EXPECT_EQ(w.rhs, Q(1));
      found = true;
    }
  }
  EXPECT_TRUE(found);
  EXPECT_FALSE(rep.checks.front().pass);
}

TEST(CheckTruthful, ZeroMechanismPasses) {
  auto rep = check_truthful(zero_mechanism(two_by_two()));
  EXPECT_TRUE(rep.pass);
  EXPECT_TRUE(rep.witnesses.empty());
}

TEST(CheckTruthful, FloatModeToleratesRoundoff) {
  ValueGrid<double> g({{1.0, 2.0}});
  InterimMechanism<double> m(g);
  m.set_allocation(0, 0, 0.1 + 0.2);
  m.set_payment(0, 0, 0.3);
  m.set_allocation(1, 0, 0.3);
  m.set_payment(1, 0, 0.3 - 1e-12);
  EXPECT_TRUE(check_truthful(m).pass);
  m.set_payment(1, 0, 0.2);
  EXPECT_FALSE(check_truthful(m).pass);
}

TEST(CheckIr, Examples) {
  ValueGrid<Q> g({{Q(3)}});
  InterimMechanism<Q> posted(g);
  posted.set_allocation(0, 0, Q(1));
  posted.set_payment(0, 0, Q(3));
  EXPECT_TRUE(check_ir(posted).pass);

  auto m = vickrey(two_by_two()).to_interim();
  m.set_payment(3, 0, Q(2 * m.allocation(3, 0) + 1));
  auto rep = check_ir(m);
  ASSERT_FALSE(rep.pass);
  ASSERT_EQ(rep.witnesses.size(), 1u);
  const auto& w = rep.witnesses[0];
  EXPECT_EQ(w.profile, (Profile{1, 1}));
  EXPECT_EQ(*w.bidder, 0u);
  EXPECT_EQ(Q(w.lhs - w.rhs), Q(1));
  EXPECT_EQ(replay_witness(m, w), std::make_pair(w.lhs, w.rhs));
}

TEST(CheckExpostIr, Examples) {
  auto g = two_by_two();
  auto fs = FeasibilitySystem::single_item(2);
  EXPECT_TRUE(check_expost_ir(canonical_expost(zero_mechanism(g), fs)).pass);

  std::vector<ExPostMechanism<Q>::Lottery> lots;
  for (std::size_t f = 0; f < g.cells(); ++f) lots.push_back({Outcome<Q>{1, {Q(0), Q(0)}, Q(1)}});
  lots[2] = {Outcome<Q>{1, {Q(1), Q(1)}, Q(1)}};  // bidder 1 loses but pays 1
  auto rep = check_expost_ir(ExPostMechanism<Q>(g, fs, lots));
  ASSERT_FALSE(rep.pass);
  ASSERT_EQ(rep.witnesses.size(), 1u);
  EXPECT_EQ(*rep.witnesses[0].bidder, 1u);
  EXPECT_EQ(rep.witnesses[0].lhs, Q(1));
  EXPECT_EQ(rep.witnesses[0].relation, "==");
}

TEST(CheckExpostIr, EquivalentToInterimIrUnderCanonicalForm) {
  testing::Rng rng(52);
  auto fs = FeasibilitySystem::single_item(2);
  int failing = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto d = testing::random_distribution(rng, 2, 3);
    auto m = testing::random_interim(rng, d.grid(), trial % 2 == 0);
    bool interim = check_ir(m).pass;
    EXPECT_EQ(check_expost_ir(canonical_expost(m, fs)).pass, interim);
    if (!interim) ++failing;
  }
  EXPECT_GT(failing, 0);
}

TEST(CheckFeasible, Examples) {
  auto g = two_by_two();
  auto fs = FeasibilitySystem::single_item(2);
  EXPECT_TRUE(check_feasible(vickrey(g).to_interim(), fs).pass);

  InterimMechanism<Q> over(g);
  over.set_allocation(2, 0, frac(4, 5));
  over.set_allocation(2, 1, frac(3, 5));
  auto rep = check_feasible(over, fs);
  ASSERT_FALSE(rep.pass);
  EXPECT_EQ(rep.witnesses.size(), 1u);
  EXPECT_EQ(rep.witnesses[0].profile, (Profile{1, 0}));

  FeasibilitySystem diag(2, {{1, 1}, {0, 0}});
  ValueGrid<Q> one({{Q(1)}, {Q(1)}});
  InterimMechanism<Q> on(one);
  on.set_allocation(0, 0, frac(3, 10));
  on.set_allocation(0, 1, frac(3, 10));
  EXPECT_TRUE(check_feasible(on, diag).pass);
  on.set_allocation(0, 1, frac(1, 5));
  EXPECT_FALSE(check_feasible(on, diag).pass);
}

TEST(CheckUniversal, Examples) {
  auto g = two_by_two();
  EXPECT_TRUE(check_universal<Q>({{vickrey_grid_threshold(g), Q(1)}}).pass);

  auto mixed = check_universal<Q>({{vickrey_grid_threshold(g), Q(1, 2)}, {first_price(g), Q(1, 2)}});
  ASSERT_FALSE(mixed.pass);
  for (const auto& w : mixed.witnesses) EXPECT_EQ(*w.part, 1u);

  EXPECT_TRUE(check_universal<Q>({{posted_price(g, {Q(1), Q(2)}), Q(1, 3)},
                                  {posted_price(g, {Q(2), Q(1)}), Q(2, 3)}})
                  .pass);
}

TEST(CheckUniversal, RejectsBadProbabilities) {
  auto g = two_by_two();
  EXPECT_THROW(check_universal<Q>({{vickrey_grid_threshold(g), Q(1, 2)}}), InputError);
  EXPECT_THROW(check_universal<Q>({{vickrey_grid_threshold(g), Q(0)}, {first_price(g), Q(1)}}), InputError);
  EXPECT_THROW(check_universal<Q>({}), InputError);
}

TEST(CheckExtension, PostedPricesPass) {
  testing::Rng rng(53);
  for (int trial = 0; trial < 15; ++trial) {
    auto g = testing::random_distribution(rng, 2, 3).grid();
    std::vector<Q> prices{g.value(0, testing::uniform(rng, 0, g.size(0) - 1)),
                          g.value(1, testing::uniform(rng, 0, g.size(1) - 1))};
    EXPECT_TRUE(check_extension(posted_price(g, prices).to_interim()).pass);
  }
}

TEST(CheckExtension, TextbookVickreyTieBreakFailsOffGrid) {
  // At (1,2) bidder 1 wins and pays 1, but with true value 1.5 it rounds
  // down to 1 and loses the tie to bidder 0.
  auto rep = check_extension(vickrey(two_by_two()).to_interim());
  EXPECT_TRUE(rep.checks.front().pass);  // grid IC holds
  EXPECT_FALSE(rep.pass);
}

TEST(CheckExtension, SubsidizedLowestTypeFailsBelowBottom) {
  // Single bidder on {1,2}: type 1 gets half the item for free, type 2 buys
  // it for 1. Grid IC holds (utilities 1/2 and 1) but a true value just
  // below 1 is mapped to the null outcome and would rather report 1.
  ValueGrid<Q> g({{Q(1), Q(2)}});
  InterimMechanism<Q> m(g);
  m.set_allocation(0, 0, Q(1, 2));
  m.set_allocation(1, 0, Q(1));
  m.set_payment(1, 0, Q(1));
  auto rep = check_extension(m);
  EXPECT_TRUE(rep.checks.front().pass);
  ASSERT_FALSE(rep.pass);
  bool bottom = false;
  for (const auto& w : rep.witnesses) {
    EXPECT_EQ(replay_witness(m, w), std::make_pair(w.lhs, w.rhs));
    if (w.check == "extension.below_bottom") bottom = true;
  }
  EXPECT_TRUE(bottom);
  for (const auto& c : rep.checks)
    if (c.name == "extension.below_bottom") { EXPECT_TRUE(c.convention_dependent); }
}

TEST(CheckExtension, ImpliesTruthful) {
  testing::Rng rng(54);
  for (int trial = 0; trial < 40; ++trial) {
    auto d = testing::random_distribution(rng, 2, 3);
    auto m = testing::random_interim(rng, d.grid(), true);
    if (check_extension(m).pass) { EXPECT_TRUE(check_truthful(m).pass); }
  }
}

TEST(Witnesses, OrderedByBidderProfileDeviation) {
  auto m = first_price(ValueGrid<Q>({{Q(1), Q(2), Q(3)}, {Q(1), Q(2), Q(3)}})).to_interim();
  auto rep = check_truthful(m);
  for (std::size_t k = 1; k < rep.witnesses.size(); ++k) {
    const auto& a = rep.witnesses[k - 1];
    const auto& b = rep.witnesses[k];
    auto key = [](const Witness<Q>& w) { return std::make_tuple(*w.bidder, w.profile, *w.deviation); };
    EXPECT_LT(key(a), key(b));
  }
}

TEST(Witnesses, ReplayReproducesRandomViolations) {
  testing::Rng rng(55);
  for (int trial = 0; trial < 30; ++trial) {
    auto d = testing::random_distribution(rng, 2, 3);
    auto m = testing::random_interim(rng, d.grid(), false);
    for (const auto& rep : {check_truthful(m), check_ir(m), check_extension(m)})
      for (const auto& w : rep.witnesses) {
        auto [lhs, rhs] = replay_witness(m, w);
        EXPECT_EQ(lhs, w.lhs);
        EXPECT_EQ(rhs, w.rhs);
        if (w.relation == ">=") { EXPECT_LT(lhs, rhs); }
        if (w.relation == "<=") { EXPECT_GT(lhs, rhs); }
      }
  }
}

TEST(Verify, OptimalOutputsPass) {
  testing::Rng rng(56);
  auto fs = FeasibilitySystem::single_item(2);
  for (int trial = 0; trial < 10; ++trial) {
    auto r = solve_optimal(testing::random_distribution(rng, 2, 3), fs);
    EXPECT_TRUE(check_truthful(r.interim).pass);
    EXPECT_TRUE(check_ir(r.interim).pass);
    EXPECT_TRUE(check_feasible(r.interim, fs).pass);
  }
}

}  // namespace
}  // namespace mechlab
