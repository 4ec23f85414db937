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

#include <algorithm>
#include <numeric>

#include "mechlab/lp.hpp"
#include "support.hpp"

namespace mechlab {
namespace {

using testing::frac;
using testing::Q;

TEST(Solve, SingleUpperBound) {
  LinearProgram<Q> lp;
  auto x = lp.add_variable("x");
  lp.set_objective(x, Q(1));
  lp.add_constraint({{x, Q(1)}}, Relation::kLessEqual, Q(3));
  auto s = solve(lp);
  ASSERT_EQ(s.status, LPStatus::kOptimal);
  EXPECT_EQ(s.values[x], Q(3));
  EXPECT_EQ(s.objective, Q(3));
}

TEST(Solve, ContradictoryBoundIsInfeasible) {
  LinearProgram<Q> lp;
  auto x = lp.add_variable("x");
  lp.set_objective(x, Q(1));
  lp.add_constraint({{x, Q(1)}}, Relation::kLessEqual, Q(-1));
  EXPECT_EQ(solve(lp).status, LPStatus::kInfeasible);
}

TEST(Solve, BindingSumConstraint) {
  LinearProgram<Q> lp;
  auto x = lp.add_variable("x");
  auto y = lp.add_variable("y");
  lp.set_objective(x, Q(1));
  lp.set_objective(y, Q(1));
  lp.add_constraint({{x, Q(1)}, {y, Q(1)}}, Relation::kLessEqual, Q(1));
  auto s = solve(lp);
  ASSERT_EQ(s.status, LPStatus::kOptimal);
  EXPECT_EQ(s.objective, Q(1));
}

TEST(Solve, Unbounded) {
  LinearProgram<Q> lp;
  auto x = lp.add_variable("x");
  auto y = lp.add_variable("y");
  lp.set_objective(x, Q(1));
  lp.add_constraint({{x, Q(1)}, {y, Q(-1)}}, Relation::kLessEqual, Q(2));
  EXPECT_EQ(solve(lp).status, LPStatus::kUnbounded);
}

TEST(Solve, FreeAndBoundedVariables) {
  // max -x + y  s.t. y <= x + 1/2, x free in [-3, inf), y <= 4
  LinearProgram<Q> lp;
  auto x = lp.add_variable("x", Q(-3));
  auto y = lp.add_variable("y", std::nullopt, Q(4));
  lp.set_objective(x, Q(-1));
  lp.set_objective(y, Q(1));
  lp.add_constraint({{y, Q(1)}, {x, Q(-1)}}, Relation::kLessEqual, Q(1, 2));
  auto s = solve(lp);
  ASSERT_EQ(s.status, LPStatus::kOptimal);
  EXPECT_EQ(s.objective, Q(1, 2));
  EXPECT_EQ(max_violation(lp, s.values), Q(0));
}

TEST(Solve, NegativeRightHandSideEquality) {
  LinearProgram<Q> lp;
  auto x = lp.add_variable("x", std::nullopt);
  auto y = lp.add_variable("y");
  lp.set_objective(y, Q(-1));
  lp.add_constraint({{x, Q(1)}, {y, Q(1)}}, Relation::kEqual, Q(-2));
  lp.add_constraint({{x, Q(1)}}, Relation::kLessEqual, Q(-5));
  auto s = solve(lp);
  ASSERT_EQ(s.status, LPStatus::kOptimal);
  // x = -2 - y <= -5 forces y >= 3
  EXPECT_EQ(s.objective, Q(-3));
  EXPECT_EQ(s.values[x], Q(-5));
}

TEST(Solve, RedundantEqualitiesAreDropped) {
  LinearProgram<Q> lp;
  auto x = lp.add_variable("x");
  auto y = lp.add_variable("y");
  lp.set_objective(x, Q(2));
  lp.set_objective(y, Q(1));
  lp.add_constraint({{x, Q(1)}, {y, Q(1)}}, Relation::kEqual, Q(1));
  lp.add_constraint({{x, Q(2)}, {y, Q(2)}}, Relation::kEqual, Q(2));
  auto s = solve(lp);
  ASSERT_EQ(s.status, LPStatus::kOptimal);
  EXPECT_EQ(s.objective, Q(2));
}

TEST(Solve, DegenerateCyclingExampleTerminates) {
  // Beale's classic cycling instance under the textbook largest-coefficient rule.
  LinearProgram<Q> lp;
  std::vector<std::size_t> v;
  for (int j = 0; j < 4; ++j) v.push_back(lp.add_variable("x" + std::to_string(j)));
  lp.set_objective(v[0], Q(3, 4));
  lp.set_objective(v[1], Q(-150));
  lp.set_objective(v[2], Q(1, 50));
  lp.set_objective(v[3], Q(-6));
  lp.add_constraint({{v[0], Q(1, 4)}, {v[1], Q(-60)}, {v[2], Q(-1, 25)}, {v[3], Q(9)}}, Relation::kLessEqual, Q(0));
  lp.add_constraint({{v[0], Q(1, 2)}, {v[1], Q(-90)}, {v[2], Q(-1, 50)}, {v[3], Q(3)}}, Relation::kLessEqual, Q(0));
  lp.add_constraint({{v[2], Q(1)}}, Relation::kLessEqual, Q(1));
  auto s = solve(lp);
  ASSERT_EQ(s.status, LPStatus::kOptimal);
  EXPECT_EQ(s.objective, Q(1, 20));
}

TEST(LinearProgram, Bookkeeping) {
  LinearProgram<Q> lp;
  auto a = lp.add_variable("a");
  auto b = lp.add_variable("b");
  EXPECT_THROW(lp.add_variable("a"), InputError);
  EXPECT_THROW(lp.add_variable("c", Q(2), Q(1)), InputError);
  lp.add_constraint({{b, Q(1)}, {a, Q(2)}, {b, Q(1)}}, Relation::kLessEqual, Q(1));
  EXPECT_THROW(lp.add_constraint({{7, Q(1)}}, Relation::kEqual, Q(0)), DimensionError);
  EXPECT_EQ(lp.coefficients(0), (std::vector<Q>{Q(2), Q(2)}));
  EXPECT_EQ(lp.constraints()[0].name, "r0");
  auto text = lp.to_lp_text();
  EXPECT_NE(text.find("2 a"), std::string::npos) << text;
}

TEST(LinearProgram, TextDumpUsesExactFractions) {
  LinearProgram<Q> lp;
  auto a = lp.add_variable("a");
  lp.set_objective(a, Q(3, 2));
  lp.add_constraint({{a, Q(1, 3)}}, Relation::kLessEqual, Q(5, 7), "cap");
  auto text = lp.to_lp_text();
  EXPECT_NE(text.find("3/2"), std::string::npos) << text;
  EXPECT_NE(text.find("1/3"), std::string::npos) << text;
  EXPECT_NE(text.find("5/7"), std::string::npos) << text;
  EXPECT_NE(text.find("cap"), std::string::npos) << text;
}

struct RandomLp {
  std::size_t vars;
  std::vector<std::vector<Q>> rows;
  std::vector<Q> rhs;
  std::vector<Q> cost;
};

// Feasible (0 is feasible) and bounded (every variable has a positive
// coefficient in a box row).
RandomLp random_lp(testing::Rng& rng) {
  RandomLp r;
  r.vars = testing::uniform(rng, 1, 4);
  std::size_t m = testing::uniform(rng, 1, 4);
  auto coef = [&] { return Q(static_cast<long>(testing::uniform(rng, 0, 8)) - 3); };
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<Q> row;
    for (std::size_t j = 0; j < r.vars; ++j) row.push_back(coef());
    r.rows.push_back(row);
    r.rhs.push_back(Q(static_cast<unsigned long>(testing::uniform(rng, 0, 6))));
  }
  std::vector<Q> box;
  for (std::size_t j = 0; j < r.vars; ++j) box.push_back(Q(static_cast<unsigned long>(testing::uniform(rng, 1, 3))));
  r.rows.push_back(box);
  r.rhs.push_back(Q(static_cast<unsigned long>(testing::uniform(rng, 1, 9))));
  for (std::size_t j = 0; j < r.vars; ++j) r.cost.push_back(coef());
  return r;
}

LinearProgram<Q> build(const RandomLp& r, const std::vector<std::size_t>& var_perm,
                       const std::vector<std::size_t>& row_perm) {
  LinearProgram<Q> lp;
  for (std::size_t j = 0; j < r.vars; ++j) lp.add_variable("v" + std::to_string(var_perm[j]));
  for (std::size_t j = 0; j < r.vars; ++j) lp.set_objective(j, r.cost[var_perm[j]]);
  for (auto k : row_perm) {
    std::vector<Term<Q>> terms;
    for (std::size_t j = 0; j < r.vars; ++j) terms.push_back({j, r.rows[k][var_perm[j]]});
    lp.add_constraint(terms, Relation::kLessEqual, r.rhs[k]);
  }
  return lp;
}

// Brute force over vertices: every choice of `vars` tight rows among the
// constraints and the bounds x_j >= 0, solved by Gaussian elimination.
Q vertex_oracle(const RandomLp& r) {
  const std::size_t n = r.vars;
  std::vector<std::vector<Q>> a = r.rows;
  std::vector<Q> b = r.rhs;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<Q> e(n, Q(0));
    e[j] = Q(-1);
    a.push_back(e);
    b.push_back(Q(0));
  }
  std::optional<Q> best;
  std::vector<bool> pick(a.size(), false);
  std::fill(pick.end() - static_cast<std::ptrdiff_t>(n), pick.end(), true);
  do {
    std::vector<std::vector<Q>> m;
    for (std::size_t k = 0; k < a.size(); ++k)
      if (pick[k]) {
        auto row = a[k];
        row.push_back(b[k]);
        m.push_back(row);
      }
    bool singular = false;
    for (std::size_t c = 0; c < n && !singular; ++c) {
      std::size_t p = c;
      while (p < n && m[p][c] == 0) ++p;
      if (p == n) {
        singular = true;
        break;
      }
      std::swap(m[p], m[c]);
      for (std::size_t k = 0; k < n; ++k) {
        if (k == c || m[k][c] == 0) continue;
        Q factor = m[k][c] / m[c][c];
        for (std::size_t t = c; t <= n; ++t) m[k][t] -= factor * m[c][t];
      }
    }
    if (singular) continue;
    std::vector<Q> x(n);
    for (std::size_t j = 0; j < n; ++j) x[j] = m[j][n] / m[j][j];
    bool ok = true;
    for (std::size_t k = 0; k < a.size() && ok; ++k) {
      Q lhs(0);
      for (std::size_t j = 0; j < n; ++j) lhs += a[k][j] * x[j];
      ok = lhs <= b[k];
    }
    if (!ok) continue;
    Q obj(0);
    for (std::size_t j = 0; j < n; ++j) obj += r.cost[j] * x[j];
    if (!best || *best < obj) best = obj;
  } while (std::next_permutation(pick.begin(), pick.end()));
  return *best;
}

TEST(SolveProperty, MatchesVertexEnumeration) {
  testing::Rng rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    auto r = random_lp(rng);
    std::vector<std::size_t> vp(r.vars), rp(r.rows.size());
    std::iota(vp.begin(), vp.end(), 0);
    std::iota(rp.begin(), rp.end(), 0);
    auto lp = build(r, vp, rp);
    auto s = solve(lp);
    ASSERT_EQ(s.status, LPStatus::kOptimal);
    EXPECT_EQ(s.objective, vertex_oracle(r)) << lp.to_lp_text();
    EXPECT_EQ(max_violation(lp, s.values), Q(0));
  }
}

TEST(SolveProperty, ValueIsPermutationInvariant) {
  testing::Rng rng(22);
  for (int trial = 0; trial < 40; ++trial) {
    auto r = random_lp(rng);
    std::vector<std::size_t> vp(r.vars), rp(r.rows.size());
    std::iota(vp.begin(), vp.end(), 0);
    std::iota(rp.begin(), rp.end(), 0);
    auto base = solve(build(r, vp, rp));
    std::shuffle(vp.begin(), vp.end(), rng);
    std::shuffle(rp.begin(), rp.end(), rng);
    auto perm = solve(build(r, vp, rp));
    ASSERT_EQ(perm.status, LPStatus::kOptimal);
    EXPECT_EQ(base.objective, perm.objective);
  }
}

TEST(SolveProperty, DeterministicOnIdenticalInput) {
  testing::Rng rng(23);
  auto r = random_lp(rng);
  std::vector<std::size_t> vp(r.vars), rp(r.rows.size());
  std::iota(vp.begin(), vp.end(), 0);
  std::iota(rp.begin(), rp.end(), 0);
  auto a = solve(build(r, vp, rp));
  auto b = solve(build(r, vp, rp));
  EXPECT_EQ(a.values, b.values);
  EXPECT_EQ(a.pivots, b.pivots);
}

TEST(SolveFloat, AgreesWithExactWithinTolerance) {
  testing::Rng rng(24);
  for (int trial = 0; trial < 30; ++trial) {
    auto r = random_lp(rng);
    std::vector<std::size_t> vp(r.vars), rp(r.rows.size());
    std::iota(vp.begin(), vp.end(), 0);
    std::iota(rp.begin(), rp.end(), 0);
    auto exact = build(r, vp, rp);
    LinearProgram<double> lp;
    for (std::size_t j = 0; j < exact.variable_count(); ++j) {
      lp.add_variable(exact.name(j));
      lp.set_objective(j, exact.objective()[j].get_d());
    }
    for (const auto& c : exact.constraints()) {
      std::vector<Term<double>> terms;
      for (const auto& t : c.terms) terms.push_back({t.var, t.coef.get_d()});
      lp.add_constraint(terms, c.relation, c.rhs.get_d());
    }
    auto s = solve(lp);
    ASSERT_EQ(s.status, LPStatus::kOptimal);
    EXPECT_NEAR(s.objective, solve(exact).objective.get_d(), 1e-9);
  }
}

}  // namespace
}  // namespace mechlab
