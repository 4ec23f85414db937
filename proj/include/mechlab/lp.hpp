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
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mechlab/error.hpp"
#include "mechlab/numeric.hpp"

namespace mechlab {

enum class Relation { kLessEqual, kEqual };

enum class LPStatus { kOptimal, kInfeasible, kUnbounded };

inline const char* to_string(LPStatus s) {
  switch (s) {
    case LPStatus::kOptimal: return "optimal";
    case LPStatus::kInfeasible: return "infeasible";
    case LPStatus::kUnbounded: return "unbounded";
  }
  return "?";
}

template <class Num = Rational>
struct Term {
  std::size_t var;
  Num coef;
};

/// A maximization LP with bounded variables and <= / = rows. Rows are stored
/// sparsely; coefficients() gives the dense view.
template <class Num = Rational>
class LinearProgram {
 public:
  struct Constraint {
    std::vector<Term<Num>> terms;  // sorted by variable, no zeros, no repeats
    Relation relation;
    Num rhs;
    std::string name;
  };

  /// Adds a variable with bounds; std::nullopt means infinite.
  std::size_t add_variable(std::string name, std::optional<Num> lower = Num(0),
                           std::optional<Num> upper = std::nullopt) {
    if (!names_seen_.insert(name).second) throw InputError("duplicate variable name '" + name + "'");
    if (lower && upper && *upper < *lower)
      throw InputError("variable '" + name + "' has empty bound interval");
    names_.push_back(std::move(name));
    lower_.push_back(std::move(lower));
    upper_.push_back(std::move(upper));
    objective_.push_back(Num(0));
    return names_.size() - 1;
  }

  void set_objective(std::size_t var, Num coef) { objective_.at(var) = std::move(coef); }

  void add_constraint(std::vector<Term<Num>> terms, Relation rel, Num rhs, std::string name = {}) {
    std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.var < b.var; });
    std::vector<Term<Num>> merged;
    for (auto& t : terms) {
      if (t.var >= names_.size()) throw DimensionError("constraint references unknown variable");
      if (!merged.empty() && merged.back().var == t.var)
        merged.back().coef += t.coef;
      else
        merged.push_back(std::move(t));
    }
    std::erase_if(merged, [](const auto& t) { return t.coef == Num(0); });
    if (name.empty()) name = "r" + std::to_string(constraints_.size());
    constraints_.push_back({std::move(merged), rel, std::move(rhs), std::move(name)});
  }

  std::size_t variable_count() const { return names_.size(); }
  const std::string& name(std::size_t j) const { return names_.at(j); }
  const std::optional<Num>& lower(std::size_t j) const { return lower_.at(j); }
  const std::optional<Num>& upper(std::size_t j) const { return upper_.at(j); }
  const std::vector<Num>& objective() const { return objective_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  std::vector<Num> coefficients(std::size_t row) const {
    std::vector<Num> dense(variable_count(), Num(0));
    for (const auto& t : constraints_.at(row).terms) dense[t.var] = t.coef;
    return dense;
  }

  std::size_t count(Relation rel) const {
    return static_cast<std::size_t>(std::count_if(
        constraints_.begin(), constraints_.end(), [&](const auto& c) { return c.relation == rel; }));
  }

  /// Human-readable dump with exact "p/q" coefficients.
  std::string to_lp_text() const {
    std::ostringstream os;
    auto linear = [&](const std::vector<Term<Num>>& terms) {
      if (terms.empty()) {
        os << "0";
        return;
      }
      bool first = true;
      for (const auto& t : terms) {
        std::string c = mechlab::to_string(t.coef);
        if (!first) {
          if (!c.empty() && c[0] == '-') {
            os << " - ";
            c.erase(0, 1);
          } else {
            os << " + ";
          }
        }
        os << c << " " << names_[t.var];
        first = false;
      }
    };
    os << "maximize\n  obj: ";
    std::vector<Term<Num>> obj;
    for (std::size_t j = 0; j < objective_.size(); ++j)
      if (!(objective_[j] == Num(0))) obj.push_back({j, objective_[j]});
    linear(obj);
    os << "\nsubject to\n";
    for (const auto& c : constraints_) {
      os << "  " << c.name << ": ";
      linear(c.terms);
      os << (c.relation == Relation::kEqual ? " = " : " <= ") << mechlab::to_string(c.rhs) << "\n";
    }
    os << "bounds\n";
    for (std::size_t j = 0; j < names_.size(); ++j) {
      os << "  ";
      if (!lower_[j] && !upper_[j]) {
        os << names_[j] << " free\n";
        continue;
      }
      os << (lower_[j] ? mechlab::to_string(*lower_[j]) : std::string("-inf")) << " <= "
         << names_[j];
      if (upper_[j]) os << " <= " << mechlab::to_string(*upper_[j]);
      os << "\n";
    }
    os << "end\n";
    return os.str();
  }

 private:
  std::vector<std::string> names_;
  std::unordered_set<std::string> names_seen_;
  std::vector<std::optional<Num>> lower_;
  std::vector<std::optional<Num>> upper_;
  std::vector<Num> objective_;
  std::vector<Constraint> constraints_;
};

template <class Num = Rational>
struct LPSolution {
  LPStatus status = LPStatus::kInfeasible;
  std::vector<Num> values;  // present iff optimal
  Num objective{0};
  std::size_t pivots = 0;
};

namespace detail {

/// Dense tableau for max c^T y, A y = b, y >= 0 with b >= 0, driven by
/// Bland's rule.
template <class Num>
class Tableau {
 public:
  using Traits = NumTraits<Num>;

  Tableau(std::vector<std::vector<Num>> rows, std::vector<Num> rhs, std::vector<std::size_t> basis,
          std::size_t cols)
      : a_(std::move(rows)), b_(std::move(rhs)), basis_(std::move(basis)), cols_(cols) {}

  /// Runs simplex with objective `cost` over the columns flagged in
  /// `allowed`. Returns false if unbounded.
  bool optimize(const std::vector<Num>& cost, const std::vector<bool>& allowed) {
    // reduced costs d_j = c_j - sum_r c_B(r) a_rj
    d_.assign(cols_, Num(0));
    for (std::size_t j = 0; j < cols_; ++j) d_[j] = cost[j];
    for (std::size_t r = 0; r < a_.size(); ++r) {
      const Num& cb = cost[basis_[r]];
      if (Traits::is_zero(cb)) continue;
      for (std::size_t j = 0; j < cols_; ++j)
        if (!Traits::is_zero(a_[r][j])) d_[j] -= Num(cb * a_[r][j]);
    }
    for (;;) {
      std::size_t enter = cols_;
      for (std::size_t j = 0; j < cols_; ++j)
        if (allowed[j] && Traits::is_positive(d_[j])) {
          enter = j;
          break;
        }
      if (enter == cols_) return true;

      std::size_t leave = a_.size();
      Num best_ratio(0);
      for (std::size_t r = 0; r < a_.size(); ++r) {
        if (!Traits::is_positive(a_[r][enter])) continue;
        Num ratio = b_[r] / a_[r][enter];
        if (leave == a_.size() || ratio < best_ratio ||
            (ratio == best_ratio && basis_[r] < basis_[leave])) {
          leave = r;
          best_ratio = std::move(ratio);
        }
      }
      if (leave == a_.size()) return false;
      pivot(leave, enter);
    }
  }

  void pivot(std::size_t r, std::size_t c) {
    ++pivots_;
    const Num piv = a_[r][c];
    std::vector<std::size_t> nz;
    for (std::size_t j = 0; j < cols_; ++j) {
      if (Traits::is_zero(a_[r][j])) {
        a_[r][j] = Num(0);
        continue;
      }
      a_[r][j] /= piv;
      nz.push_back(j);
    }
    b_[r] /= piv;
    auto eliminate = [&](std::vector<Num>& row, Num& rhs) {
      const Num factor = row[c];
      if (Traits::is_zero(factor)) return;
      for (std::size_t j : nz) row[j] -= Num(factor * a_[r][j]);
      rhs -= Num(factor * b_[r]);
      row[c] = Num(0);
    };
    for (std::size_t i = 0; i < a_.size(); ++i)
      if (i != r) eliminate(a_[i], b_[i]);
    if (!d_.empty()) {
      Num dummy(0);
      eliminate(d_, dummy);
    }
    basis_[r] = c;
  }

  void drop_row(std::size_t r) {
    a_.erase(a_.begin() + static_cast<std::ptrdiff_t>(r));
    b_.erase(b_.begin() + static_cast<std::ptrdiff_t>(r));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
  }

  std::size_t rows() const { return a_.size(); }
  const Num& at(std::size_t r, std::size_t c) const { return a_[r][c]; }
  const Num& rhs(std::size_t r) const { return b_[r]; }
  std::size_t basic(std::size_t r) const { return basis_[r]; }
  std::size_t pivots() const { return pivots_; }

 private:
  std::vector<std::vector<Num>> a_;
  std::vector<Num> b_;
  std::vector<std::size_t> basis_;
  std::vector<Num> d_;
  std::size_t cols_;
  std::size_t pivots_ = 0;
};

}  // namespace detail

/// Two-phase primal simplex with Bland's rule. Exact for Rational; float
/// mode uses the same pivoting with a 1e-9 tolerance. Deterministic.
template <class Num>
LPSolution<Num> solve(const LinearProgram<Num>& lp) {
  using Traits = NumTraits<Num>;
  const std::size_t nv = lp.variable_count();

  // x_j = offset_j + sum(sign * y_col)
  struct Map {
    Num offset{0};
    std::vector<std::pair<std::size_t, int>> cols;
  };
  std::vector<Map> map(nv);
  std::size_t ny = 0;
  struct Row {
    std::vector<std::pair<std::size_t, Num>> terms;  // over y
    Relation rel;
    Num rhs;
  };
  std::vector<Row> rows;
  for (std::size_t j = 0; j < nv; ++j) {
    const auto& lo = lp.lower(j);
    const auto& up = lp.upper(j);
    if (lo) {
      map[j].offset = *lo;
      map[j].cols.push_back({ny++, +1});
      if (up) rows.push_back({{{ny - 1, Num(1)}}, Relation::kLessEqual, Num(*up - *lo)});
    } else if (up) {
      map[j].offset = *up;
      map[j].cols.push_back({ny++, -1});
    } else {
      map[j].cols.push_back({ny++, +1});
      map[j].cols.push_back({ny++, -1});
    }
  }
  for (const auto& c : lp.constraints()) {
    Row row{{}, c.relation, c.rhs};
    for (const auto& t : c.terms) {
      row.rhs -= Num(t.coef * map[t.var].offset);
      for (auto [col, sign] : map[t.var].cols) row.terms.push_back({col, sign > 0 ? t.coef : Num(-t.coef)});
    }
    rows.push_back(std::move(row));
  }

  const std::size_t m = rows.size();
  std::size_t n_slack = 0;
  for (const auto& r : rows)
    if (r.rel == Relation::kLessEqual) ++n_slack;

  // Columns: y | slacks | artificials
  std::vector<std::vector<Num>> a(m);
  std::vector<Num> b(m);
  std::vector<std::size_t> basis(m);
  std::vector<std::size_t> need_art;
  std::size_t slack_col = ny;
  std::vector<std::size_t> slack_of(m, static_cast<std::size_t>(-1));
  for (std::size_t r = 0; r < m; ++r)
    if (rows[r].rel == Relation::kLessEqual) slack_of[r] = slack_col++;
  for (std::size_t r = 0; r < m; ++r) {
    bool negate = rows[r].rhs < Num(0);
    if (negate) need_art.push_back(r);
    else if (rows[r].rel == Relation::kEqual) need_art.push_back(r);
  }
  const std::size_t cols = ny + n_slack + need_art.size();
  std::vector<bool> is_art(cols, false);
  std::size_t art_col = ny + n_slack;
  std::vector<std::size_t> art_of(m, static_cast<std::size_t>(-1));
  for (std::size_t r : need_art) {
    art_of[r] = art_col;
    is_art[art_col++] = true;
  }
  for (std::size_t r = 0; r < m; ++r) {
    a[r].assign(cols, Num(0));
    bool negate = rows[r].rhs < Num(0);
    Num sign = negate ? Num(-1) : Num(1);
    for (const auto& [col, coef] : rows[r].terms) a[r][col] += Num(sign * coef);
    if (slack_of[r] != static_cast<std::size_t>(-1)) a[r][slack_of[r]] = sign;
    b[r] = Num(sign * rows[r].rhs);
    if (art_of[r] != static_cast<std::size_t>(-1)) {
      a[r][art_of[r]] = Num(1);
      basis[r] = art_of[r];
    } else {
      basis[r] = slack_of[r];
    }
  }

  detail::Tableau<Num> tab(std::move(a), std::move(b), std::move(basis), cols);
  LPSolution<Num> sol;

  if (!need_art.empty()) {
    std::vector<Num> phase1(cols, Num(0));
    for (std::size_t j = 0; j < cols; ++j)
      if (is_art[j]) phase1[j] = Num(-1);
    std::vector<bool> all(cols, true);
    tab.optimize(phase1, all);
    Num infeas(0);
    for (std::size_t r = 0; r < tab.rows(); ++r)
      if (is_art[tab.basic(r)]) infeas += tab.rhs(r);
    if (Traits::is_positive(infeas)) {
      sol.status = LPStatus::kInfeasible;
      sol.pivots = tab.pivots();
      return sol;
    }
    // Drive zero-level artificials out of the basis; drop redundant rows.
    for (std::size_t r = tab.rows(); r-- > 0;) {
      if (!is_art[tab.basic(r)]) continue;
      std::size_t enter = cols;
      for (std::size_t j = 0; j < cols; ++j)
        if (!is_art[j] && !Traits::is_zero(tab.at(r, j))) {
          enter = j;
          break;
        }
      if (enter == cols) tab.drop_row(r);
      else tab.pivot(r, enter);
    }
  }

  std::vector<Num> cost(cols, Num(0));
  for (std::size_t j = 0; j < nv; ++j) {
    const Num& c = lp.objective()[j];
    if (Traits::is_zero(c)) continue;
    for (auto [col, sign] : map[j].cols) cost[col] = sign > 0 ? c : Num(-c);
  }
  std::vector<bool> allowed(cols, true);
  for (std::size_t j = 0; j < cols; ++j)
    if (is_art[j]) allowed[j] = false;
  if (!tab.optimize(cost, allowed)) {
    sol.status = LPStatus::kUnbounded;
    sol.pivots = tab.pivots();
    return sol;
  }

  std::vector<Num> y(cols, Num(0));
  for (std::size_t r = 0; r < tab.rows(); ++r) y[tab.basic(r)] = tab.rhs(r);
  sol.status = LPStatus::kOptimal;
  sol.values.assign(nv, Num(0));
  for (std::size_t j = 0; j < nv; ++j) {
    Num v = map[j].offset;
    for (auto [col, sign] : map[j].cols) {
      if (sign > 0) v += y[col];
      else v -= y[col];
    }
    sol.values[j] = std::move(v);
  }
  sol.objective = Num(0);
  for (std::size_t j = 0; j < nv; ++j)
    if (!Traits::is_zero(lp.objective()[j])) sol.objective += Num(lp.objective()[j] * sol.values[j]);
  sol.pivots = tab.pivots();
  return sol;
}

/// Largest violation of any row or bound at `x` (zero means feasible).
template <class Num>
Num max_violation(const LinearProgram<Num>& lp, const std::vector<Num>& x) {
  Num worst(0);
  auto bump = [&](const Num& v) {
    if (worst < v) worst = v;
  };
  for (std::size_t j = 0; j < lp.variable_count(); ++j) {
    if (lp.lower(j)) bump(Num(*lp.lower(j) - x[j]));
    if (lp.upper(j)) bump(Num(x[j] - *lp.upper(j)));
  }
  for (const auto& c : lp.constraints()) {
    Num lhs(0);
    for (const auto& t : c.terms) lhs += Num(t.coef * x[t.var]);
    Num diff = lhs - c.rhs;
    bump(diff);
    if (c.relation == Relation::kEqual) bump(Num(-diff));
  }
  return worst;
}

}  // namespace mechlab
