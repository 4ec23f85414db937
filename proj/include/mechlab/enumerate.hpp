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
#include <future>
#include <optional>
#include <string>
#include <vector>

#include "mechlab/error.hpp"
#include "mechlab/model.hpp"
#include "mechlab/numeric.hpp"

namespace mechlab {

struct EnumLimits {
  std::size_t max_cells = 12;
  std::uint64_t max_candidates = 10'000'000;
  /// Worker count; subtrees are split on the first profile's choice.
  std::size_t threads = 1;
};

template <class Num = Rational>
struct DeterministicResult {
  DeterministicMechanism<Num> mechanism;
  Num revenue;
  std::uint64_t candidates = 0;
};

/// Lowest grid value of bidder i at which `choice` still lets bidder i win,
/// holding v_{-i} fixed. `choice` holds one feasible-vector index per flat
/// profile. Throws ContractError if i does not win at `profile`.
template <class Num>
Num critical_payment(const ValueGrid<Num>& grid, const FeasibilitySystem& fs,
                     const std::vector<std::size_t>& choice, const Profile& profile, std::size_t i) {
  const std::size_t f = grid.flat(profile);
  if (choice.size() != grid.cells()) throw DimensionError("winner function has wrong size");
  if (!fs.vector(choice[f])[i])
    throw ContractError("critical_payment: bidder " + std::to_string(i) + " does not win");
  const auto& idx = grid.indexer();
  for (std::size_t k = 0; k < grid.size(i); ++k)
    if (fs.vector(choice[idx.with_digit(f, i, k)])[i]) return grid.value(i, k);
  return grid.value(i, profile[i]);  // unreachable
}

namespace detail {

template <class Num>
class DeterministicSearch {
 public:
  DeterministicSearch(const ExplicitDistribution<Num>& dist, const FeasibilitySystem& fs,
                      std::atomic<std::uint64_t>& counter, std::uint64_t cap)
      : grid_(dist.grid()), fs_(fs), dist_(dist), counter_(counter), cap_(cap),
        choice_(grid_.cells(), 0) {}

  /// Explores every completion with profile 0 fixed to `first`.
  void run(std::size_t first) {
    if (!admissible(0, first)) return;
    choice_[0] = first;
    descend(1, gain(0));
  }

  bool found() const { return best_.has_value(); }
  const Num& best_revenue() const { return *best_; }
  const std::vector<std::size_t>& best_choice() const { return best_choice_; }

 private:
  // Monotonicity: if i wins one step below in its own coordinate, it must
  // win here. Checking the immediate predecessor suffices by transitivity.
  bool admissible(std::size_t f, std::size_t k) const {
    const auto& idx = grid_.indexer();
    const auto& vec = fs_.vector(k);
    for (std::size_t i = 0; i < grid_.bidders(); ++i) {
      std::size_t d = idx.digit(f, i);
      if (d == 0 || vec[i]) continue;
      if (fs_.vector(choice_[f - idx.stride(i)])[i]) return false;
    }
    return true;
  }

  Num gain(std::size_t f) const {
    const Num& pr = dist_.probability_at(f);
    if (NumTraits<Num>::is_zero(pr)) return Num(0);
    Num pay(0);
    for (std::size_t i = 0; i < grid_.bidders(); ++i)
      if (fs_.vector(choice_[f])[i]) pay += critical(f, i);
    return Num(pr * pay);
  }

  Num critical(std::size_t f, std::size_t i) const {
    const auto& idx = grid_.indexer();
    std::size_t d = idx.digit(f, i);
    std::size_t cur = f;
    while (d > 0 && fs_.vector(choice_[cur - idx.stride(i)])[i]) {
      cur -= idx.stride(i);
      --d;
    }
    return grid_.value(i, d);
  }

  void descend(std::size_t f, const Num& revenue) {
    if (f == grid_.cells()) {
      if (counter_.fetch_add(1) + 1 > cap_)
        throw SizeError("deterministic enumeration exceeded " + std::to_string(cap_) +
                        " candidate winner functions");
      if (!best_ || *best_ < revenue) {
        best_ = revenue;
        best_choice_ = choice_;
      }
      return;
    }
    for (std::size_t k = 0; k < fs_.size(); ++k) {
      if (!admissible(f, k)) continue;
      choice_[f] = k;
      descend(f + 1, Num(revenue + gain(f)));
    }
  }

  const ValueGrid<Num>& grid_;
  const FeasibilitySystem& fs_;
  const ExplicitDistribution<Num>& dist_;
  std::atomic<std::uint64_t>& counter_;
  std::uint64_t cap_;
  std::vector<std::size_t> choice_;
  std::optional<Num> best_;
  std::vector<std::size_t> best_choice_;
};

}  // namespace detail

/// Revenue-optimal deterministic truthful mechanism by exhaustive search over
/// monotone winner functions with critical (minimal winning grid value)
/// payments. Ties go to the lexicographically first winner function, where
/// profiles are visited in lexicographic order and choices in feasible-vector
/// order. Serial and threaded runs return the same mechanism.
template <class Num>
DeterministicResult<Num> enumerate_deterministic_optimal(const ExplicitDistribution<Num>& dist,
                                                         const FeasibilitySystem& fs,
                                                         const EnumLimits& limits = {}) {
  const auto& grid = dist.grid();
  if (fs.bidders() != grid.bidders()) throw DimensionError("feasibility system and grid disagree on n");
  if (grid.cells() > limits.max_cells)
    throw SizeError("grid has " + std::to_string(grid.cells()) + " cells, limit is " +
                    std::to_string(limits.max_cells));

  std::atomic<std::uint64_t> counter{0};
  std::vector<detail::DeterministicSearch<Num>> searches;
  searches.reserve(fs.size());
  for (std::size_t k = 0; k < fs.size(); ++k)
    searches.emplace_back(dist, fs, counter, limits.max_candidates);

  if (limits.threads <= 1) {
    for (std::size_t k = 0; k < fs.size(); ++k) searches[k].run(k);
  } else {
    std::vector<std::future<void>> pending;
    std::size_t next = 0;
    while (next < fs.size() || !pending.empty()) {
      while (next < fs.size() && pending.size() < limits.threads) {
        auto* s = &searches[next];
        std::size_t k = next++;
        pending.push_back(std::async(std::launch::async, [s, k] { s->run(k); }));
      }
      pending.front().get();
      pending.erase(pending.begin());
    }
  }

  std::optional<std::size_t> winner;
  for (std::size_t k = 0; k < searches.size(); ++k) {
    if (!searches[k].found()) continue;
    if (!winner || searches[*winner].best_revenue() < searches[k].best_revenue()) winner = k;
  }
  if (!winner) throw std::logic_error("no monotone winner function found");

  const auto& choice = searches[*winner].best_choice();
  const std::size_t n = grid.bidders();
  std::vector<Num> payments(grid.cells() * n, Num(0));
  for (std::size_t f = 0; f < grid.cells(); ++f)
    for (std::size_t i = 0; i < n; ++i)
      if (fs.vector(choice[f])[i])
        payments[f * n + i] = critical_payment(grid, fs, choice, grid.unflatten(f), i);
  return DeterministicResult<Num>{DeterministicMechanism<Num>(grid, fs, choice, std::move(payments)),
                                  searches[*winner].best_revenue(), counter.load()};
}

}  // namespace mechlab
