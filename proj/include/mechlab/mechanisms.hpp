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

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mechlab/error.hpp"
#include "mechlab/model.hpp"

// Reference single-item mechanisms used as calibration points for the
// verifier and in tests. Ties in the highest bid go to the lowest index.

namespace mechlab {

namespace detail {

template <class Num>
std::size_t highest_bidder(const ValueGrid<Num>& grid, std::size_t f) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.bidders(); ++i)
    if (grid.value_at(f, best) < grid.value_at(f, i)) best = i;
  return best;
}

template <class Num, class PriceFn>
DeterministicMechanism<Num> single_item_rule(const ValueGrid<Num>& grid,
                                             const std::vector<std::optional<std::size_t>>& winner,
                                             PriceFn price) {
  const std::size_t n = grid.bidders();
  auto fs = FeasibilitySystem::single_item(n);
  std::vector<std::size_t> choice(grid.cells(), fs.zero_index());
  std::vector<Num> pay(grid.cells() * n, Num(0));
  for (std::size_t f = 0; f < grid.cells(); ++f) {
    if (!winner[f]) continue;
    std::size_t w = *winner[f];
    choice[f] = *fs.unit_index(w);
    pay[f * n + w] = price(f, w);
  }
  return DeterministicMechanism<Num>(grid, std::move(fs), std::move(choice), std::move(pay));
}

template <class Num>
std::vector<std::optional<std::size_t>> highest_bid_winners(const ValueGrid<Num>& grid) {
  std::vector<std::optional<std::size_t>> w(grid.cells());
  for (std::size_t f = 0; f < grid.cells(); ++f) w[f] = highest_bidder(grid, f);
  return w;
}

}  // namespace detail

/// Never sells.
template <class Num>
InterimMechanism<Num> zero_mechanism(const ValueGrid<Num>& grid) {
  return InterimMechanism<Num>(grid);
}

/// Second-price auction: highest bid wins and pays the highest competing bid.
template <class Num>
DeterministicMechanism<Num> vickrey(const ValueGrid<Num>& grid) {
  return detail::single_item_rule(grid, detail::highest_bid_winners(grid),
                                  [&](std::size_t f, std::size_t w) {
                                    Num best(0);
                                    for (std::size_t j = 0; j < grid.bidders(); ++j)
                                      if (j != w && best < grid.value_at(f, j)) best = grid.value_at(f, j);
                                    return best;
                                  });
}

/// Second-price allocation charging the winner its threshold on the grid:
/// the lowest own grid value at which it would still win. This is the
/// variant whose round-down extension to off-grid values stays truthful.
template <class Num>
DeterministicMechanism<Num> vickrey_grid_threshold(const ValueGrid<Num>& grid) {
  auto winners = detail::highest_bid_winners(grid);
  const auto& idx = grid.indexer();
  return detail::single_item_rule(grid, winners, [&](std::size_t f, std::size_t w) {
    for (std::size_t k = 0; k < grid.size(w); ++k)
      if (winners[idx.with_digit(f, w, k)] == w) return grid.value(w, k);
    return grid.value_at(f, w);
  });
}

/// First-price auction: highest bid wins and pays its own bid.
template <class Num>
DeterministicMechanism<Num> first_price(const ValueGrid<Num>& grid) {
  return detail::single_item_rule(grid, detail::highest_bid_winners(grid),
                                  [&](std::size_t f, std::size_t w) { return grid.value_at(f, w); });
}

/// Sequential posted prices: bidders are offered the item in index order and
/// the first with value >= prices[i] buys. The charge is prices[i] rounded up
/// to bidder i's grid, i.e. the lowest accepting grid value.
template <class Num>
DeterministicMechanism<Num> posted_price(const ValueGrid<Num>& grid, const std::vector<Num>& prices) {
  if (prices.size() != grid.bidders()) throw DimensionError("one posted price per bidder");
  std::vector<std::optional<std::size_t>> winners(grid.cells());
  for (std::size_t f = 0; f < grid.cells(); ++f)
    for (std::size_t i = 0; i < grid.bidders(); ++i)
      if (!(grid.value_at(f, i) < prices[i])) {
        winners[f] = i;
        break;
      }
  return detail::single_item_rule(grid, winners, [&](std::size_t, std::size_t w) {
    for (const auto& v : grid.values(w))
      if (!(v < prices[w])) return v;
    throw std::logic_error("posted price winner below price");
  });
}

}  // namespace mechlab
