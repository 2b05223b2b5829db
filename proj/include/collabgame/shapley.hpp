#pragma once

#include <span>
#include <vector>

#include "collabgame/game.hpp"

namespace collabgame {

/// Shapley value: phi_i = sum over S containing i of (|S|-1)!(n-|S|)!/n! * (v(S) - v(S \ {i})).
/// Runs in O(n 2^n); coalitions are visited in ascending encoding order so results are reproducible.
inline PayoffVector shapley(const TUGame& game) {
  const int n = game.players();

  // weight[s] = (s-1)!(n-s)!/n!; factorials up to 16! are exact in a double.
  std::vector<double> fact(static_cast<std::size_t>(n) + 1, 1.0);
  for (int k = 1; k <= n; ++k) fact[k] = fact[k - 1] * k;
  std::vector<double> weight(static_cast<std::size_t>(n) + 1, 0.0);
  for (int s = 1; s <= n; ++s) weight[s] = fact[s - 1] * fact[n - s] / fact[n];

  std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
  const auto count = static_cast<Coalition::mask_type>(game.coalition_count());
  for (Coalition::mask_type m = 1; m < count; ++m) {
    const Coalition s{m};
    const double vs = game.value(s);
    const double w = weight[s.size()];
    for (Coalition::mask_type rest = m; rest != 0; rest &= rest - 1) {
      const int i = std::countr_zero(rest);
      phi[i] += w * (vs - game.value(s.without(i)));
    }
  }
  return PayoffVector(std::move(phi));
}

/// Marginal contributions of each player when joining in `order` (0-based player indices).
inline PayoffVector marginal_vector(const TUGame& game, std::span<const int> order) {
  const int n = game.players();
  if (static_cast<int>(order.size()) != n) {
    throw Error(ErrorKind::invalid_order, "order has " + std::to_string(order.size()) +
                                              " entries, expected " + std::to_string(n));
  }
  std::vector<double> x(static_cast<std::size_t>(n), 0.0);
  Coalition pred;
  for (int p : order) {
    if (p < 0 || p >= n) throw Error(ErrorKind::invalid_order, "player index " + std::to_string(p) + " out of range");
    if (pred.contains(p)) throw Error(ErrorKind::invalid_order, "player " + std::to_string(p + 1) + " appears twice");
    const Coalition next = pred.with(p);
    x[p] = game.value(next) - game.value(pred);
    pred = next;
  }
  return PayoffVector(std::move(x));
}

}  // namespace collabgame
