#pragma once

#include <optional>
#include <string>
#include <vector>

#include "collabgame/game.hpp"
#include "collabgame/simplex.hpp"

namespace collabgame {

/// Largest game handed to the core feasibility LP.
inline constexpr int kMaxCorePlayers = 12;

struct BlockingCoalition {
  Coalition coalition;
  double deficit;  // v(S) - x(S), strictly positive
};

struct CoreMembership {
  bool contained = false;
  bool efficient = false;
  double efficiency_gap = 0.0;  // x(N) - v(N)
  std::vector<BlockingCoalition> blocking;
};

/// Efficiency and coalition-rationality test of `x` against every nonempty coalition.
inline CoreMembership core_contains(const TUGame& game, const PayoffVector& x) {
  if (x.size() != game.players()) {
    throw Error(ErrorKind::dimension, "payoff vector has " + std::to_string(x.size()) + " entries, game has " +
                                          std::to_string(game.players()) + " players");
  }
  CoreMembership out;
  out.efficiency_gap = x.sum() - game.grand_value();
  out.efficient = std::abs(out.efficiency_gap) <= tolerance(game.grand_value());

  // Partial sums by lowest-bit recurrence.
  std::vector<double> partial(game.coalition_count(), 0.0);
  for (std::size_t m = 1; m < partial.size(); ++m) {
    const int low = std::countr_zero(static_cast<Coalition::mask_type>(m));
    partial[m] = partial[m & (m - 1)] + x[low];
    const Coalition s{static_cast<Coalition::mask_type>(m)};
    const double deficit = game.value(s) - partial[m];
    if (deficit > tolerance(game.value(s))) out.blocking.push_back({s, deficit});
  }
  out.contained = out.efficient && out.blocking.empty();
  return out;
}

struct CoreEmptiness {
  bool empty = true;
  std::optional<PayoffVector> certificate;  // a core point when nonempty
};

/// Decides core nonemptiness exactly with a Bland-rule simplex.
///
/// Substituting y_i = x_i - v({i}) >= 0 folds the singleton constraints into the sign
/// bounds; the remaining rows are the proper coalitions of size >= 2 plus efficiency as two
/// opposite inequalities.
inline CoreEmptiness core_is_empty(const TUGame& game) {
  const int n = game.players();
  if (n > kMaxCorePlayers) {
    throw Error(ErrorKind::capacity, "core test supports at most " + std::to_string(kMaxCorePlayers) +
                                         " players, got " + std::to_string(n));
  }
  std::vector<double> solo(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) solo[i] = game.value(Coalition::single(i));

  FeasibilitySimplex::Matrix a;
  std::vector<double> b;
  const Coalition grand = game.grand();
  const auto count = static_cast<Coalition::mask_type>(game.coalition_count());
  for (Coalition::mask_type m = 1; m < count; ++m) {
    const Coalition s{m};
    if (s.size() < 2 || s == grand) continue;
    std::vector<double> row(static_cast<std::size_t>(n), 0.0);
    double need = game.value(s);
    for (int p : s.members()) {
      row[p] = -1.0;
      need -= solo[p];
    }
    a.push_back(std::move(row));
    b.push_back(-need);
  }
  double surplus = game.grand_value();
  for (double v : solo) surplus -= v;
  a.emplace_back(static_cast<std::size_t>(n), 1.0);
  b.push_back(surplus);
  a.emplace_back(static_cast<std::size_t>(n), -1.0);
  b.push_back(-surplus);

  FeasibilitySimplex lp(a, b);
  auto y = lp.solve();
  if (!y) return {true, std::nullopt};

  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[i] = (*y)[i] + solo[i];
  PayoffVector point(std::move(x));
  if (!core_contains(game, point).contained) {
    throw Error(ErrorKind::convergence, "simplex returned a point outside the core tolerance");
  }
  return {false, std::move(point)};
}

}  // namespace collabgame
