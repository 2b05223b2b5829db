#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "collabgame/game.hpp"

namespace collabgame {

enum class GameProperty { additivity, superadditivity, convexity };

inline std::string_view to_string(GameProperty p) {
  switch (p) {
    case GameProperty::additivity: return "additivity";
    case GameProperty::superadditivity: return "superadditivity";
    case GameProperty::convexity: return "convexity";
  }
  return "";
}

inline GameProperty parse_property(std::string_view name) {
  if (name == "additivity") return GameProperty::additivity;
  if (name == "superadditivity") return GameProperty::superadditivity;
  if (name == "convexity") return GameProperty::convexity;
  throw Error(ErrorKind::usage, "unknown game property '" + std::string(name) +
                                    "' (expected additivity, superadditivity or convexity)");
}

/// A violating instance.
///
/// additivity / superadditivity: `first` = S, `second` = T (disjoint), lhs = v(S u T), rhs = v(S) + v(T).
/// convexity: `player` = i, `first` = S subset of `second` = T, both excluding i;
///            lhs = v(S u {i}) - v(S), rhs = v(T u {i}) - v(T).
struct Witness {
  Coalition first;
  Coalition second;
  std::optional<int> player;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct PropertyWitness {
  GameProperty property;
  bool holds = true;
  std::optional<Witness> witness;
};

namespace detail {

inline PropertyWitness check_pairs(const TUGame& game, GameProperty prop) {
  const double tol = tolerance(game.scale());
  const Coalition grand = game.grand();
  const auto count = static_cast<Coalition::mask_type>(game.coalition_count());
  for (Coalition::mask_type ms = 1; ms < count; ++ms) {
    const Coalition s{ms};
    const Coalition rest{grand.mask() & ~ms};
    PropertyWitness found{prop, true, std::nullopt};
    for_each_subset(rest, [&](Coalition t) {
      if (!found.holds || t.is_empty() || t.mask() < ms) return;
      const double joint = game.value(s | t);
      const double split = game.value(s) + game.value(t);
      const bool bad = prop == GameProperty::additivity ? std::abs(joint - split) > tol : joint < split - tol;
      if (bad) found = {prop, false, Witness{s, t, std::nullopt, joint, split}};
    });
    if (!found.holds) return found;
  }
  return {prop, true, std::nullopt};
}

inline PropertyWitness check_convexity(const TUGame& game) {
  const double tol = tolerance(game.scale());
  const int n = game.players();
  const Coalition grand = game.grand();
  const auto count = static_cast<Coalition::mask_type>(game.coalition_count());
  for (Coalition::mask_type ms = 0; ms < count; ++ms) {
    const Coalition s{ms};
    PropertyWitness found{GameProperty::convexity, true, std::nullopt};
    // Supersets T of S, ascending.
    for_each_subset(Coalition{grand.mask() & ~ms}, [&](Coalition extra) {
      if (!found.holds) return;
      const Coalition t = s | extra;
      for (int i = 0; i < n && found.holds; ++i) {
        if (t.contains(i)) continue;
        const double small = game.value(s.with(i)) - game.value(s);
        const double large = game.value(t.with(i)) - game.value(t);
        if (small > large + tol) {
          found = {GameProperty::convexity, false, Witness{s, t, i, small, large}};
        }
      }
    });
    if (!found.holds) return found;
  }
  return {GameProperty::convexity, true, std::nullopt};
}

}  // namespace detail

/// Exhaustive property check; the first violation in (S, T, i) encoding order is returned as witness.
inline PropertyWitness check_property(const TUGame& game, GameProperty property) {
  switch (property) {
    case GameProperty::additivity:
    case GameProperty::superadditivity:
      return detail::check_pairs(game, property);
    case GameProperty::convexity:
      return detail::check_convexity(game);
  }
  throw Error(ErrorKind::usage, "unknown game property");
}

inline PropertyWitness check_property(const TUGame& game, std::string_view property) {
  return check_property(game, parse_property(property));
}

}  // namespace collabgame
