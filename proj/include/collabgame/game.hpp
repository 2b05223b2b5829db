#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "collabgame/coalition.hpp"
#include "collabgame/error.hpp"

namespace collabgame {

/// Hybrid absolute/relative tolerance used across the game code: 1e-9 * max(1, |scale|).
inline double tolerance(double scale) { return 1e-9 * std::max(1.0, std::abs(scale)); }

/// One payoff per player, indexed 0..n-1.
class PayoffVector {
 public:
  PayoffVector() = default;
  explicit PayoffVector(std::vector<double> x) : x_(std::move(x)) {
    for (double v : x_) {
      if (!std::isfinite(v)) throw Error(ErrorKind::range, "payoff vector entries must be finite");
    }
  }

  int size() const { return static_cast<int>(x_.size()); }
  double operator[](int i) const { return x_[static_cast<std::size_t>(i)]; }
  std::span<const double> values() const { return x_; }

  double sum() const {
    double s = 0.0;
    for (double v : x_) s += v;
    return s;
  }

  /// Payoff total over the members of `s`.
  double sum(Coalition s) const {
    double total = 0.0;
    for (int p : s.members()) total += x_[static_cast<std::size_t>(p)];
    return total;
  }

  friend bool operator==(const PayoffVector&, const PayoffVector&) = default;

 private:
  std::vector<double> x_;
};

/// Transferable-utility game (N, v): n players and a value for every one of the 2^n coalitions.
/// Immutable after construction; v(empty) is always 0.
class TUGame {
 public:
  /// `values[mask]` holds v(S) for the coalition with that encoding.
  TUGame(int n, std::vector<double> values) : n_(n), values_(std::move(values)) {
    if (n < 1 || n > kMaxPlayers) {
      throw Error(ErrorKind::capacity, "player count " + std::to_string(n) + " outside 1.." +
                                           std::to_string(kMaxPlayers));
    }
    if (values_.size() != (std::size_t{1} << n)) {
      throw Error(ErrorKind::dimension, "game with " + std::to_string(n) + " players needs " +
                                            std::to_string(std::size_t{1} << n) + " coalition values");
    }
    if (values_[0] != 0.0) throw Error(ErrorKind::range, "v(empty set) must be 0");
    for (double v : values_) {
      if (!std::isfinite(v)) throw Error(ErrorKind::range, "coalition values must be finite");
    }
  }

  /// Builds a game by evaluating `fn` on every nonempty coalition.
  static TUGame from_function(int n, const std::function<double(Coalition)>& fn) {
    if (n < 1 || n > kMaxPlayers) {
      throw Error(ErrorKind::capacity, "player count " + std::to_string(n) + " outside 1.." +
                                           std::to_string(kMaxPlayers));
    }
    std::vector<double> v(std::size_t{1} << n, 0.0);
    for (std::size_t m = 1; m < v.size(); ++m) v[m] = fn(Coalition{static_cast<Coalition::mask_type>(m)});
    return TUGame(n, std::move(v));
  }

  int players() const { return n_; }
  std::size_t coalition_count() const { return values_.size(); }
  Coalition grand() const { return Coalition::grand(n_); }

  double value(Coalition s) const { return values_[s.mask()]; }
  double operator()(Coalition s) const { return value(s); }
  double grand_value() const { return values_.back(); }
  std::span<const double> values() const { return values_; }

  /// Largest |v(S)|, used as the tolerance scale.
  double scale() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Coalition-wise sum of two games on the same player set.
  friend TUGame operator+(const TUGame& a, const TUGame& b) {
    if (a.n_ != b.n_) throw Error(ErrorKind::dimension, "cannot add games with different player counts");
    std::vector<double> v(a.values_.size());
    for (std::size_t m = 0; m < v.size(); ++m) v[m] = a.values_[m] + b.values_[m];
    return TUGame(a.n_, std::move(v));
  }

  friend bool operator==(const TUGame&, const TUGame&) = default;

 private:
  int n_;
  std::vector<double> values_;
};

}  // namespace collabgame
