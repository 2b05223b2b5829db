#pragma once

#include <bit>
#include <charconv>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "collabgame/error.hpp"

namespace collabgame {

/// Largest player count a TUGame can hold (2^16 coalition values).
inline constexpr int kMaxPlayers = 16;

/// A subset of players {1..n} stored as a bitmask; player i occupies bit i-1.
/// Ordering and iteration follow the integer encoding.
class Coalition {
 public:
  using mask_type = std::uint32_t;

  constexpr Coalition() = default;
  constexpr explicit Coalition(mask_type mask) : mask_(mask) {}

  static constexpr Coalition empty() { return Coalition{}; }
  static constexpr Coalition grand(int n) { return Coalition{(mask_type{1} << n) - 1}; }
  /// Singleton for a 0-based player index.
  static constexpr Coalition single(int player) { return Coalition{mask_type{1} << player}; }

  constexpr mask_type mask() const { return mask_; }
  constexpr bool is_empty() const { return mask_ == 0; }
  constexpr int size() const { return std::popcount(mask_); }
  constexpr bool contains(int player) const { return (mask_ >> player) & 1u; }
  constexpr bool subset_of(Coalition other) const { return (mask_ & ~other.mask_) == 0; }
  constexpr bool disjoint(Coalition other) const { return (mask_ & other.mask_) == 0; }

  constexpr Coalition with(int player) const { return Coalition{mask_ | (mask_type{1} << player)}; }
  constexpr Coalition without(int player) const { return Coalition{mask_ & ~(mask_type{1} << player)}; }

  friend constexpr Coalition operator|(Coalition a, Coalition b) { return Coalition{a.mask_ | b.mask_}; }
  friend constexpr Coalition operator&(Coalition a, Coalition b) { return Coalition{a.mask_ & b.mask_}; }
  friend constexpr bool operator==(Coalition, Coalition) = default;
  friend constexpr auto operator<=>(Coalition, Coalition) = default;

  /// 0-based member indices in ascending order.
  std::vector<int> members() const {
    std::vector<int> out;
    for (mask_type m = mask_; m != 0; m &= m - 1) out.push_back(std::countr_zero(m));
    return out;
  }

  /// 1-based sorted player list, e.g. "1,3"; empty string for the empty set.
  std::string to_string() const {
    std::string out;
    for (int p : members()) {
      if (!out.empty()) out += ',';
      out += std::to_string(p + 1);
    }
    return out;
  }

  /// Inverse of to_string(). Players must be strictly ascending and lie in 1..n.
  static Coalition parse(std::string_view text, int n) {
    Coalition c;
    if (text.empty()) return c;
    int last = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t comma = text.find(',', pos);
      if (comma == std::string_view::npos) comma = text.size();
      std::string_view tok = text.substr(pos, comma - pos);
      int player = 0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), player);
      if (ec != std::errc{} || ptr != tok.data() + tok.size() || tok.empty()) {
        throw Error(ErrorKind::parse, "bad coalition key '" + std::string(text) + "'");
      }
      if (player < 1 || player > n) {
        throw Error(ErrorKind::range, "player " + std::to_string(player) + " out of range 1.." +
                                          std::to_string(n) + " in coalition '" + std::string(text) + "'");
      }
      if (player <= last) {
        throw Error(ErrorKind::parse, "coalition '" + std::string(text) + "' is not a strictly ascending player list");
      }
      last = player;
      c = c.with(player - 1);
      pos = comma + 1;
    }
    return c;
  }

 private:
  mask_type mask_ = 0;
};

/// Calls fn(sub) for every subset of `set`, in ascending encoding order, empty set included.
template <typename Fn>
void for_each_subset(Coalition set, Fn&& fn) {
  const auto full = set.mask();
  // Enumerate via complement trick so the order is ascending.
  Coalition::mask_type sub = 0;
  while (true) {
    fn(Coalition{sub});
    if (sub == full) break;
    sub = ((sub | ~full) + 1) & full;
  }
}

}  // namespace collabgame
