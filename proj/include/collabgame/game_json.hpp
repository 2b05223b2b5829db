#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "collabgame/core.hpp"
#include "collabgame/game.hpp"
#include "collabgame/properties.hpp"

namespace collabgame {

/// Game exchange format: {"n": int, "values": {"1,3": number, ...}}.
/// Every nonempty coalition must be present; the "" key is optional and must be 0.
inline nlohmann::json game_to_json(const TUGame& game) {
  nlohmann::json values = nlohmann::json::object();
  const auto count = static_cast<Coalition::mask_type>(game.coalition_count());
  for (Coalition::mask_type m = 1; m < count; ++m) {
    const Coalition s{m};
    values[s.to_string()] = game.value(s);
  }
  return {{"n", game.players()}, {"values", std::move(values)}};
}

inline TUGame game_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("values")) {
    throw Error(ErrorKind::parse, "game JSON must be an object with \"n\" and \"values\"");
  }
  if (!j["n"].is_number_integer()) throw Error(ErrorKind::parse, "game JSON \"n\" must be an integer");
  const int n = j["n"].get<int>();
  if (n < 1 || n > kMaxPlayers) {
    throw Error(ErrorKind::capacity, "player count " + std::to_string(n) + " outside 1.." + std::to_string(kMaxPlayers));
  }
  const auto& values = j["values"];
  if (!values.is_object()) throw Error(ErrorKind::parse, "game JSON \"values\" must be an object");

  const std::size_t count = std::size_t{1} << n;
  std::vector<double> v(count, 0.0);
  std::vector<bool> seen(count, false);
  seen[0] = true;
  for (const auto& [key, val] : values.items()) {
    if (!val.is_number()) throw Error(ErrorKind::parse, "value for coalition '" + key + "' is not a number");
    const Coalition s = Coalition::parse(key, n);
    if (s.is_empty()) {
      if (val.get<double>() != 0.0) throw Error(ErrorKind::range, "value of the empty coalition must be 0");
      continue;
    }
    if (seen[s.mask()]) throw Error(ErrorKind::duplicate_key, "coalition '" + key + "' listed twice");
    seen[s.mask()] = true;
    v[s.mask()] = val.get<double>();
  }
  for (std::size_t m = 1; m < count; ++m) {
    if (!seen[m]) {
      throw Error(ErrorKind::incomplete_data,
                  "missing value for coalition '" + Coalition{static_cast<Coalition::mask_type>(m)}.to_string() + "'");
    }
  }
  return TUGame(n, std::move(v));
}

inline nlohmann::json witness_to_json(const PropertyWitness& w) {
  nlohmann::json j = {{"property", std::string(to_string(w.property))}, {"holds", w.holds}};
  if (w.witness) {
    nlohmann::json wj = {{"first", w.witness->first.to_string()},
                         {"second", w.witness->second.to_string()},
                         {"lhs", w.witness->lhs},
                         {"rhs", w.witness->rhs}};
    if (w.witness->player) wj["player"] = *w.witness->player + 1;
    j["witness"] = std::move(wj);
  } else {
    j["witness"] = nullptr;
  }
  return j;
}

inline PropertyWitness witness_from_json(const nlohmann::json& j, int n) {
  PropertyWitness w{parse_property(j.at("property").get<std::string>()), j.at("holds").get<bool>(), std::nullopt};
  if (j.contains("witness") && !j["witness"].is_null()) {
    const auto& wj = j["witness"];
    Witness x;
    x.first = Coalition::parse(wj.at("first").get<std::string>(), n);
    x.second = Coalition::parse(wj.at("second").get<std::string>(), n);
    if (wj.contains("player")) x.player = wj["player"].get<int>() - 1;
    x.lhs = wj.at("lhs").get<double>();
    x.rhs = wj.at("rhs").get<double>();
    w.witness = x;
  }
  return w;
}

inline nlohmann::json payoff_to_json(const PayoffVector& x) {
  return nlohmann::json(std::vector<double>(x.values().begin(), x.values().end()));
}

inline nlohmann::json blocking_to_json(const std::vector<BlockingCoalition>& blocking) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& b : blocking) arr.push_back({{"coalition", b.coalition.to_string()}, {"deficit", b.deficit}});
  return arr;
}

}  // namespace collabgame
