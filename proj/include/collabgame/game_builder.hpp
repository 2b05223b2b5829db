#pragma once

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "collabgame/core.hpp"
#include "collabgame/dataset.hpp"
#include "collabgame/game_json.hpp"
#include "collabgame/properties.hpp"
#include "collabgame/shapley.hpp"

namespace collabgame {

enum class GameMode { opinion, contribution };

inline std::string_view to_string(GameMode m) { return m == GameMode::opinion ? "opinion" : "contribution"; }

inline GameMode parse_mode(std::string_view s) {
  if (s == "opinion" || s == "opinion-based") return GameMode::opinion;
  if (s == "contribution" || s == "contribution-based") return GameMode::contribution;
  throw Error(ErrorKind::usage, "unknown game mode '" + std::string(s) + "' (expected opinion or contribution)");
}

struct GameConstructionConfig {
  GameMode mode = GameMode::contribution;
  double singleton_scale = 1.0;  // opinion mode: v({i}) = singleton_scale * background_i
  double coalition_scale = 1.0;  // multiplies every coalition mean

  void validate() const {
    auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
    if (!positive(singleton_scale)) throw Error(ErrorKind::config, "singleton scale must be positive and finite");
    if (!positive(coalition_scale)) throw Error(ErrorKind::config, "coalition scale must be positive and finite");
  }
};

namespace detail {

inline void check_group(std::span<const StudentRecord> group) {
  const int n = static_cast<int>(group.size());
  if (n < kMinTeamSize || n > kMaxTeamSize) {
    throw Error(ErrorKind::team_size, "group has " + std::to_string(n) + " members, expected 2..4");
  }
  for (const auto& r : group) {
    if (r.team_key() != group.front().team_key()) {
      throw Error(ErrorKind::grouping, "group mixes teams " + group.front().team_key() + " and " + r.team_key());
    }
  }
}

inline void require_mode(const GameConstructionConfig& config, GameMode mode) {
  config.validate();
  if (config.mode != mode) {
    throw Error(ErrorKind::usage, "configuration is for " + std::string(to_string(config.mode)) +
                                      " mode, not " + std::string(to_string(mode)));
  }
}

}  // namespace detail

/// Players follow the order of `group`. v({i}) is the scaled background of i; a larger
/// coalition is worth the scaled mean of the ratings its members gave one another.
inline TUGame build_opinion_game(std::span<const StudentRecord> group, const RatingMatrix& ratings,
                                 const GameConstructionConfig& config) {
  detail::require_mode(config, GameMode::opinion);
  detail::check_group(group);
  const int n = static_cast<int>(group.size());
  std::vector<double> solo(static_cast<std::size_t>(n));
  std::vector<std::vector<double>> score(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) {
    const auto& r = group[static_cast<std::size_t>(i)];
    if (!r.background) throw Error(ErrorKind::incomplete_data, "student " + r.student_id + " has no background value");
    solo[static_cast<std::size_t>(i)] = config.singleton_scale * *r.background;
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto& m = group[static_cast<std::size_t>(j)];
      auto it = ratings.find({r.session_id, r.student_id, m.student_id});
      if (it == ratings.end()) {
        throw Error(ErrorKind::incomplete_data, "missing rating " + r.student_id + "->" + m.student_id);
      }
      score[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = it->second;
    }
  }
  return TUGame::from_function(n, [&](Coalition s) {
    if (s.size() == 1) return solo[static_cast<std::size_t>(s.members().front())];
    double total = 0.0;
    int pairs = 0;
    for (int i : s.members()) {
      for (int j : s.members()) {
        if (i == j) continue;
        total += score[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        ++pairs;
      }
    }
    return config.coalition_scale * total / pairs;
  });
}

/// Every nonempty coalition is worth the scaled mean observed contribution of its members.
inline TUGame build_contribution_game(std::span<const StudentRecord> group, const GameConstructionConfig& config) {
  detail::require_mode(config, GameMode::contribution);
  detail::check_group(group);
  const int n = static_cast<int>(group.size());
  std::vector<double> c(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& r = group[static_cast<std::size_t>(i)];
    if (!r.observed_contribution) {
      throw Error(ErrorKind::incomplete_data, "student " + r.student_id + " has no observed_contribution value");
    }
    c[static_cast<std::size_t>(i)] = *r.observed_contribution;
  }
  return TUGame::from_function(n, [&](Coalition s) {
    double total = 0.0;
    for (int i : s.members()) total += c[static_cast<std::size_t>(i)];
    return config.coalition_scale * total / s.size();
  });
}

inline TUGame build_game(std::span<const StudentRecord> group, const RatingMatrix& ratings,
                         const GameConstructionConfig& config) {
  return config.mode == GameMode::opinion ? build_opinion_game(group, ratings, config)
                                          : build_contribution_game(group, config);
}

/// Members of one team ("session/team_id") in dataset order.
inline std::vector<StudentRecord> team_members(const SessionDataset& data, const std::string& team_key) {
  const auto teams = data.teams();
  auto it = teams.find(team_key);
  if (it == teams.end()) {
    std::string known;
    for (const auto& [k, v] : teams) known += (known.empty() ? "" : ", ") + k;
    throw Error(ErrorKind::usage, "unknown team '" + team_key + "'; teams: " + known);
  }
  std::vector<StudentRecord> out;
  for (auto i : it->second) out.push_back(data.records()[i]);
  return out;
}

/// Builds the game of one team; construction errors carry the team key.
inline TUGame build_team_game(const SessionDataset& data, const std::string& team_key,
                              const GameConstructionConfig& config) {
  const auto members = team_members(data, team_key);
  try {
    return build_game(members, data.ratings(), config);
  } catch (const Error& e) {
    throw Error(e.kind(), "team " + team_key + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------------------------

struct StabilityReport {
  std::string group_id;
  TUGame game;
  PropertyWitness additive;
  PropertyWitness superadditive;
  bool core_empty = false;
  std::vector<BlockingCoalition> blocking;  // against the equal split v(N)/n
  double grand_coalition_gain = 0.0;        // v(N) - sum of singleton values
};

inline StabilityReport stability_report(const TUGame& game, const std::string& group_id) {
  const int n = game.players();
  StabilityReport r{group_id, game, check_property(game, GameProperty::additivity),
                    check_property(game, GameProperty::superadditivity), false, {}, 0.0};
  r.core_empty = core_is_empty(game).empty;
  const PayoffVector equal(std::vector<double>(static_cast<std::size_t>(n), game.grand_value() / n));
  r.blocking = core_contains(game, equal).blocking;
  double singles = 0.0;
  for (int i = 0; i < n; ++i) singles += game.value(Coalition::single(i));
  r.grand_coalition_gain = game.grand_value() - singles;
  return r;
}

/// One report per team, ordered by team key.
inline std::vector<StabilityReport> stability_reports(const SessionDataset& data, const GameConstructionConfig& config) {
  std::vector<StabilityReport> out;
  for (const auto& [key, members] : data.teams()) out.push_back(stability_report(build_team_game(data, key, config), key));
  return out;
}

struct StudentShapley {
  std::string session_id;
  std::string team;  // team key
  std::string student_id;
  double value = 0.0;
};

struct ShapleyTable {
  std::vector<StudentShapley> rows;      // by team key, then member order
  std::map<std::string, double> grand;   // team key -> v(N)

  /// Value of one student in one session.
  double at(const std::string& session_id, const std::string& student_id) const {
    for (const auto& r : rows) {
      if (r.session_id == session_id && r.student_id == student_id) return r.value;
    }
    throw Error(ErrorKind::usage, "no Shapley value for student " + student_id + " in session " + session_id);
  }
};

inline ShapleyTable shapley_per_student(const SessionDataset& data, const GameConstructionConfig& config) {
  ShapleyTable out;
  for (const auto& [key, idx] : data.teams()) {
    const TUGame game = build_team_game(data, key, config);
    const PayoffVector phi = shapley(game);
    out.grand[key] = game.grand_value();
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto& r = data.records()[idx[k]];
      out.rows.push_back({r.session_id, key, r.student_id, phi[static_cast<int>(k)]});
    }
  }
  return out;
}

inline nlohmann::json to_json(const StabilityReport& r) {
  return {{"group", r.group_id},
          {"game", game_to_json(r.game)},
          {"additive", witness_to_json(r.additive)},
          {"superadditive", witness_to_json(r.superadditive)},
          {"core_empty", r.core_empty},
          {"blocking_equal_split", blocking_to_json(r.blocking)},
          {"grand_coalition_gain", r.grand_coalition_gain}};
}

inline StabilityReport stability_from_json(const nlohmann::json& j) {
  const TUGame game = game_from_json(j.at("game"));
  StabilityReport r{j.at("group").get<std::string>(), game,
                    witness_from_json(j.at("additive"), game.players()),
                    witness_from_json(j.at("superadditive"), game.players()),
                    j.at("core_empty").get<bool>(), {}, j.at("grand_coalition_gain").get<double>()};
  for (const auto& b : j.at("blocking_equal_split")) {
    r.blocking.push_back({Coalition::parse(b.at("coalition").get<std::string>(), game.players()),
                          b.at("deficit").get<double>()});
  }
  return r;
}

inline nlohmann::json to_json(const ShapleyTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    rows.push_back({{"session_id", r.session_id}, {"team", r.team}, {"student_id", r.student_id}, {"shapley", r.value}});
  }
  return {{"students", rows}, {"grand_values", t.grand}};
}

}  // namespace collabgame
