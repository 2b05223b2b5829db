#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "collabgame/game_builder.hpp"
#include "collabgame/synth.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace collabgame;
using testing_helpers::full_ratings;
using testing_helpers::record;

namespace {

const GameConstructionConfig kOpinion{GameMode::opinion, 1.0, 1.0};
const GameConstructionConfig kContribution{GameMode::contribution, 1.0, 1.0};

Coalition set(std::initializer_list<int> players) {
  Coalition s;
  for (int p : players) s = s.with(p - 1);
  return s;
}

struct RandomGroup {
  std::vector<StudentRecord> members;
  RatingMatrix ratings;
};

RandomGroup random_group(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> size(2, 4), ordinal(1, 5);
  std::uniform_real_distribution<double> score(0.0, 5.0);
  RandomGroup g;
  const int n = size(rng);
  for (int i = 0; i < n; ++i) {
    auto r = record("s" + std::to_string(i + 1), "T1", score(rng), ordinal(rng));
    g.members.push_back(r);
  }
  for (const auto& a : g.members) {
    for (const auto& b : g.members) {
      if (a.student_id != b.student_id) g.ratings[{a.session_id, a.student_id, b.student_id}] = score(rng);
    }
  }
  return g;
}

std::vector<int> argmax(const PayoffVector& x) {
  double best = x[0];
  for (int i = 1; i < x.size(); ++i) best = std::max(best, x[i]);
  std::vector<int> out;
  for (int i = 0; i < x.size(); ++i) {
    if (best - x[i] <= tolerance(best)) out.push_back(i);
  }
  return out;
}

}  // namespace

TEST(OpinionGame, DyadExample) {
  std::vector<StudentRecord> g = {record("a", "T1", 3.0, 3), record("b", "T1", 3.0, 5)};
  RatingMatrix m{{{"S1", "a", "b"}, 4.0}, {{"S1", "b", "a"}, 2.0}};
  const auto game = build_opinion_game(g, m, kOpinion);
  EXPECT_EQ(game(set({1})), 3.0);
  EXPECT_EQ(game(set({2})), 5.0);
  EXPECT_EQ(game(set({1, 2})), 3.0);
  EXPECT_FALSE(check_property(game, GameProperty::superadditivity).holds);
}

TEST(OpinionGame, ZeroSingletonsAreSuperadditive) {
  std::vector<StudentRecord> g = {record("a", "T1", 3.0, 0), record("b", "T1", 3.0, 0)};
  const auto game = build_opinion_game(g, full_ratings(g, 5.0), kOpinion);
  EXPECT_EQ(game(set({1})), 0.0);
  EXPECT_EQ(game(set({2})), 0.0);
  EXPECT_EQ(game(set({1, 2})), 5.0);
  EXPECT_TRUE(check_property(game, GameProperty::superadditivity).holds);
}

TEST(OpinionGame, ConstantRatingsScaled) {
  std::vector<StudentRecord> g = {record("a", "T1"), record("b", "T1"), record("c", "T1")};
  auto cfg = kOpinion;
  cfg.coalition_scale = 2.0;
  const auto game = build_opinion_game(g, full_ratings(g, 3.0), cfg);
  for (Coalition::mask_type m = 1; m < 8; ++m) {
    const Coalition s{m};
    if (s.size() >= 2) EXPECT_EQ(game(s), 6.0) << s.to_string();
  }
}

TEST(OpinionGame, OnlyMembersRatingsCount) {
  std::vector<StudentRecord> g = {record("a", "T1"), record("b", "T1"), record("c", "T1")};
  auto m = full_ratings(g, 1.0);
  m[{"S1", "a", "b"}] = 4.0;
  m[{"S1", "c", "a"}] = 5.0;
  const auto game = build_opinion_game(g, m, kOpinion);
  EXPECT_DOUBLE_EQ(game(set({1, 2})), (4.0 + 1.0) / 2.0);
  EXPECT_DOUBLE_EQ(game(set({2, 3})), 1.0);
  EXPECT_DOUBLE_EQ(game(set({1, 2, 3})), (4.0 + 5.0 + 4 * 1.0) / 6.0);
}

TEST(OpinionGame, Errors) {
  std::vector<StudentRecord> g = {record("a", "T1"), record("b", "T1")};
  auto m = full_ratings(g);
  m.erase({"S1", "b", "a"});
  try {
    build_opinion_game(g, m, kOpinion);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::incomplete_data);
    EXPECT_NE(std::string(e.what()).find("b->a"), std::string::npos);
  }
  std::vector<StudentRecord> mixed = {record("a", "T1"), record("b", "T2")};
  try {
    build_opinion_game(mixed, full_ratings(g), kOpinion);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::grouping);
  }
  EXPECT_THROW(build_opinion_game(g, full_ratings(g), kContribution), Error);
  std::vector<StudentRecord> solo = {record("a", "T1")};
  EXPECT_THROW(build_opinion_game(solo, {}, kOpinion), Error);
  auto bad = kOpinion;
  bad.coalition_scale = 0.0;
  EXPECT_THROW(build_opinion_game(g, full_ratings(g), bad), Error);
}

TEST(ContributionGame, Examples) {
  std::vector<StudentRecord> triad = {record("a", "T1", 4.5), record("b", "T1", 4.5), record("c", "T1", 4.5)};
  const auto flat = build_contribution_game(triad, kContribution);
  for (Coalition::mask_type m = 1; m < 8; ++m) EXPECT_DOUBLE_EQ(flat(Coalition{m}), 4.5);

  std::vector<StudentRecord> dyad = {record("a", "T1", 2.0), record("b", "T1", 4.0)};
  const auto game = build_contribution_game(dyad, kContribution);
  EXPECT_EQ(game(set({1})), 2.0);
  EXPECT_EQ(game(set({2})), 4.0);
  EXPECT_EQ(game(set({1, 2})), 3.0);
  EXPECT_FALSE(check_property(game, GameProperty::superadditivity).holds);
  const auto phi = shapley(game);
  EXPECT_DOUBLE_EQ(phi[0], 0.5);
  EXPECT_DOUBLE_EQ(phi[1], 2.5);
  const auto perm = oracle::shapley_by_permutations(2, {game.values().begin(), game.values().end()});
  EXPECT_DOUBLE_EQ(perm[0], 0.5);
  EXPECT_DOUBLE_EQ(perm[1], 2.5);
}

TEST(ContributionGame, MissingContribution) {
  std::vector<StudentRecord> dyad = {record("a", "T1", 2.0), record("b", "T1", 4.0)};
  dyad[1].observed_contribution.reset();
  try {
    build_contribution_game(dyad, kContribution);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::incomplete_data);
  }
}

TEST(Stability, OpinionDyad) {
  std::vector<StudentRecord> g = {record("a", "T1", 3.0, 3), record("b", "T1", 3.0, 5)};
  RatingMatrix m{{{"S1", "a", "b"}, 4.0}, {{"S1", "b", "a"}, 2.0}};
  const auto r = stability_report(build_opinion_game(g, m, kOpinion), "S1/T1");
  EXPECT_FALSE(r.additive.holds);
  EXPECT_FALSE(r.superadditive.holds);
  EXPECT_EQ(r.grand_coalition_gain, -5.0);
  EXPECT_TRUE(r.core_empty);
}

TEST(Stability, AdditiveGame) {
  const auto game = TUGame::from_function(3, [](Coalition s) {
    const double w[] = {2, 5, 7};
    double t = 0;
    for (int p : s.members()) t += w[p];
    return t;
  });
  const auto r = stability_report(game, "g");
  EXPECT_TRUE(r.additive.holds);
  EXPECT_TRUE(r.superadditive.holds);
  EXPECT_FALSE(r.core_empty);
  EXPECT_NEAR(r.grand_coalition_gain, 0.0, 1e-12);
  bool found = false;
  for (const auto& b : r.blocking) {
    EXPECT_GT(b.deficit, 0.0);
    if (b.coalition == set({3})) {
      found = true;
      EXPECT_NEAR(b.deficit, 7.0 / 3.0, 1e-12);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Stability, UnanimityGame) {
  const auto game = TUGame::from_function(3, [](Coalition s) { return s.size() == 3 ? 1.0 : 0.0; });
  const auto r = stability_report(game, "g");
  EXPECT_FALSE(r.core_empty);
  EXPECT_TRUE(r.blocking.empty());
}

TEST(Stability, JsonRoundTrip) {
  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    const auto g = random_group(rng);
    const auto r = stability_report(build_opinion_game(g.members, g.ratings, kOpinion), "S1/T1");
    const auto j = to_json(r);
    EXPECT_EQ(to_json(stability_from_json(nlohmann::json::parse(j.dump()))), j);
  }
}

TEST(ShapleyPerStudent, DyadDataset) {
  std::vector<StudentRecord> recs = {record("s1", "T1", 2.0), record("s2", "T1", 4.0)};
  const SessionDataset d(recs, full_ratings(recs));
  const auto t = shapley_per_student(d, kContribution);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_DOUBLE_EQ(t.at("S1", "s1"), 0.5);
  EXPECT_DOUBLE_EQ(t.at("S1", "s2"), 2.5);
}

TEST(ShapleyPerStudent, IdenticalMembersShareEqually) {
  std::vector<StudentRecord> recs = {record("s1", "T1", 3.3), record("s2", "T1", 3.3), record("s3", "T1", 3.3)};
  const SessionDataset d(recs, full_ratings(recs, 2.0));
  for (const auto& cfg : {kOpinion, kContribution}) {
    const auto t = shapley_per_student(d, cfg);
    EXPECT_NEAR(t.rows[0].value, t.rows[1].value, 1e-12);
    EXPECT_NEAR(t.rows[1].value, t.rows[2].value, 1e-12);
  }
}

TEST(ShapleyPerStudent, EfficiencyOnEveryTeamOfSyntheticFixture) {
  const auto d = synthesize(GenConfig{}, 17).dataset;
  for (const auto& cfg : {kOpinion, kContribution}) {
    const auto t = shapley_per_student(d, cfg);
    EXPECT_EQ(t.grand.size(), 31u);
    std::map<std::string, double> sums;
    for (const auto& r : t.rows) sums[r.team] += r.value;
    for (const auto& [team, members] : d.teams()) {
      double mean = 0.0;
      for (auto i : members) {
        mean += cfg.mode == GameMode::contribution ? *d.records()[i].observed_contribution : 0.0;
      }
      if (cfg.mode == GameMode::contribution) {
        EXPECT_NEAR(sums[team], mean / static_cast<double>(members.size()), 1e-9) << team;
      } else {
        double total = 0.0;
        int pairs = 0;
        for (auto a : members) {
          for (auto b : members) {
            if (a == b) continue;
            total += *d.rating(d.records()[a].session_id, d.records()[a].student_id, d.records()[b].student_id);
            ++pairs;
          }
        }
        EXPECT_NEAR(sums[team], total / pairs, 1e-9) << team;
      }
    }
  }
}

TEST(ShapleyPerStudent, ErrorsNameTheTeam) {
  std::vector<StudentRecord> recs = {record("s1", "T1", 2.0), record("s2", "T1", 4.0)};
  recs[1].observed_contribution.reset();
  const SessionDataset d(recs, full_ratings(recs));
  try {
    shapley_per_student(d, kContribution);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("S1/T1"), std::string::npos);
    EXPECT_EQ(e.kind(), ErrorKind::incomplete_data);
  }
  EXPECT_THROW(team_members(d, "S9/T9"), Error);
}

TEST(GameProperties, LocalityOverRandomGroups) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> score(0.0, 5.0);
  for (int k = 0; k < 500; ++k) {
    const auto g = random_group(rng);
    const int n = static_cast<int>(g.members.size());
    const int outsider = static_cast<int>(rng() % static_cast<std::uint64_t>(n));
    auto changed = g;
    auto& o = changed.members[static_cast<std::size_t>(outsider)];
    o.background = *o.background % 5 + 1;
    o.observed_contribution = score(rng);
    for (auto& [key, v] : changed.ratings) {
      if (key.rater_id == o.student_id || key.ratee_id == o.student_id) v = score(rng);
    }
    for (const auto& cfg : {kOpinion, kContribution}) {
      const auto before = build_game(g.members, g.ratings, cfg);
      const auto after = build_game(changed.members, changed.ratings, cfg);
      for (Coalition::mask_type m = 1; m < before.coalition_count(); ++m) {
        const Coalition s{m};
        if (!s.contains(outsider)) EXPECT_EQ(before(s), after(s));
      }
    }
  }
}

TEST(GameProperties, ScaleEquivarianceOverRandomGroups) {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> factor(0.1, 10.0);
  for (int k = 0; k < 500; ++k) {
    const auto g = random_group(rng);
    const double c = factor(rng);
    for (auto cfg : {kOpinion, kContribution}) {
      const auto base = build_game(g.members, g.ratings, cfg);
      cfg.coalition_scale *= c;
      const auto scaled = build_game(g.members, g.ratings, cfg);
      for (Coalition::mask_type m = 1; m < base.coalition_count(); ++m) {
        const Coalition s{m};
        if (s.size() >= 2 || cfg.mode == GameMode::contribution) {
          EXPECT_NEAR(scaled(s), c * base(s), 1e-12 * std::max(1.0, c * std::abs(base(s))));
        } else {
          EXPECT_EQ(scaled(s), base(s));
        }
      }
      if (cfg.mode == GameMode::contribution) {
        const auto phi = shapley(base);
        const auto phi_c = shapley(scaled);
        for (int i = 0; i < phi.size(); ++i) EXPECT_NEAR(phi_c[i], c * phi[i], 1e-9 * std::max(1.0, c));
        EXPECT_EQ(argmax(phi), argmax(phi_c));
      }
    }
  }
}

TEST(GameProperties, ValuesStayOnRatingScale) {
  std::mt19937_64 rng(303);
  for (int k = 0; k < 500; ++k) {
    const auto g = random_group(rng);
    for (const auto& cfg : {kOpinion, kContribution}) {
      const auto game = build_game(g.members, g.ratings, cfg);
      for (Coalition::mask_type m = 1; m < game.coalition_count(); ++m) {
        EXPECT_GE(game(Coalition{m}), 0.0);
        EXPECT_LE(game(Coalition{m}), 5.0);
      }
    }
  }
}

TEST(GameProperties, ReportConsistency) {
  std::mt19937_64 rng(404);
  for (int k = 0; k < 300; ++k) {
    const auto g = random_group(rng);
    for (const auto& cfg : {kOpinion, kContribution}) {
      const auto r = stability_report(build_game(g.members, g.ratings, cfg), "g");
      if (r.additive.holds) {
        EXPECT_TRUE(r.superadditive.holds);
        EXPECT_FALSE(r.core_empty);
      }
      for (const auto& b : r.blocking) EXPECT_GT(b.deficit, 0.0);
      double singles = 0.0;
      for (int i = 0; i < r.game.players(); ++i) singles += r.game(Coalition::single(i));
      EXPECT_NEAR(r.grand_coalition_gain, r.game.grand_value() - singles, 1e-9);
    }
  }
}
