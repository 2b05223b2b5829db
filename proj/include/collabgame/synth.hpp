#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "collabgame/config.hpp"
#include "collabgame/dataset.hpp"

namespace collabgame {

/// y = intercept + sum beta[p] * p + u_team + e, u ~ N(0, tau2), e ~ N(0, sigma2).
struct ResponseModel {
  double intercept = 0.0;
  std::map<std::string, double> beta;
  double tau2 = 0.0;
  double sigma2 = 0.0;
};

inline const std::vector<std::string>& ordinal_predictors() {
  static const std::vector<std::string> v = {"content_engaging", "background", "fits_needs", "opinion_before"};
  return v;
}

/// Generated responses, in generation order. Each may use the ordinals and any earlier response.
inline const std::vector<std::string>& synthetic_responses() {
  static const std::vector<std::string> v = {"observed_contribution", "peer_contribution_score", "learning_outcome",
                                             "group_grade"};
  return v;
}

struct GenConfig {
  std::map<int, int> group_sizes{{2, 11}, {3, 15}, {4, 5}};  // team size -> team count
  int sessions = 2;
  std::vector<double> personality_probs = std::vector<double>(16, 1.0);
  std::vector<double> learning_style_probs = std::vector<double>(4, 1.0);
  std::map<std::string, std::vector<double>> ordinal_probs = {
      {"content_engaging", {1, 1, 1, 1, 1}},
      {"background", {1, 1, 1, 1, 1}},
      {"fits_needs", {1, 1, 1, 1, 1}},
      {"opinion_before", {1, 1, 1, 1, 1}}};
  std::map<std::string, ResponseModel> responses = {
      {"observed_contribution", {4.0, {}, 0.4, 0.6}},
      {"peer_contribution_score", {4.0, {}, 0.4, 0.6}},
      {"learning_outcome", {1.0, {}, 0.5, 1.5}},
      {"group_grade", {4.0, {}, 0.4, 0.6}}};
  double rating_noise_sd = 0.5;

  /// Throws a config error naming the offending setting.
  void validate() const {
    auto fail = [](const std::string& what) { throw Error(ErrorKind::config, what); };
    if (sessions < 1) fail("sessions must be >= 1");
    int teams = 0;
    for (auto [size, count] : group_sizes) {
      if (size < kMinTeamSize || size > kMaxTeamSize) fail("groups: team size " + std::to_string(size) + " outside 2..4");
      if (count < 0) fail("groups: negative team count");
      teams += count;
    }
    if (teams == 0) fail("groups: no teams configured");
    auto probs = [&](const std::string& name, const std::vector<double>& p, std::size_t len) {
      if (p.size() != len) fail(name + ": expected " + std::to_string(len) + " probabilities");
      double s = 0.0;
      for (double x : p) {
        if (!(x >= 0.0) || !std::isfinite(x)) fail(name + ": probabilities must be finite and nonnegative");
        s += x;
      }
      if (s <= 0.0) fail(name + ": probabilities sum to zero");
    };
    probs("personality_type.probs", personality_probs, 16);
    probs("learning_style.probs", learning_style_probs, 4);
    for (const auto& name : ordinal_predictors()) probs(name + ".probs", ordinal_probs.at(name), 5);
    for (std::size_t k = 0; k < synthetic_responses().size(); ++k) {
      const auto& name = synthetic_responses()[k];
      const auto& m = responses.at(name);
      if (!(m.tau2 >= 0.0) || !std::isfinite(m.tau2)) fail(name + ".tau2 must be a finite nonnegative variance");
      if (!(m.sigma2 >= 0.0) || !std::isfinite(m.sigma2)) fail(name + ".sigma2 must be a finite nonnegative variance");
      if (!std::isfinite(m.intercept)) fail(name + ".intercept must be finite");
      for (const auto& [pred, b] : m.beta) {
        const bool ordinal = std::find(ordinal_predictors().begin(), ordinal_predictors().end(), pred) !=
                             ordinal_predictors().end();
        const auto earlier_end = synthetic_responses().begin() + static_cast<std::ptrdiff_t>(k);
        const bool earlier = std::find(synthetic_responses().begin(), earlier_end, pred) != earlier_end;
        if (!ordinal && !earlier) fail(name + ".beta." + pred + ": unknown or not-yet-generated predictor");
        if (!std::isfinite(b)) fail(name + ".beta." + pred + " must be finite");
      }
    }
    if (!(rating_noise_sd >= 0.0) || !std::isfinite(rating_noise_sd)) fail("ratings.noise_sd must be >= 0");
  }

  /// Reads `groups = 2:11,3:15,4:5`, `sessions`, `<categorical>.probs`, `<ordinal>.probs`,
  /// `<response>.intercept|tau2|sigma2|beta.<predictor>` and `ratings.noise_sd`.
  static GenConfig from_config(const KeyValueConfig& cfg) {
    GenConfig g;
    if (cfg.has("groups")) {
      g.group_sizes.clear();
      for (const auto& item : cfg.get_strings("groups", {})) {
        const auto colon = item.find(':');
        auto size = colon == std::string::npos ? std::nullopt : csv::parse_int(item.substr(0, colon));
        auto count = colon == std::string::npos ? std::nullopt : csv::parse_int(item.substr(colon + 1));
        if (!size || !count) throw cfg.error("groups", "expected size:count pairs, got '" + item + "'");
        g.group_sizes[static_cast<int>(*size)] += static_cast<int>(*count);
      }
    }
    g.sessions = static_cast<int>(cfg.get_int("sessions", g.sessions));
    g.personality_probs = cfg.get_doubles("personality_type.probs", g.personality_probs);
    g.learning_style_probs = cfg.get_doubles("learning_style.probs", g.learning_style_probs);
    for (const auto& name : ordinal_predictors()) g.ordinal_probs[name] = cfg.get_doubles(name + ".probs", g.ordinal_probs[name]);
    for (const auto& name : synthetic_responses()) {
      auto& m = g.responses[name];
      m.intercept = cfg.get_double(name + ".intercept", m.intercept);
      m.tau2 = cfg.get_double(name + ".tau2", m.tau2);
      m.sigma2 = cfg.get_double(name + ".sigma2", m.sigma2);
      for (const auto& key : cfg.keys_with_prefix(name + ".beta.")) {
        m.beta[key.substr(name.size() + 6)] = cfg.get_double(key, 0.0);
      }
    }
    g.rating_noise_sd = cfg.get_double("ratings.noise_sd", g.rating_noise_sd);
    cfg.reject_unused();
    try {
      g.validate();
    } catch (const Error& e) {
      throw Error(ErrorKind::config, "config: " + std::string(e.what()));
    }
    return g;
  }
};

struct SynthResult {
  SessionDataset dataset;
  double clamp_fraction = 0.0;                    // over all generated response values
  std::map<std::string, double> clamp_by_response;
};

/// Draws a dataset from the two-level model. Deterministic for a fixed seed: the sequence of
/// random draws does not depend on the variance settings.
inline SynthResult synthesize(const GenConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  auto pick = [&rng](const std::vector<double>& p) {
    std::discrete_distribution<int> d(p.begin(), p.end());
    return d(rng);
  };

  std::vector<StudentRecord> records;
  std::map<std::string, double> clamps;
  std::size_t generated_per_response = 0;
  std::vector<std::vector<std::size_t>> teams;

  int team_no = 0;
  int student_no = 0;
  for (auto [size, count] : config.group_sizes) {
    for (int c = 0; c < count; ++c, ++team_no) {
      const std::string session = "S" + std::to_string(team_no % config.sessions + 1);
      char team_id[16];
      std::snprintf(team_id, sizeof team_id, "T%02d", team_no + 1);

      std::map<std::string, double> u;
      for (const auto& name : synthetic_responses()) u[name] = std::sqrt(config.responses.at(name).tau2) * z(rng);

      std::vector<std::size_t> members;
      for (int k = 0; k < size; ++k) {
        StudentRecord r;
        char sid[16];
        std::snprintf(sid, sizeof sid, "P%03d", ++student_no);
        r.student_id = sid;
        r.team_id = team_id;
        r.session_id = session;
        r.personality_type = std::string(kPersonalityTypes[static_cast<std::size_t>(pick(config.personality_probs))]);
        r.learning_style = std::string(kLearningStyles[static_cast<std::size_t>(pick(config.learning_style_probs))]);
        std::map<std::string, double> x;
        for (const auto& name : ordinal_predictors()) x[name] = 1 + pick(config.ordinal_probs.at(name));
        r.content_engaging = static_cast<int>(x["content_engaging"]);
        r.background = static_cast<int>(x["background"]);
        r.fits_needs = static_cast<int>(x["fits_needs"]);
        r.opinion_before = static_cast<int>(x["opinion_before"]);

        for (const auto& name : synthetic_responses()) {
          const auto& m = config.responses.at(name);
          double y = m.intercept + u[name] + std::sqrt(m.sigma2) * z(rng);
          for (const auto& [pred, b] : m.beta) y += b * x.at(pred);
          double stored = y;
          if (name == "learning_outcome") {
            const double post = std::clamp(x["background"] + y, 0.0, 5.0);
            if (post != x["background"] + y) clamps[name] += 1;
            r.post_quiz = post;
            stored = post - x["background"];
            r.learning_outcome = stored;
          } else {
            stored = std::clamp(y, 0.0, 5.0);
            if (stored != y) clamps[name] += 1;
            if (name == "observed_contribution") r.observed_contribution = stored;
            if (name == "peer_contribution_score") r.peer_contribution_score = stored;
            if (name == "group_grade") r.group_grade = stored;
          }
          x[name] = stored;
        }
        ++generated_per_response;
        members.push_back(records.size());
        records.push_back(std::move(r));
      }
      teams.push_back(std::move(members));
    }
  }

  RatingMatrix ratings;
  for (const auto& members : teams) {
    for (auto rater : members) {
      for (auto ratee : members) {
        if (rater == ratee) continue;
        const double s = *records[ratee].peer_contribution_score + config.rating_noise_sd * z(rng);
        ratings[{records[rater].session_id, records[rater].student_id, records[ratee].student_id}] =
            std::clamp(s, 0.0, 5.0);
      }
    }
  }

  SynthResult out{SessionDataset(std::move(records), std::move(ratings)), 0.0, {}};
  double total = 0.0;
  for (const auto& name : synthetic_responses()) {
    const double c = clamps.count(name) ? clamps[name] : 0.0;
    out.clamp_by_response[name] = c / static_cast<double>(generated_per_response);
    total += c;
  }
  out.clamp_fraction = total / static_cast<double>(generated_per_response * synthetic_responses().size());
  return out;
}

}  // namespace collabgame
