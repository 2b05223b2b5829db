// Command-line front end: describe, summarize, fit, game, pipeline, synth.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "collabgame/describe.hpp"
#include "collabgame/game_builder.hpp"
#include "collabgame/model_json.hpp"
#include "collabgame/pipeline.hpp"
#include "collabgame/synth.hpp"

namespace cg = collabgame;

namespace {

struct DataArgs {
  std::string records;
  std::string ratings;

  void add(CLI::App* app) {
    app->add_option("--records", records, "student records CSV")->required();
    app->add_option("--ratings", ratings, "peer ratings CSV")->required();
  }

  /// Loaded dataset with learning_outcome derived where post_quiz and background are present.
  cg::SessionDataset load() const {
    auto derived = cg::derive_outcomes(cg::load(records, ratings), false);
    for (const auto& w : derived.warnings) std::cerr << "warning: " << w << '\n';
    return std::move(derived.dataset);
  }
};

std::string fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void print_json(const nlohmann::json& j) { std::cout << j.dump(2) << '\n'; }

// ---------------------------------------------------------------------------------------------

int run_describe(const DataArgs& data, bool json) {
  const auto report = cg::describe(data.load());
  if (json) print_json(cg::to_json(report));
  else cg::print(std::cout, report);
  return 0;
}

int run_summarize(const DataArgs& data, const std::string& by, const std::string& variable, bool json) {
  const auto rows = cg::emit_group_summaries(data.load(), by, variable);
  if (!json) {
    cg::write_summaries_csv(std::cout, rows);
    return 0;
  }
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"group", r.group}, {"level", r.level}, {"count", r.count}, {"min", r.min}, {"q1", r.q1},
                   {"median", r.median}, {"q3", r.q3}, {"max", r.max}});
  }
  print_json({{"variable", variable}, {"by", by}, {"summaries", arr}});
  return 0;
}

struct FitArgs {
  std::string response;
  std::vector<std::string> predictors;
  std::string grouping = "team";
  bool null_only = false;
  bool screen = false;
  bool stepwise = false;
  double alpha = 0.05;
};

int run_fit(const DataArgs& data, const FitArgs& a, bool json) {
  const auto table = cg::to_table(data.load());
  if (a.null_only && !a.predictors.empty()) throw cg::Error(cg::ErrorKind::usage, "--null cannot be combined with --predictors");
  if (a.screen) {
    const auto s = cg::screen_predictors(table, a.response, a.grouping, a.predictors, a.alpha);
    if (json) print_json(cg::to_json(s));
    else cg::print(std::cout, s);
    return 0;
  }
  if (a.stepwise) {
    const auto s = cg::forward_select(table, a.response, a.grouping, a.predictors, a.alpha);
    if (json) {
      print_json(cg::to_json(s));
    } else {
      for (const auto& st : s.steps) std::cout << "added " << st.added << " (LRT p = " << st.lrt_p_value << ")\n";
      std::cout << '\n';
      cg::print(std::cout, cg::compare(s.null_fit, s.final_fit));
    }
    return 0;
  }
  const auto null_fit = cg::fit(table, {a.response, {}, a.grouping});
  if (a.null_only || a.predictors.empty()) {
    if (json) print_json(cg::to_json(null_fit));
    else cg::print(std::cout, null_fit);
    return 0;
  }
  const auto cmp = cg::compare(null_fit, cg::fit(table, {a.response, a.predictors, a.grouping}));
  if (json) print_json(cg::to_json(cmp));
  else cg::print(std::cout, cmp);
  return 0;
}

// ---------------------------------------------------------------------------------------------

struct GameArgs {
  DataArgs data;
  std::string game_file;
  std::string mode = "contribution";
  std::string team;
  double singleton_scale = 1.0;
  double coalition_scale = 1.0;
};

struct NamedGame {
  std::string name;
  cg::TUGame game;
  std::vector<std::string> players;
};

std::vector<NamedGame> selected_games(const GameArgs& a) {
  std::vector<NamedGame> out;
  if (!a.game_file.empty()) {
    std::ifstream in(a.game_file);
    if (!in) throw cg::Error(cg::ErrorKind::io, a.game_file + ": file not found");
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw cg::Error(cg::ErrorKind::parse, a.game_file + ": " + e.what());
    }
    auto game = cg::game_from_json(j);
    std::vector<std::string> players;
    for (int i = 1; i <= game.players(); ++i) players.push_back(std::to_string(i));
    out.push_back({a.game_file, std::move(game), std::move(players)});
    return out;
  }
  if (a.data.records.empty() || a.data.ratings.empty()) {
    throw cg::Error(cg::ErrorKind::usage, "either --game or both --records and --ratings are required");
  }
  const cg::GameConstructionConfig cfg{cg::parse_mode(a.mode), a.singleton_scale, a.coalition_scale};
  const auto data = a.data.load();
  std::vector<std::string> keys;
  if (a.team.empty()) {
    for (const auto& [key, members] : data.teams()) keys.push_back(key);
  } else {
    keys.push_back(a.team);
  }
  for (const auto& key : keys) {
    auto game = cg::build_team_game(data, key, cfg);
    std::vector<std::string> players;
    for (const auto& r : cg::team_members(data, key)) players.push_back(r.student_id);
    out.push_back({key, std::move(game), std::move(players)});
  }
  return out;
}

int run_game(const std::string& action, const GameArgs& a, bool json) {
  const auto games = selected_games(a);
  nlohmann::json all = nlohmann::json::array();
  for (const auto& g : games) {
    if (action == "build") {
      all.push_back({{"group", g.name}, {"players", g.players}, {"game", cg::game_to_json(g.game)}});
    } else if (action == "shapley") {
      const auto phi = cg::shapley(g.game);
      if (json) {
        nlohmann::json values = nlohmann::json::object();
        for (int i = 0; i < phi.size(); ++i) values[g.players[static_cast<std::size_t>(i)]] = phi[i];
        all.push_back({{"group", g.name}, {"shapley", values}, {"grand_value", g.game.grand_value()}});
      } else {
        std::cout << g.name << '\n';
        for (int i = 0; i < phi.size(); ++i) std::cout << "  " << g.players[static_cast<std::size_t>(i)] << "  " << fixed(phi[i], 6) << '\n';
      }
    } else if (action == "core") {
      const auto c = cg::core_is_empty(g.game);
      if (json) {
        nlohmann::json j = {{"group", g.name}, {"empty", c.empty}};
        j["certificate"] = c.certificate ? cg::payoff_to_json(*c.certificate) : nlohmann::json(nullptr);
        all.push_back(j);
      } else {
        std::cout << g.name << ": " << (c.empty ? "empty" : "nonempty");
        if (c.certificate) {
          std::cout << "  core point:";
          for (int i = 0; i < c.certificate->size(); ++i) std::cout << ' ' << fixed((*c.certificate)[i], 6);
        }
        std::cout << '\n';
      }
    } else {
      const auto r = cg::stability_report(g.game, g.name);
      if (json) {
        all.push_back(cg::to_json(r));
      } else {
        std::cout << g.name << ": additive " << (r.additive.holds ? "yes" : "no") << ", superadditive "
                  << (r.superadditive.holds ? "yes" : "no") << ", core " << (r.core_empty ? "empty" : "nonempty")
                  << ", grand coalition gain " << fixed(r.grand_coalition_gain, 4) << '\n';
        for (const auto& b : r.blocking) {
          std::cout << "  blocks equal split: {" << b.coalition.to_string() << "} deficit " << fixed(b.deficit, 4)
                    << '\n';
        }
      }
    }
  }
  if (action == "build") {
    print_json(games.size() == 1 && !a.game_file.empty() ? all[0]["game"] : all);
  } else if (json) {
    print_json(all);
  }
  return 0;
}

// ---------------------------------------------------------------------------------------------

int run_pipeline(const DataArgs& data, const std::string& config_path, std::uint64_t seed, const std::string& out,
                 bool stepwise, std::optional<double> alpha, bool json) {
  cg::PipelineConfig cfg;
  if (!config_path.empty()) cfg = cg::PipelineConfig::from_config(cg::KeyValueConfig::load(config_path));
  if (stepwise) cfg.stepwise = true;
  if (alpha) {
    if (!(*alpha > 0.0 && *alpha < 1.0)) throw cg::Error(cg::ErrorKind::usage, "--alpha must lie in (0, 1)");
    cfg.alpha = *alpha;
  }
  const auto result = cg::run_pipeline(data.load(), cfg, seed);
  cg::write_outputs(out, result.files);
  if (json) {
    print_json(result.report);
  } else {
    std::cout << "wrote " << result.files.size() << " files to " << out << '\n';
    for (const char* key : {"table3", "table5", "table7"}) {
      const auto& t = result.report[key];
      std::cout << "  " << t["response"].get<std::string>() << ": best predictor " << t["selected"].get<std::string>()
                << " (LRT p = " << t["comparison"]["p_value"].get<double>() << ")"
                << (t["significant"].get<bool>() ? " significant" : "") << '\n';
    }
  }
  return 0;
}

int run_synth(const std::string& config_path, std::uint64_t seed, const std::string& out) {
  cg::GenConfig cfg;
  if (!config_path.empty()) cfg = cg::GenConfig::from_config(cg::KeyValueConfig::load(config_path));
  const auto result = cg::synthesize(cfg, seed);
  std::error_code ec;
  std::filesystem::create_directories(out, ec);
  if (ec) throw cg::Error(cg::ErrorKind::io, out + ": cannot create directory: " + ec.message());
  const auto rec = (std::filesystem::path(out) / "records.csv").string();
  const auto rat = (std::filesystem::path(out) / "ratings.csv").string();
  cg::save(result.dataset, rec, rat);
  std::cout << "wrote " << result.dataset.size() << " records to " << rec << " and " << rat << '\n';
  if (result.clamp_fraction > 0.0) {
    std::cout << "clamped to the 0..5 scale: " << fixed(100.0 * result.clamp_fraction, 1) << "% of generated values\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative-game and multilevel analysis of collaborative learning sessions"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "machine-readable JSON output");

  DataArgs describe_data;
  auto* describe = app.add_subcommand("describe", "descriptive statistics of a session dataset");
  describe_data.add(describe);
  describe->add_flag("--json", json, "JSON output");

  DataArgs summarize_data;
  std::string by = "team", variable = "observed_contribution";
  auto* summarize = app.add_subcommand("summarize", "five-number summaries of a variable per group level");
  summarize_data.add(summarize);
  summarize->add_option("--by", by, "personality_type, learning_style or team")->capture_default_str();
  summarize->add_option("--variable", variable, "continuous column")->capture_default_str();
  summarize->add_flag("--json", json, "JSON output");

  DataArgs fit_data;
  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "random-intercept model, compared with the null model");
  fit_data.add(fit);
  fit->add_option("--response", fit_args.response, "response column")->required();
  fit->add_option("--predictors", fit_args.predictors, "fixed predictors")->delimiter(',');
  fit->add_option("--grouping", fit_args.grouping, "grouping column")->capture_default_str();
  fit->add_flag("--null", fit_args.null_only, "fit the null model only");
  fit->add_flag("--screen", fit_args.screen, "screen each predictor on its own against the null model");
  fit->add_flag("--stepwise", fit_args.stepwise, "forward selection over the predictors");
  fit->add_option("--alpha", fit_args.alpha, "significance threshold")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  fit->add_flag("--json", json, "JSON output");

  GameArgs game_args;
  auto* game = app.add_subcommand("game", "build and analyse per-team cooperative games");
  game->require_subcommand(1);
  std::string game_action;
  for (const char* action : {"build", "shapley", "core", "report"}) {
    auto* sub = game->add_subcommand(action, std::string(action) + " for one team, every team or a JSON game file");
    sub->add_option("--records", game_args.data.records, "student records CSV");
    sub->add_option("--ratings", game_args.data.ratings, "peer ratings CSV");
    sub->add_option("--game", game_args.game_file, "game JSON file instead of a dataset");
    sub->add_option("--mode", game_args.mode, "opinion or contribution")->capture_default_str();
    sub->add_option("--team", game_args.team, "team key session/team_id (default: all teams)");
    sub->add_option("--singleton-scale", game_args.singleton_scale, "opinion-mode singleton scale")->capture_default_str();
    sub->add_option("--coalition-scale", game_args.coalition_scale, "coalition scale")->capture_default_str();
    sub->add_flag("--json", json, "JSON output");
    sub->callback([&game_action, action] { game_action = action; });
  }

  DataArgs pipeline_data;
  std::string pipeline_config, pipeline_out = "collabgame-report";
  std::uint64_t pipeline_seed = 0;
  bool pipeline_stepwise = false;
  std::optional<double> pipeline_alpha;
  auto* pipeline = app.add_subcommand("pipeline", "full analysis: descriptives, models, games, Shapley model");
  pipeline_data.add(pipeline);
  pipeline->add_option("--config", pipeline_config, "key = value pipeline configuration");
  pipeline->add_option("--seed", pipeline_seed, "seed recorded in the report")->capture_default_str();
  pipeline->add_option("--out", pipeline_out, "output directory")->capture_default_str();
  pipeline->add_flag("--stepwise", pipeline_stepwise, "forward selection instead of single-predictor screening");
  pipeline->add_option("--alpha", pipeline_alpha, "significance threshold (overrides the config)");
  pipeline->add_flag("--json", json, "print the report JSON");

  std::string synth_config, synth_out = ".";
  std::uint64_t synth_seed = 0;
  auto* synth = app.add_subcommand("synth", "generate a synthetic session dataset");
  synth->add_option("--config", synth_config, "key = value generator configuration");
  synth->add_option("--seed", synth_seed, "random seed")->capture_default_str();
  synth->add_option("--out", synth_out, "output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cg::exit_code(cg::ErrorKind::usage);
  }

  try {
    if (*describe) return run_describe(describe_data, json);
    if (*summarize) return run_summarize(summarize_data, by, variable, json);
    if (*fit) return run_fit(fit_data, fit_args, json);
    if (*game) return run_game(game_action, game_args, json);
    if (*pipeline) {
      return run_pipeline(pipeline_data, pipeline_config, pipeline_seed, pipeline_out, pipeline_stepwise, pipeline_alpha,
                          json);
    }
    if (*synth) return run_synth(synth_config, synth_seed, synth_out);
  } catch (const cg::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
