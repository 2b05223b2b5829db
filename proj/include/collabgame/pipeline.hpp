#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "collabgame/config.hpp"
#include "collabgame/describe.hpp"
#include "collabgame/game_builder.hpp"
#include "collabgame/model_json.hpp"

namespace collabgame {

inline std::vector<std::string> personal_and_content_factors() {
  return {"content_engaging", "background", "fits_needs", "opinion_before", "personality_type", "learning_style"};
}

struct PipelineConfig {
  std::string contribution_response = "observed_contribution";
  std::string grouping = "team";
  double alpha = 0.05;
  bool stepwise = false;
  std::vector<std::string> contribution_candidates = personal_and_content_factors();
  std::vector<std::string> learning_candidates;  // default: contribution response + personal/content factors
  std::vector<std::string> grade_candidates;     // same default
  std::vector<std::string> shapley_model = {"shapley", "content_engaging"};
  double singleton_scale = 1.0;
  double coalition_scale = 1.0;

  PipelineConfig() { fill_defaults(); }

  GameConstructionConfig game(GameMode mode) const { return {mode, singleton_scale, coalition_scale}; }

  /// Keys: contribution_response, grouping, alpha, stepwise, candidates.contribution,
  /// candidates.learning_outcome, candidates.group_grade, shapley_model.predictors,
  /// game.singleton_scale, game.coalition_scale.
  static PipelineConfig from_config(const KeyValueConfig& cfg) {
    PipelineConfig p;
    p.contribution_response = cfg.get_string("contribution_response", p.contribution_response);
    p.grouping = cfg.get_string("grouping", p.grouping);
    p.alpha = cfg.get_double("alpha", p.alpha);
    p.stepwise = cfg.get_bool("stepwise", p.stepwise);
    p.contribution_candidates = cfg.get_strings("candidates.contribution", p.contribution_candidates);
    p.learning_candidates = cfg.get_strings("candidates.learning_outcome", {});
    p.grade_candidates = cfg.get_strings("candidates.group_grade", {});
    p.shapley_model = cfg.get_strings("shapley_model.predictors", p.shapley_model);
    p.singleton_scale = cfg.get_double("game.singleton_scale", p.singleton_scale);
    p.coalition_scale = cfg.get_double("game.coalition_scale", p.coalition_scale);
    cfg.reject_unused();
    p.fill_defaults();
    if (!(p.alpha > 0.0 && p.alpha < 1.0)) throw cfg.error("alpha", "must lie in (0, 1)");
    if (p.contribution_response != "observed_contribution" && p.contribution_response != "peer_contribution_score") {
      throw cfg.error("contribution_response", "expected observed_contribution or peer_contribution_score");
    }
    for (const char* key : {"game.singleton_scale", "game.coalition_scale"}) {
      const double v = cfg.get_double(key, 1.0);
      if (!(std::isfinite(v) && v > 0.0)) throw cfg.error(key, "must be positive and finite");
    }
    return p;
  }

  nlohmann::json to_json() const {
    return {{"contribution_response", contribution_response},
            {"grouping", grouping},
            {"alpha", alpha},
            {"stepwise", stepwise},
            {"candidates",
             {{"contribution", contribution_candidates},
              {"learning_outcome", learning_candidates},
              {"group_grade", grade_candidates}}},
            {"shapley_model", shapley_model},
            {"game", {{"singleton_scale", singleton_scale}, {"coalition_scale", coalition_scale}}}};
  }

 private:
  void fill_defaults() {
    auto with_contribution = [&] {
      auto v = personal_and_content_factors();
      v.insert(v.begin(), contribution_response);
      return v;
    };
    if (learning_candidates.empty()) learning_candidates = with_contribution();
    if (grade_candidates.empty()) grade_candidates = with_contribution();
  }
};

struct PipelineOutput {
  nlohmann::json report;
  std::map<std::string, std::string> files;  // file name -> contents, report.json included
};

namespace detail {

inline std::string cell(double v) { return csv::format_double(v); }

inline void model_rows(std::ostringstream& os, const MixedModelFit& f) {
  for (const auto& c : f.beta) {
    os << "fixed," << csv::quote(c.term) << ',' << cell(c.estimate) << ',' << cell(c.se) << ',' << cell(c.p_value)
       << '\n';
  }
  os << "random,level2," << cell(f.tau2.variance) << ',' << cell(f.tau2.se) << ',' << cell(f.tau2.p_value) << '\n';
  os << "random,level1," << cell(f.sigma2.variance) << ',' << cell(f.sigma2.se) << ',' << cell(f.sigma2.p_value)
     << '\n';
}

inline std::string model_csv(const MixedModelFit& f) {
  std::ostringstream os;
  os << "block,term,estimate,se,p_value\n";
  model_rows(os, f);
  os << "goodness_of_fit,aic," << cell(f.aic) << ",,\n";
  os << "goodness_of_fit,bic," << cell(f.bic) << ",,\n";
  return os.str();
}

inline std::string comparison_csv(const ModelComparison& c) {
  std::ostringstream os;
  os << "block,term,estimate,se,p_value\n";
  model_rows(os, c.full_fit);
  os << "goodness_of_fit,null_aic," << cell(c.null_fit.aic) << ",,\n";
  os << "goodness_of_fit,null_bic," << cell(c.null_fit.bic) << ",,\n";
  os << "goodness_of_fit,final_aic," << cell(c.full_fit.aic) << ",,\n";
  os << "goodness_of_fit,final_bic," << cell(c.full_fit.bic) << ",,\n";
  os << "goodness_of_fit,lrt," << cell(c.lrt_statistic) << ",," << cell(c.p_value) << '\n';
  return os.str();
}

inline std::string screening_csv(const ScreeningTable& t) {
  std::ostringstream os;
  os << "candidate,df,lrt_p_value,aic,bic,flagged,error\n";
  for (const auto& r : t.rows) {
    os << csv::quote(r.candidate) << ',';
    if (r.error) {
      os << ",,,,false," << csv::quote(*r.error) << '\n';
    } else {
      os << r.df << ',' << cell(r.lrt_p_value) << ',' << cell(r.fit->aic) << ',' << cell(r.fit->bic) << ','
         << (r.flagged ? "true" : "false") << ",\n";
    }
  }
  return os.str();
}

inline std::string stability_csv(const std::vector<StabilityReport>& reports) {
  std::ostringstream os;
  os << "team,players,additive,superadditive,core_empty,blocking_coalitions,max_deficit,grand_coalition_gain\n";
  for (const auto& r : reports) {
    double worst = 0.0;
    for (const auto& b : r.blocking) worst = std::max(worst, b.deficit);
    os << csv::quote(r.group_id) << ',' << r.game.players() << ',' << (r.additive.holds ? "true" : "false") << ','
       << (r.superadditive.holds ? "true" : "false") << ',' << (r.core_empty ? "true" : "false") << ','
       << r.blocking.size() << ',' << cell(worst) << ',' << cell(r.grand_coalition_gain) << '\n';
  }
  return os.str();
}

inline std::string descriptives_csv(const DescriptiveReport& d) {
  std::ostringstream os;
  os << "variable,n,mean,sd\n";
  for (const auto& v : d.continuous) {
    os << v.name << ',' << v.count << ',' << (v.mean ? cell(*v.mean) : "") << ',' << (v.sd ? cell(*v.sd) : "") << '\n';
  }
  return os.str();
}

}  // namespace detail

/// Final model for one response: the screened candidate with the smallest LRT p-value
/// (`significant` when below alpha), or with stepwise selection the forward-selected model.
/// Without any fittable candidate the null model is compared with itself.
struct ResponseAnalysis {
  MixedModelFit null_fit;
  ScreeningTable screening;
  ModelComparison final_model;
  std::string selected;
  bool significant = false;
};

inline ResponseAnalysis analyze_response(const DataTable& table, const std::string& response,
                                         const std::vector<std::string>& candidates, const PipelineConfig& cfg) {
  ResponseAnalysis a;
  a.screening = screen_predictors(table, response, cfg.grouping, candidates, cfg.alpha);
  a.null_fit = a.screening.null_fit;
  if (cfg.stepwise) {
    const auto sel = forward_select(table, response, cfg.grouping, candidates, cfg.alpha);
    a.final_model = compare(a.null_fit, sel.final_fit);
    for (const auto& st : sel.steps) a.selected += (a.selected.empty() ? "" : ",") + st.added;
    a.significant = !sel.steps.empty();
    return a;
  }
  const ScreeningRow* best = nullptr;
  for (const auto& r : a.screening.rows) {
    if (r.error) continue;
    if (!best || r.lrt_p_value < best->lrt_p_value) best = &r;
  }
  if (best) {
    a.final_model = compare(a.null_fit, *best->fit);
    a.selected = best->candidate;
    a.significant = best->flagged;
  } else {
    a.final_model = compare(a.null_fit, a.null_fit);
  }
  return a;
}

/// Adds a numeric "shapley" column (contribution-mode Shapley values) to the dataset table.
inline DataTable with_shapley(const SessionDataset& data, const ShapleyTable& shapley) {
  DataTable t = to_table(data);
  std::map<std::pair<std::string, std::string>, double> by_student;
  for (const auto& r : shapley.rows) by_student[{r.session_id, r.student_id}] = r.value;
  DataTable::NumericColumn col;
  for (const auto& r : data.records()) col.push_back(by_student.at({r.session_id, r.student_id}));
  t.add_numeric("shapley", col);
  return t;
}

/// Descriptives, null and final models for the three responses, games and stability in both
/// modes, Shapley values and the Shapley-based learning-outcome model.
inline PipelineOutput run_pipeline(const SessionDataset& data, const PipelineConfig& cfg, std::uint64_t seed) {
  std::string stage;
  try {
    PipelineOutput out;
    nlohmann::json& rep = out.report;

    stage = "descriptives";
    const auto desc = describe(data);
    rep["table1"] = to_json(desc);
    out.files["table1.csv"] = detail::descriptives_csv(desc);

    stage = "shapley";
    const auto shapley = shapley_per_student(data, cfg.game(GameMode::contribution));
    const DataTable table = with_shapley(data, shapley);

    struct Target {
      const char* key;
      std::string response;
      const std::vector<std::string>* candidates;
      const char* null_table;
      const char* final_table;
    };
    const Target targets[] = {
        {"contribution", cfg.contribution_response, &cfg.contribution_candidates, "table2", "table3"},
        {"learning_outcome", "learning_outcome", &cfg.learning_candidates, "table4", "table5"},
        {"group_grade", "group_grade", &cfg.grade_candidates, "table6", "table7"}};
    std::map<std::string, MixedModelFit> nulls;
    for (const auto& t : targets) {
      stage = std::string("models for ") + t.response;
      const auto a = analyze_response(table, t.response, *t.candidates, cfg);
      nulls[t.key] = a.null_fit;
      rep[t.null_table] = {{"response", t.response}, {"model", to_json(a.null_fit)}};
      rep[t.final_table] = {{"response", t.response},
                            {"selected", a.selected},
                            {"significant", a.significant},
                            {"comparison", to_json(a.final_model)}};
      rep["screening"][t.key] = to_json(a.screening);
      out.files[std::string(t.null_table) + ".csv"] = detail::model_csv(a.null_fit);
      out.files[std::string(t.final_table) + ".csv"] = detail::comparison_csv(a.final_model);
      out.files["screening_" + std::string(t.key) + ".csv"] = detail::screening_csv(a.screening);
    }

    stage = "shapley model";
    const auto& lo_null = nulls["learning_outcome"];
    const auto alone = compare(lo_null, fit(table, {"learning_outcome", {"shapley"}, cfg.grouping}));
    const auto full = compare(lo_null, fit(table, {"learning_outcome", cfg.shapley_model, cfg.grouping}));
    rep["table8"] = {{"response", "learning_outcome"},
                     {"predictors", cfg.shapley_model},
                     {"comparison", to_json(full)},
                     {"shapley_alone", to_json(alone)}};
    out.files["table8.csv"] = detail::comparison_csv(full);
    rep["shapley"] = to_json(shapley);
    {
      std::ostringstream os;
      os << "session_id,team,student_id,shapley\n";
      for (const auto& r : shapley.rows) {
        os << csv::quote(r.session_id) << ',' << csv::quote(r.team) << ',' << csv::quote(r.student_id) << ','
           << detail::cell(r.value) << '\n';
      }
      out.files["shapley.csv"] = os.str();
    }

    for (GameMode mode : {GameMode::opinion, GameMode::contribution}) {
      stage = "games (" + std::string(to_string(mode)) + ")";
      const auto reports = stability_reports(data, cfg.game(mode));
      nlohmann::json arr = nlohmann::json::array();
      int additive = 0, superadditive = 0, empty = 0;
      for (const auto& r : reports) {
        arr.push_back(to_json(r));
        additive += r.additive.holds;
        superadditive += r.superadditive.holds;
        empty += r.core_empty;
      }
      const std::string key(to_string(mode));
      rep["stability"][key] = {{"teams", arr},
                               {"summary",
                                {{"teams", reports.size()},
                                 {"additive", additive},
                                 {"superadditive", superadditive},
                                 {"core_empty", empty}}}};
      out.files["stability_" + key + ".csv"] = detail::stability_csv(reports);
    }

    stage = "summaries";
    for (const char* variable : {cfg.contribution_response.c_str(), "learning_outcome", "shapley"}) {
      std::ostringstream os;
      std::vector<GroupSummaryRow> rows;
      for (const char* by : {"learning_style", "personality_type", "team"}) {
        const auto part = emit_group_summaries(table, by, variable);
        rows.insert(rows.end(), part.begin(), part.end());
      }
      write_summaries_csv(os, rows);
      out.files["summaries_" + std::string(variable) + ".csv"] = os.str();
    }

    rep["metadata"] = {{"seed", seed},
                       {"records", data.size()},
                       {"groups", desc.groups},
                       {"config", cfg.to_json()}};
    out.files["report.json"] = rep.dump(2) + "\n";
    return out;
  } catch (const Error& e) {
    throw Error(e.kind(), "pipeline stage '" + stage + "': " + e.what());
  }
}

/// Writes every output file into `dir`; on failure the files written so far are removed.
inline void write_outputs(const std::filesystem::path& dir, const std::map<std::string, std::string>& files) {
  std::vector<std::filesystem::path> written;
  try {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::io, dir.string() + ": cannot create directory: " + ec.message());
    for (const auto& [name, text] : files) {
      const auto path = dir / name;
      std::ofstream os(path, std::ios::binary);
      if (!os) throw Error(ErrorKind::io, path.string() + ": cannot open for writing");
      written.push_back(path);
      os << text;
      os.close();
      if (!os) throw Error(ErrorKind::io, path.string() + ": write failed");
    }
  } catch (...) {
    for (const auto& p : written) {
      std::error_code ignored;
      std::filesystem::remove(p, ignored);
    }
    throw;
  }
}

}  // namespace collabgame
