#pragma once

#include <cstdio>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "collabgame/mixed_model.hpp"

namespace collabgame {

// Fit layout: fixed-effect block, random-effect block, goodness-of-fit block.

inline nlohmann::json to_json(const MixedModelFit& f) {
  nlohmann::json fixed = nlohmann::json::array();
  for (const auto& c : f.beta) {
    fixed.push_back({{"term", c.term}, {"coefficient", c.estimate}, {"se", c.se}, {"p_value", c.p_value}});
  }
  const auto shares = variance_partition(f);
  auto component = [](const VarianceComponent& v, double share) {
    return nlohmann::json{{"variance", v.variance}, {"se", v.se}, {"p_value", v.p_value}, {"share", share}};
  };
  char sig[17];
  std::snprintf(sig, sizeof sig, "%016llx", static_cast<unsigned long long>(f.data_signature));
  return {{"response", f.spec.response},
          {"predictors", f.spec.fixed_predictors},
          {"grouping", f.spec.grouping},
          {"fixed", fixed},
          {"random",
           {{"level2", component(f.tau2, shares.level2)},
            {"level1", component(f.sigma2, shares.level1)},
            {"se_method", f.variance_se_method}}},
          {"goodness_of_fit",
           {{"loglik", f.loglik}, {"aic", f.aic}, {"bic", f.bic}, {"k", f.k()}}},
          {"n_obs", f.n_obs},
          {"n_groups", f.n_groups},
          {"variance_ratio", f.ratio},
          {"data_signature", sig}};
}

inline MixedModelFit fit_from_json(const nlohmann::json& j) {
  MixedModelFit f;
  f.spec.response = j.at("response").get<std::string>();
  f.spec.fixed_predictors = j.at("predictors").get<std::vector<std::string>>();
  f.spec.grouping = j.at("grouping").get<std::string>();
  for (const auto& c : j.at("fixed")) {
    f.beta.push_back({c.at("term").get<std::string>(), c.at("coefficient").get<double>(), c.at("se").get<double>(),
                      c.at("p_value").get<double>()});
  }
  auto component = [](const nlohmann::json& c) {
    return VarianceComponent{c.at("variance").get<double>(), c.at("se").get<double>(), c.at("p_value").get<double>()};
  };
  const auto& random = j.at("random");
  f.tau2 = component(random.at("level2"));
  f.sigma2 = component(random.at("level1"));
  f.variance_se_method = random.at("se_method").get<std::string>();
  const auto& gof = j.at("goodness_of_fit");
  f.loglik = gof.at("loglik").get<double>();
  f.aic = gof.at("aic").get<double>();
  f.bic = gof.at("bic").get<double>();
  f.n_obs = j.at("n_obs").get<std::size_t>();
  f.n_groups = j.at("n_groups").get<std::size_t>();
  f.ratio = j.at("variance_ratio").get<double>();
  f.data_signature = std::stoull(j.at("data_signature").get<std::string>(), nullptr, 16);
  return f;
}

inline nlohmann::json to_json(const ModelComparison& c) {
  return {{"null", to_json(c.null_fit)},
          {"full", to_json(c.full_fit)},
          {"lrt_statistic", c.lrt_statistic},
          {"df", c.df},
          {"p_value", c.p_value},
          {"delta_aic", c.delta_aic},
          {"delta_bic", c.delta_bic}};
}

inline ModelComparison comparison_from_json(const nlohmann::json& j) {
  ModelComparison c{fit_from_json(j.at("null")), fit_from_json(j.at("full"))};
  c.lrt_statistic = j.at("lrt_statistic").get<double>();
  c.df = j.at("df").get<int>();
  c.p_value = j.at("p_value").get<double>();
  c.delta_aic = j.at("delta_aic").get<double>();
  c.delta_bic = j.at("delta_bic").get<double>();
  return c;
}

inline nlohmann::json to_json(const ScreeningTable& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : t.rows) {
    nlohmann::json row = {{"candidate", r.candidate}, {"flagged", r.flagged}};
    if (r.error) {
      row["error"] = *r.error;
    } else {
      nlohmann::json terms = nlohmann::json::array();
      for (const auto& c : r.terms) {
        terms.push_back({{"term", c.term}, {"coefficient", c.estimate}, {"se", c.se}, {"p_value", c.p_value}});
      }
      row["terms"] = terms;
      row["df"] = r.df;
      row["lrt_p_value"] = r.lrt_p_value;
      row["aic"] = r.fit->aic;
      row["bic"] = r.fit->bic;
    }
    rows.push_back(std::move(row));
  }
  return {{"response", t.response},
          {"alpha", t.alpha},
          {"null", {{"loglik", t.null_fit.loglik}, {"aic", t.null_fit.aic}, {"bic", t.null_fit.bic}}},
          {"candidates", rows}};
}

inline nlohmann::json to_json(const ForwardSelection& s) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& st : s.steps) {
    steps.push_back({{"added", st.added}, {"lrt_p_value", st.lrt_p_value}, {"aic", st.fit.aic}, {"bic", st.fit.bic}});
  }
  return {{"steps", steps}, {"final", to_json(s.final_fit)}};
}

namespace detail {
inline std::string fmt(const char* f, double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}
}  // namespace detail

inline void print(std::ostream& os, const MixedModelFit& f) {
  using detail::fmt;
  os << "response: " << f.spec.response << "  (" << f.n_obs << " observations, " << f.n_groups << " groups of "
     << f.spec.grouping << ")\n\n";
  os << "Fixed effect                    Coefficient        SE   p-value\n";
  for (const auto& c : f.beta) {
    char line[160];
    std::snprintf(line, sizeof line, "%-30s %12.4f %9.4f %9.4g\n", c.term.c_str(), c.estimate, c.se, c.p_value);
    os << line;
  }
  const auto shares = variance_partition(f);
  os << "\nRandom effect      Variance        SE   p-value    share\n";
  os << "Level 2          " << fmt("%9.5f", f.tau2.variance) << ' ' << fmt("%9.4f", f.tau2.se) << ' '
     << fmt("%9.4g", f.tau2.p_value) << ' ' << fmt("%7.1f%%", 100.0 * shares.level2) << '\n';
  os << "Level 1          " << fmt("%9.5f", f.sigma2.variance) << ' ' << fmt("%9.4f", f.sigma2.se) << ' '
     << fmt("%9.4g", f.sigma2.p_value) << ' ' << fmt("%7.1f%%", 100.0 * shares.level1) << '\n';
  os << "\nlog-likelihood " << fmt("%.4f", f.loglik) << "  AIC " << fmt("%.2f", f.aic) << "  BIC "
     << fmt("%.2f", f.bic) << '\n';
}

inline void print(std::ostream& os, const ModelComparison& c) {
  using detail::fmt;
  print(os, c.full_fit);
  os << "\nGoodness of fit vs null      AIC       BIC   p-value\n";
  os << "Null model            " << fmt("%9.2f", c.null_fit.aic) << ' ' << fmt("%9.2f", c.null_fit.bic) << '\n';
  os << "Model                 " << fmt("%9.2f", c.full_fit.aic) << ' ' << fmt("%9.2f", c.full_fit.bic) << ' '
     << fmt("%9.4g", c.p_value) << '\n';
  os << "LRT " << fmt("%.4f", c.lrt_statistic) << " on " << c.df << " df\n";
}

inline void print(std::ostream& os, const ScreeningTable& t) {
  os << "screening for " << t.response << " (alpha " << t.alpha << ")\n";
  os << "candidate                  df   LRT p-value       AIC       BIC  flagged\n";
  for (const auto& r : t.rows) {
    char line[200];
    if (r.error) {
      std::snprintf(line, sizeof line, "%-24s  error: %s\n", r.candidate.c_str(), r.error->c_str());
    } else {
      std::snprintf(line, sizeof line, "%-24s %4d %13.4g %9.2f %9.2f  %s\n", r.candidate.c_str(), r.df,
                    r.lrt_p_value, r.fit->aic, r.fit->bic, r.flagged ? "*" : "");
    }
    os << line;
  }
}

}  // namespace collabgame
