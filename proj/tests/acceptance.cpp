// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "collabgame/core.hpp"
#include "collabgame/game_builder.hpp"
#include "collabgame/model_json.hpp"
#include "collabgame/pipeline.hpp"
#include "collabgame/shapley.hpp"
#include "collabgame/synth.hpp"
#include "model_fixtures.hpp"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace collabgame;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Every fit produced here is checked against the information-criteria identities.
std::size_t ic_checked = 0;
std::size_t ic_violations = 0;

void check_ic(const MixedModelFit& f) {
  ++ic_checked;
  const int k = static_cast<int>(f.beta.size()) + 2;
  const bool ok = f.k() == k && f.aic == -2.0 * f.loglik + 2.0 * k &&
                  f.bic == -2.0 * f.loglik + k * std::log(static_cast<double>(f.n_obs));
  if (!ok) ++ic_violations;
}

MixedModelFit checked_fit(const DataTable& t, const MixedModelSpec& spec) {
  auto f = fit(t, spec);
  check_ic(f);
  return f;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

TUGame random_game(int n, std::mt19937_64& rng) { return TUGame(n, oracle::random_values(n, rng)); }

// ---------------------------------------------------------------------------------------------

Outcome shapley_oracle() {
  std::mt19937_64 rng(1);
  double worst = 0.0;
  int games = 0;
  for (int n = 2; n <= 6; ++n) {
    for (int k = 0; k < 200; ++k, ++games) {
      const auto v = oracle::random_values(n, rng);
      const auto phi = shapley(TUGame(n, v));
      const auto ref = oracle::shapley_by_permutations(n, v);
      for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(phi[i] - ref[static_cast<std::size_t>(i)]));
    }
  }
  return {worst <= 1e-9, std::to_string(games) + " games, max deviation " + fmt("%.2e", worst)};
}

Outcome shapley_axioms() {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> size(2, 8);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  int failures[4] = {0, 0, 0, 0};
  for (int k = 0; k < 1000; ++k) {
    const int n = size(rng);
    const auto v = random_game(n, rng);
    const auto w = random_game(n, rng);
    const auto phi = shapley(v);
    const double tol = tolerance(v.scale()) * 10.0;

    if (std::abs(phi.sum() - v.grand_value()) > tol) ++failures[0];

    const int i = static_cast<int>(rng() % static_cast<unsigned>(n));
    int j = static_cast<int>(rng() % static_cast<unsigned>(n - 1));
    if (j >= i) ++j;
    const auto swap = [&](Coalition s) {
      if (s.contains(i) == s.contains(j)) return s;
      return s.contains(i) ? s.without(i).with(j) : s.without(j).with(i);
    };
    const auto sym = TUGame::from_function(n, [&](Coalition s) { return 0.5 * (v(s) + v(swap(s))); });
    const auto phi_sym = shapley(sym);
    if (std::abs(phi_sym[i] - phi_sym[j]) > tol) ++failures[1];

    const double c = u(rng);
    const auto dummy = TUGame::from_function(n, [&](Coalition s) {
      return (s.contains(i) ? c : 0.0) + v(s.without(i));
    });
    if (std::abs(shapley(dummy)[i] - c) > tol) ++failures[2];

    const auto phi_sum = shapley(v + w);
    const auto phi_w = shapley(w);
    for (int p = 0; p < n; ++p) {
      if (std::abs(phi_sum[p] - phi[p] - phi_w[p]) > tolerance(v.scale() + w.scale()) * 10.0) {
        ++failures[3];
        break;
      }
    }
  }
  const int total = failures[0] + failures[1] + failures[2] + failures[3];
  return {total == 0, "1000 games n<=8; violations efficiency " + std::to_string(failures[0]) + ", symmetry " +
                          std::to_string(failures[1]) + ", dummy " + std::to_string(failures[2]) + ", additivity " +
                          std::to_string(failures[3])};
}

Outcome core_correctness() {
  const auto majority = TUGame::from_function(3, [](Coalition s) { return s.size() >= 2 ? 1.0 : 0.0; });
  const bool majority_empty = core_is_empty(majority).empty;

  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> size(1, 6);
  int certificates = 0, bad_certificates = 0;
  for (int k = 0; k < 500; ++k) {
    const int n = size(rng);
    // Shifted-down proper coalitions make nonempty cores common.
    auto v = oracle::random_values(n, rng, -4.0, 2.0);
    v.back() = 2.0 * n;
    const auto r = core_is_empty(TUGame(n, v));
    if (r.certificate) {
      ++certificates;
      if (!core_contains(TUGame(n, v), *r.certificate).contained) ++bad_certificates;
    }
  }
  int convex_outside = 0;
  for (int k = 0; k < 100; ++k) {
    const int n = 2 + k % 5;
    const TUGame g(n, oracle::random_convex_values(n, rng));
    if (!core_contains(g, shapley(g)).contained) ++convex_outside;
  }
  return {majority_empty && bad_certificates == 0 && certificates > 0 && convex_outside == 0,
          std::string("majority game ") + (majority_empty ? "empty" : "NOT empty") + "; " +
              std::to_string(certificates - bad_certificates) + "/" + std::to_string(certificates) +
              " certificates in core; convex games with Shapley outside core: " + std::to_string(convex_outside) +
              "/100"};
}

Outcome variance_anchors() {
  const double a = variance_partition(0.47673, 0.58337).level2;
  const double b = variance_partition(0.3721, 0.6124).level2;
  const double c = variance_partition(0.7837, 1.9981).level1;
  const bool pass = std::abs(a - 0.4497) <= 0.0005 && std::abs(b - 0.3780) <= 0.0005 && std::abs(c - 0.7182) <= 0.0005;
  return {pass, "level-2 " + fmt("%.4f", a) + ", level-2 " + fmt("%.4f", b) + ", level-1 " + fmt("%.4f", c)};
}

Outcome mixed_recovery() {
  int covered[4] = {0, 0, 0, 0};
  double worst = 0.0;
  const double truth[4] = {1.0, 0.5, 0.4, 0.6};
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto d = testing_helpers::balanced_data(seed);
    const auto f = checked_fit(d.table(), {"y", {"x"}, "team"});
    const auto o = oracle::balanced_ml(d.groups, d.members, d.x, d.y);
    const double est[4] = {f.beta[0].estimate, f.beta[1].estimate, f.tau2.variance, f.sigma2.variance};
    const double se[4] = {f.beta[0].se, f.beta[1].se, f.tau2.se, f.sigma2.se};
    const double ref[4] = {o.beta0, o.beta1, o.tau2, o.sigma2};
    for (int p = 0; p < 4; ++p) {
      worst = std::max(worst, std::abs(est[p] - ref[p]));
      if (std::abs(est[p] - truth[p]) <= 3.0 * se[p]) ++covered[p];
    }
  }
  const int least = *std::min_element(covered, covered + 4);
  return {least >= 90 && worst <= 1e-6,
          "within 3 SE (b0, b1, tau2, sigma2): " + std::to_string(covered[0]) + ", " + std::to_string(covered[1]) +
              ", " + std::to_string(covered[2]) + ", " + std::to_string(covered[3]) +
              " of 100; max deviation from closed form " + fmt("%.2e", worst)};
}

Outcome lrt_calibration() {
  const GenConfig cfg;
  int rejections = 0, datasets = 0;
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    const auto t = to_table(synthesize(cfg, 10'000 + seed).dataset);
    const auto null_fit = checked_fit(t, {"observed_contribution", {}, "team"});
    const auto full_fit = checked_fit(t, {"observed_contribution", {"content_engaging"}, "team"});
    if (null_fit.n_obs != 87 || null_fit.n_groups != 31) return {false, "synthetic data has the wrong shape"};
    ++datasets;
    if (compare(null_fit, full_fit).p_value < 0.05) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / datasets;
  return {rate >= 0.02 && rate <= 0.09,
          "rejection rate " + fmt("%.3f", rate) + " over " + std::to_string(datasets) + " null datasets"};
}

Outcome ols_degeneracy() {
  // Within-group covariate in a balanced design: the GLS estimate equals OLS for every ratio.
  double worst_balanced = 0.0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto d = testing_helpers::balanced_data(seed, 30, 3, 1.0, 0.5, 0.0, 0.6);
    const auto f = checked_fit(d.table(), {"y", {"x"}, "team"});
    Eigen::MatrixXd x(static_cast<Eigen::Index>(d.y.size()), 2);
    for (std::size_t i = 0; i < d.y.size(); ++i) x.row(static_cast<Eigen::Index>(i)) << 1.0, d.x[i];
    const auto o = oracle::ols(x, Eigen::Map<const Eigen::VectorXd>(d.y.data(), static_cast<Eigen::Index>(d.y.size())));
    worst_balanced = std::max({worst_balanced, std::abs(f.beta[0].estimate - o.beta[0]),
                               std::abs(f.beta[1].estimate - o.beta[1])});
  }
  // Unbalanced groups with a covariate varying between groups: OLS is the answer whenever the
  // fitted between-group variance is zero.
  double worst_boundary = 0.0;
  int boundary = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto d = testing_helpers::unbalanced_data(seed, 0.0);
    const auto f = checked_fit(d.table(), {"y", {"x"}, "team"});
    if (f.tau2.variance != 0.0) continue;
    ++boundary;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(d.y.size()), 2);
    for (std::size_t i = 0; i < d.y.size(); ++i) x.row(static_cast<Eigen::Index>(i)) << 1.0, d.x[i];
    const auto o = oracle::ols(x, Eigen::Map<const Eigen::VectorXd>(d.y.data(), static_cast<Eigen::Index>(d.y.size())));
    worst_boundary = std::max({worst_boundary, std::abs(f.beta[0].estimate - o.beta[0]),
                               std::abs(f.beta[1].estimate - o.beta[1]), std::abs(f.sigma2.variance - o.sigma2)});
  }
  return {worst_balanced <= 1e-6 && worst_boundary <= 1e-6,
          "50 seeds within-group covariate: max |b - b_ols| " + fmt("%.2e", worst_balanced) + "; unbalanced: " +
              std::to_string(boundary) + "/50 fits at tau2 = 0, max deviation " + fmt("%.2e", worst_boundary)};
}

Outcome ic_identities() {
  const auto d = ic_delta({416.76, 424.29}, {406.68, 416.72});
  const bool deltas = std::abs(d.aic - -10.08) <= 1e-12 * 416.76 && std::abs(d.bic - -7.57) <= 1e-12 * 424.29;
  return {deltas && ic_violations == 0 && ic_checked > 0,
          "deltas (" + fmt("%.2f", d.aic) + ", " + fmt("%.2f", d.bic) + "); identity violations " +
              std::to_string(ic_violations) + " of " + std::to_string(ic_checked) + " fits"};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome pipeline_structure() {
  namespace fs = std::filesystem;
  const fs::path data = COLLABGAME_DATA_DIR;
  const auto dir = testing_helpers::scratch_dir("acceptance_pipeline");
  std::string cmd_base = std::string("\"") + COLLABGAME_CLI + "\" pipeline --records \"" +
                         (data / "fixture" / "records.csv").string() + "\" --ratings \"" +
                         (data / "fixture" / "ratings.csv").string() + "\" --config \"" +
                         (data / "pipeline.conf").string() + "\" --seed 4 --out ";
  for (const char* run : {"a", "b"}) {
    const std::string cmd = cmd_base + "\"" + (dir / run).string() + "\" > /dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "pipeline command failed"};
  }
  bool identical = true;
  int files = 0;
  for (const auto& entry : fs::directory_iterator(dir / "a")) {
    ++files;
    identical = identical && read_file(entry.path()) == read_file(dir / "b" / entry.path().filename());
  }
  const auto report = nlohmann::json::parse(read_file(dir / "a" / "report.json"));
  int sections = 0;
  for (int k = 1; k <= 8; ++k) sections += report.contains("table" + std::to_string(k));
  bool schema = sections == 8;
  for (const char* null_table : {"table2", "table4", "table6"}) {
    const auto& m = report[null_table]["model"];
    schema = schema && m.contains("fixed") && m.contains("random") && m.contains("goodness_of_fit");
    try {
      check_ic(fit_from_json(m));
    } catch (const std::exception&) {
      schema = false;
    }
  }
  for (const char* final_table : {"table3", "table5", "table7", "table8"}) {
    const auto& c = report[final_table]["comparison"];
    schema = schema && c.contains("p_value") && c.contains("delta_aic") && c["full"].contains("fixed");
  }
  const auto& t1 = report["table1"];
  const bool records = t1["records"] == 87;
  const bool sizes = t1["group_sizes"] == nlohmann::json{{"2", 11}, {"3", 15}, {"4", 5}};
  return {schema && records && sizes && identical && files > 0,
          std::to_string(sections) + "/8 table sections, " + (schema ? "schema ok" : "schema BROKEN") + ", records " +
              t1["records"].dump() + ", group sizes " + t1["group_sizes"].dump() + ", " + std::to_string(files) +
              " files " + (identical ? "byte-identical" : "DIFFER") + " across two runs"};
}

Outcome game_construction_properties() {
  std::mt19937_64 rng(10);
  std::uniform_int_distribution<int> size(2, 4), ordinal(1, 5);
  std::uniform_real_distribution<double> score(0.0, 5.0), factor(0.05, 20.0);
  int locality = 0, scale = 0, argmax = 0;
  for (int k = 0; k < 500; ++k) {
    const int n = size(rng);
    std::vector<StudentRecord> g;
    for (int i = 0; i < n; ++i) g.push_back(testing_helpers::record("s" + std::to_string(i), "T1", score(rng), ordinal(rng)));
    RatingMatrix m;
    for (const auto& a : g) {
      for (const auto& b : g) {
        if (a.student_id != b.student_id) m[{"S1", a.student_id, b.student_id}] = score(rng);
      }
    }
    const int outsider = static_cast<int>(rng() % static_cast<unsigned>(n));
    auto g2 = g;
    auto m2 = m;
    g2[static_cast<std::size_t>(outsider)].background = ordinal(rng);
    g2[static_cast<std::size_t>(outsider)].observed_contribution = score(rng);
    for (auto& [key, v] : m2) {
      if (key.rater_id == g[static_cast<std::size_t>(outsider)].student_id ||
          key.ratee_id == g[static_cast<std::size_t>(outsider)].student_id) {
        v = score(rng);
      }
    }
    const double c = factor(rng);
    for (GameMode mode : {GameMode::opinion, GameMode::contribution}) {
      const GameConstructionConfig cfg{mode, 1.0, 1.0};
      const GameConstructionConfig scaled_cfg{mode, 1.0, c};
      const auto v = build_game(g, m, cfg);
      const auto v2 = build_game(g2, m2, cfg);
      const auto vc = build_game(g, m, scaled_cfg);
      for (Coalition::mask_type s = 1; s < v.coalition_count(); ++s) {
        const Coalition S{s};
        if (!S.contains(outsider) && v(S) != v2(S)) ++locality;
        if ((S.size() >= 2 || mode == GameMode::contribution) &&
            std::abs(vc(S) - c * v(S)) > 1e-12 * std::max(1.0, std::abs(c * v(S)))) {
          ++scale;
        }
      }
      if (mode == GameMode::contribution) {
        const auto phi = shapley(v);
        const auto phi_c = shapley(vc);
        auto top = [](const PayoffVector& x) {
          double best = x[0];
          for (int i = 1; i < x.size(); ++i) best = std::max(best, x[i]);
          std::vector<int> out;
          for (int i = 0; i < x.size(); ++i) {
            if (best - x[i] <= tolerance(best)) out.push_back(i);
          }
          return out;
        };
        if (top(phi) != top(phi_c)) ++argmax;
      }
    }
  }
  return {locality == 0 && scale == 0 && argmax == 0,
          "500 groups: locality violations " + std::to_string(locality) + ", scale violations " +
              std::to_string(scale) + ", argmax changes " + std::to_string(argmax)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double budget_seconds;
  };
  // Criterion 5 runs last so that it covers every fit made by the others.
  const std::vector<Criterion> criteria = {
      {1, "Shapley oracle equivalence", shapley_oracle, 10.0},
      {2, "Shapley axioms", shapley_axioms, 30.0},
      {3, "core correctness", core_correctness, 0.0},
      {4, "variance-partition anchors", variance_anchors, 0.0},
      {6, "mixed-model recovery", mixed_recovery, 60.0},
      {7, "LRT calibration", lrt_calibration, 300.0},
      {8, "OLS degeneracy", ols_degeneracy, 0.0},
      {9, "pipeline structural reproduction", pipeline_structure, 0.0},
      {10, "game-construction properties", game_construction_properties, 0.0},
      {5, "AIC/BIC identities", ic_identities, 0.0},
  };
  std::vector<std::pair<int, std::string>> lines;
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0 && secs > c.budget_seconds) {
      out.pass = false;
      out.detail += "; over time budget";
    }
    failed += !out.pass;
    char head[128];
    std::snprintf(head, sizeof head, "criterion %2d %s  %-34s", c.id, out.pass ? "PASS" : "FAIL", c.name);
    lines.emplace_back(c.id, std::string(head) + out.detail + " [" + fmt("%.2f", secs) + " s]");
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [id, line] : lines) std::cout << line << '\n';
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
