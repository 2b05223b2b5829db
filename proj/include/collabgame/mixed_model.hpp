#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "collabgame/csv.hpp"
#include "collabgame/optimize.hpp"
#include "collabgame/table.hpp"

namespace collabgame {

/// Two-level random-intercept model: response ~ intercept + fixed_predictors + (1 | grouping).
struct MixedModelSpec {
  std::string response;
  std::vector<std::string> fixed_predictors;
  std::string grouping = "team";

  void validate() const {
    if (response.empty()) throw Error(ErrorKind::usage, "model needs a response column");
    if (grouping == response) throw Error(ErrorKind::usage, "grouping column cannot be the response");
    std::set<std::string> seen;
    for (const auto& p : fixed_predictors) {
      if (p == response) throw Error(ErrorKind::usage, "response '" + response + "' cannot also be a predictor");
      if (p == grouping) throw Error(ErrorKind::usage, "grouping column '" + grouping + "' cannot be a predictor");
      if (!seen.insert(p).second) throw Error(ErrorKind::usage, "predictor '" + p + "' listed twice");
    }
  }

  friend bool operator==(const MixedModelSpec&, const MixedModelSpec&) = default;
};

struct Coefficient {
  std::string term;
  double estimate = 0.0;
  double se = 0.0;
  double p_value = 1.0;  // two-sided Wald, normal reference
};

struct VarianceComponent {
  double variance = 0.0;
  double se = 0.0;
  double p_value = 1.0;  // Wald z; conservative near the zero boundary
};

struct MixedModelFit {
  MixedModelSpec spec;
  std::vector<Coefficient> beta;  // intercept first
  VarianceComponent tau2;         // level 2, between groups
  VarianceComponent sigma2;       // level 1, within groups
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  std::size_t n_obs = 0;
  std::size_t n_groups = 0;
  double ratio = 0.0;                    // tau2 / sigma2 at the optimum
  std::string variance_se_method;        // "observed" or "expected" information
  std::uint64_t data_signature = 0;      // response and grouping content, order independent

  /// Parameters counted by AIC/BIC: fixed coefficients plus the two variance components.
  int k() const { return static_cast<int>(beta.size()) + 2; }
};

inline double wald_p_value(double estimate, double se) {
  if (!(se > 0.0) || !std::isfinite(se)) return 1.0;
  return std::erfc(std::abs(estimate / se) / std::numbers::sqrt2);
}

inline double chi_square_upper_tail(double statistic, int df) {
  if (df <= 0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * statistic);
}

inline double aic_of(double loglik, int k) { return -2.0 * loglik + 2.0 * k; }
inline double bic_of(double loglik, int k, std::size_t n) { return -2.0 * loglik + k * std::log(static_cast<double>(n)); }

// ---------------------------------------------------------------------------------------------

/// Design matrix, response and group membership for one spec on one table.
struct ModelData {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::vector<int> group;                 // row -> group index
  std::vector<std::string> group_labels;  // sorted
  std::vector<std::string> terms;         // column names of x
  std::uint64_t signature = 0;

  std::size_t rows() const { return static_cast<std::size_t>(y.size()); }
  std::size_t groups() const { return group_labels.size(); }

  /// Reference-coded indicators for categorical predictors (reference = smallest level).
  static ModelData build(const DataTable& table, const MixedModelSpec& spec) {
    spec.validate();
    auto require = [&](const std::string& name) {
      if (!table.has(name)) {
        throw Error(ErrorKind::usage, "unknown column '" + name + "'; valid columns: " + table.column_list());
      }
    };
    require(spec.response);
    require(spec.grouping);
    for (const auto& p : spec.fixed_predictors) require(p);
    if (!table.is_numeric(spec.response)) {
      throw Error(ErrorKind::usage, "response '" + spec.response + "' must be a numeric column");
    }

    const std::size_t n = table.rows();
    auto missing = [&](std::size_t row, const std::string& col) {
      return Error(ErrorKind::incomplete_data,
                   "row " + std::to_string(row + 1) + ": missing value in column '" + col + "'");
    };

    ModelData d;
    d.terms.push_back("(Intercept)");
    std::vector<std::vector<double>> cols;
    cols.emplace_back(n, 1.0);
    for (const auto& p : spec.fixed_predictors) {
      if (table.is_numeric(p)) {
        const auto& c = table.numeric(p);
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) {
          if (!c[i]) throw missing(i, p);
          v[i] = *c[i];
        }
        cols.push_back(std::move(v));
        d.terms.push_back(p);
      } else {
        const auto& c = table.categorical(p);
        std::set<std::string> levels;
        for (std::size_t i = 0; i < n; ++i) {
          if (c[i].empty()) throw missing(i, p);
          levels.insert(c[i]);
        }
        for (auto it = std::next(levels.begin()); it != levels.end(); ++it) {
          std::vector<double> v(n);
          for (std::size_t i = 0; i < n; ++i) v[i] = c[i] == *it ? 1.0 : 0.0;
          cols.push_back(std::move(v));
          d.terms.push_back(p + "[" + *it + "]");
        }
      }
    }

    const auto& resp = table.numeric(spec.response);
    d.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      if (!resp[i]) throw missing(i, spec.response);
      d.y[static_cast<Eigen::Index>(i)] = *resp[i];
    }

    std::vector<std::string> labels(n);
    if (table.is_categorical(spec.grouping)) {
      labels = table.categorical(spec.grouping);
    } else {
      const auto& g = table.numeric(spec.grouping);
      for (std::size_t i = 0; i < n; ++i) {
        if (!g[i]) throw missing(i, spec.grouping);
        labels[i] = csv::format_double(*g[i]);
      }
    }
    std::map<std::string, int> index;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i].empty()) throw missing(i, spec.grouping);
      index.emplace(labels[i], 0);
    }
    if (index.size() < 2) {
      throw Error(ErrorKind::grouping, "random-intercept model needs at least 2 groups, found " +
                                           std::to_string(index.size()));
    }
    int next = 0;
    for (auto& [label, id] : index) {
      id = next++;
      d.group_labels.push_back(label);
    }
    d.group.resize(n);
    for (std::size_t i = 0; i < n; ++i) d.group[i] = index[labels[i]];

    d.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      for (std::size_t i = 0; i < n; ++i) d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[j][i];
    }
    d.check_rank();
    d.signature = signature_of(labels, d.y);
    d.canonicalize();
    return d;
  }

 private:
  /// Sorts rows by (group, response, predictors) so every floating-point sum is independent of
  /// the input row order.
  void canonicalize() {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(y.size()));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<Eigen::Index>(i);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      const auto ga = group[static_cast<std::size_t>(a)], gb = group[static_cast<std::size_t>(b)];
      if (ga != gb) return ga < gb;
      if (y[a] != y[b]) return y[a] < y[b];
      for (Eigen::Index j = 0; j < x.cols(); ++j) {
        if (x(a, j) != x(b, j)) return x(a, j) < x(b, j);
      }
      return false;
    });
    Eigen::MatrixXd xs(x.rows(), x.cols());
    Eigen::VectorXd ys(y.size());
    std::vector<int> gs(group.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(i);
      xs.row(k) = x.row(order[i]);
      ys[k] = y[order[i]];
      gs[i] = group[static_cast<std::size_t>(order[i])];
    }
    x = std::move(xs);
    y = std::move(ys);
    group = std::move(gs);
  }

  void check_rank() const {
    std::vector<std::string> collinear;
    Eigen::Index rank = 0;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      kept.push_back(j);
      Eigen::MatrixXd sub(x.rows(), static_cast<Eigen::Index>(kept.size()));
      for (std::size_t k = 0; k < kept.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = x.col(kept[k]);
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
      qr.setThreshold(1e-10);
      if (qr.rank() == rank) {
        collinear.push_back(terms[static_cast<std::size_t>(j)]);
        kept.pop_back();
      } else {
        rank = qr.rank();
      }
    }
    if (!collinear.empty()) throw RankError(collinear);
  }

  static std::uint64_t signature_of(const std::vector<std::string>& labels, const Eigen::VectorXd& y) {
    std::vector<std::string> keys;
    keys.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      keys.push_back(labels[i] + '\x1f' + csv::format_double(y[static_cast<Eigen::Index>(i)]));
    }
    std::sort(keys.begin(), keys.end());
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (const auto& k : keys) {
      for (unsigned char c : k) {
        h ^= c;
        h *= 1099511628211ull;
      }
      h ^= 0xff;
      h *= 1099511628211ull;
    }
    return h;
  }
};

/// Marginal Gaussian log-likelihood of the random-intercept model. Each group's covariance is
/// sigma2 (I + lambda 11'), so its inverse and determinant have closed forms and every quantity
/// reduces to per-group column sums.
class MarginalLikelihood {
 public:
  explicit MarginalLikelihood(const ModelData& data) : data_(data) {
    const auto p = data.x.cols();
    const auto g = static_cast<Eigen::Index>(data.groups());
    xtx_ = data.x.transpose() * data.x;
    xty_ = data.x.transpose() * data.y;
    yty_ = data.y.squaredNorm();
    sums_x_ = Eigen::MatrixXd::Zero(p, g);
    sums_y_ = Eigen::VectorXd::Zero(g);
    sizes_ = Eigen::VectorXd::Zero(g);
    for (std::size_t i = 0; i < data.rows(); ++i) {
      const auto j = data.group[i];
      const auto row = static_cast<Eigen::Index>(i);
      sums_x_.col(j) += data.x.row(row).transpose();
      sums_y_[j] += data.y[row];
      sizes_[j] += 1.0;
    }
  }

  struct Profile {
    double lambda = 0.0;
    double loglik = 0.0;
    double sigma2 = 0.0;
    Eigen::VectorXd beta;
    Eigen::MatrixXd xtwx;  // X' W X with W = sigma2 V^-1
  };

  /// Maximizes over beta and sigma2 for a fixed lambda = tau2 / sigma2 (GLS closed forms).
  Profile profile(double lambda) const {
    Profile out;
    out.lambda = lambda;
    const double n = static_cast<double>(data_.rows());
    out.xtwx = xtx_;
    Eigen::VectorXd xtwy = xty_;
    double ytwy = yty_;
    double logdet = 0.0;
    for (Eigen::Index j = 0; j < sizes_.size(); ++j) {
      const double c = lambda / (1.0 + sizes_[j] * lambda);
      out.xtwx.noalias() -= c * sums_x_.col(j) * sums_x_.col(j).transpose();
      xtwy.noalias() -= c * sums_y_[j] * sums_x_.col(j);
      ytwy -= c * sums_y_[j] * sums_y_[j];
      logdet += std::log1p(sizes_[j] * lambda);
    }
    out.beta = out.xtwx.ldlt().solve(xtwy);
    const double rss = std::max(ytwy - out.beta.dot(xtwy), 0.0);
    out.sigma2 = rss / n;
    out.loglik = -0.5 * n * (std::log(2.0 * std::numbers::pi) + 1.0 + std::log(out.sigma2)) - 0.5 * logdet;
    return out;
  }

  /// Full log-likelihood at arbitrary parameters; requires sigma2 > 0 and sigma2 + n_j tau2 > 0.
  double evaluate(const Eigen::VectorXd& beta, double tau2, double sigma2) const {
    const Eigen::VectorXd r = data_.y - data_.x * beta;
    Eigen::VectorXd rsum = Eigen::VectorXd::Zero(sizes_.size());
    for (std::size_t i = 0; i < data_.rows(); ++i) rsum[data_.group[i]] += r[static_cast<Eigen::Index>(i)];
    double quad = r.squaredNorm() / sigma2;
    double logdet = 0.0;
    for (Eigen::Index j = 0; j < sizes_.size(); ++j) {
      const double nj = sizes_[j];
      const double eta = sigma2 + nj * tau2;
      quad -= tau2 / (sigma2 * eta) * rsum[j] * rsum[j];
      logdet += (nj - 1.0) * std::log(sigma2) + std::log(eta);
    }
    const double n = static_cast<double>(data_.rows());
    return -0.5 * (n * std::log(2.0 * std::numbers::pi) + logdet + quad);
  }

  /// Log-likelihood with beta at its GLS estimate for the implied ratio.
  double profile_over_beta(double tau2, double sigma2) const {
    return evaluate(profile(tau2 / sigma2).beta, tau2, sigma2);
  }

  /// Expected information for (tau2, sigma2) under compound symmetry.
  Eigen::Matrix2d expected_information(double tau2, double sigma2) const {
    Eigen::Matrix2d info = Eigen::Matrix2d::Zero();
    for (Eigen::Index j = 0; j < sizes_.size(); ++j) {
      const double m = sizes_[j];
      const double eta = sigma2 + m * tau2;
      info(0, 0) += 0.5 * m * m / (eta * eta);
      info(0, 1) += 0.5 * m / (eta * eta);
      info(1, 1) += 0.5 * ((m - 1.0) / (sigma2 * sigma2) + 1.0 / (eta * eta));
    }
    info(1, 0) = info(0, 1);
    return info;
  }

  const ModelData& data() const { return data_; }

 private:
  const ModelData& data_;
  Eigen::MatrixXd xtx_;
  Eigen::VectorXd xty_;
  double yty_ = 0.0;
  Eigen::MatrixXd sums_x_;
  Eigen::VectorXd sums_y_;
  Eigen::VectorXd sizes_;
};

struct FitOptions {
  double lambda_max = 1e6;
  double epsilon = 1e-12;       // search runs on t = log(lambda + epsilon)
  double bracket_tol = 1e-10;
  int grid_points = 80;         // coarse scan that picks the Brent bracket
  int max_iterations = 500;
};

/// Maximum-likelihood fit. The variance ratio is found by a grid scan plus Brent refinement on
/// log(lambda + epsilon); lambda = 0 is always evaluated explicitly.
inline MixedModelFit fit(const DataTable& table, const MixedModelSpec& spec, const FitOptions& opt = {}) {
  const ModelData data = ModelData::build(table, spec);
  const MarginalLikelihood lik(data);

  auto lambda_of = [&](double t) { return std::max(0.0, std::exp(t) - opt.epsilon); };
  auto objective = [&](double t) { return lik.profile(lambda_of(t)).loglik; };

  const double t_lo = std::log(opt.epsilon);
  const double t_hi = std::log(opt.lambda_max + opt.epsilon);
  int best = 0;
  std::vector<double> grid(static_cast<std::size_t>(opt.grid_points) + 1);
  std::vector<double> values(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    grid[k] = t_lo + (t_hi - t_lo) * static_cast<double>(k) / opt.grid_points;
    values[k] = objective(grid[k]);
    if (values[k] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(k);
  }
  const auto lo = grid[static_cast<std::size_t>(std::max(best - 1, 0))];
  const auto hi = grid[static_cast<std::size_t>(std::min(best + 1, opt.grid_points))];
  const ScalarOptimum opt_t = maximize_brent(objective, lo, hi, opt.bracket_tol, opt.max_iterations);
  if (!opt_t.converged) {
    throw ConvergenceError("variance-ratio search did not converge in " + std::to_string(opt.max_iterations) +
                               " iterations",
                           lambda_of(opt_t.x), opt_t.value);
  }

  auto prof = lik.profile(lambda_of(opt_t.x));
  const auto boundary = lik.profile(0.0);
  if (boundary.loglik >= prof.loglik) prof = boundary;
  if (!std::isfinite(prof.loglik) || !(prof.sigma2 > 0.0)) {
    throw ConvergenceError("degenerate likelihood (zero residual variance)", prof.lambda, prof.loglik);
  }

  MixedModelFit out;
  out.spec = spec;
  out.n_obs = data.rows();
  out.n_groups = data.groups();
  out.ratio = prof.lambda;
  out.loglik = prof.loglik;
  out.data_signature = data.signature;

  const double sigma2 = prof.sigma2;
  const double tau2 = prof.lambda * sigma2;
  const Eigen::MatrixXd cov = sigma2 * prof.xtwx.ldlt().solve(Eigen::MatrixXd::Identity(prof.xtwx.rows(), prof.xtwx.cols()));
  for (Eigen::Index j = 0; j < prof.beta.size(); ++j) {
    Coefficient c;
    c.term = data.terms[static_cast<std::size_t>(j)];
    c.estimate = prof.beta[j];
    c.se = std::sqrt(std::max(cov(j, j), 0.0));
    c.p_value = wald_p_value(c.estimate, c.se);
    out.beta.push_back(c);
  }

  // Observed information of (tau2, sigma2) by central differences of the beta-profiled likelihood.
  const double h = 1e-4 * (tau2 + sigma2);
  auto ll = [&](double t2, double s2) { return lik.profile_over_beta(t2, s2); };
  const double f0 = ll(tau2, sigma2);
  Eigen::Matrix2d hess;
  hess(0, 0) = (ll(tau2 + h, sigma2) - 2.0 * f0 + ll(tau2 - h, sigma2)) / (h * h);
  hess(1, 1) = (ll(tau2, sigma2 + h) - 2.0 * f0 + ll(tau2, sigma2 - h)) / (h * h);
  hess(0, 1) = hess(1, 0) = (ll(tau2 + h, sigma2 + h) - ll(tau2 + h, sigma2 - h) - ll(tau2 - h, sigma2 + h) +
                             ll(tau2 - h, sigma2 - h)) / (4.0 * h * h);
  Eigen::Matrix2d info = -hess;
  out.variance_se_method = "observed";
  if (!(info(0, 0) > 0.0 && info.determinant() > 0.0)) {
    info = lik.expected_information(tau2, sigma2);
    out.variance_se_method = "expected";
  }
  const Eigen::Matrix2d vcov = info.inverse();
  out.tau2 = {tau2, std::sqrt(vcov(0, 0)), 1.0};
  out.sigma2 = {sigma2, std::sqrt(vcov(1, 1)), 1.0};
  out.tau2.p_value = wald_p_value(out.tau2.variance, out.tau2.se);
  out.sigma2.p_value = wald_p_value(out.sigma2.variance, out.sigma2.se);

  out.aic = aic_of(out.loglik, out.k());
  out.bic = bic_of(out.loglik, out.k(), out.n_obs);
  return out;
}

// ---------------------------------------------------------------------------------------------

struct VarianceShares {
  double level2 = 0.0;  // between groups
  double level1 = 0.0;  // within groups
};

inline VarianceShares variance_partition(double tau2, double sigma2) {
  if (!(sigma2 > 0.0) || !(tau2 >= 0.0)) {
    throw Error(ErrorKind::range, "variance partition needs tau2 >= 0 and sigma2 > 0");
  }
  const double level2 = tau2 / (tau2 + sigma2);
  return {level2, 1.0 - level2};
}

inline VarianceShares variance_partition(const MixedModelFit& fit) {
  return variance_partition(fit.tau2.variance, fit.sigma2.variance);
}

struct InformationCriteria {
  double aic = 0.0;
  double bic = 0.0;
};

/// full - null for both criteria.
inline InformationCriteria ic_delta(InformationCriteria null_ic, InformationCriteria full_ic) {
  return {full_ic.aic - null_ic.aic, full_ic.bic - null_ic.bic};
}

struct ModelComparison {
  MixedModelFit null_fit;
  MixedModelFit full_fit;
  double lrt_statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
  double delta_aic = 0.0;
  double delta_bic = 0.0;
};

/// Likelihood-ratio comparison of nested fits on the same rows.
inline ModelComparison compare(const MixedModelFit& null_fit, const MixedModelFit& full_fit) {
  if (null_fit.spec.response != full_fit.spec.response || null_fit.spec.grouping != full_fit.spec.grouping) {
    throw Error(ErrorKind::nesting, "models must share response and grouping");
  }
  const std::set<std::string> full(full_fit.spec.fixed_predictors.begin(), full_fit.spec.fixed_predictors.end());
  for (const auto& p : null_fit.spec.fixed_predictors) {
    if (!full.count(p)) throw Error(ErrorKind::nesting, "predictor '" + p + "' of the smaller model is missing from the larger one");
  }
  if (null_fit.n_obs != full_fit.n_obs || null_fit.data_signature != full_fit.data_signature) {
    throw Error(ErrorKind::data_mismatch, "models were fitted to different data");
  }
  ModelComparison c{null_fit, full_fit};
  c.df = static_cast<int>(full_fit.beta.size()) - static_cast<int>(null_fit.beta.size());
  c.lrt_statistic = std::max(0.0, 2.0 * (full_fit.loglik - null_fit.loglik));
  c.p_value = c.df > 0 ? chi_square_upper_tail(c.lrt_statistic, c.df) : 1.0;
  const auto d = ic_delta({null_fit.aic, null_fit.bic}, {full_fit.aic, full_fit.bic});
  c.delta_aic = d.aic;
  c.delta_bic = d.bic;
  return c;
}

// ---------------------------------------------------------------------------------------------

struct ScreeningRow {
  std::string candidate;
  std::optional<MixedModelFit> fit;
  std::vector<Coefficient> terms;  // non-intercept coefficients of the candidate
  int df = 0;
  double lrt_p_value = 1.0;
  bool flagged = false;
  std::optional<std::string> error;
};

struct ScreeningTable {
  std::string response;
  double alpha = 0.05;
  MixedModelFit null_fit;
  std::vector<ScreeningRow> rows;  // input order
};

/// Null model plus one single-predictor model per candidate; candidates whose LRT p-value is
/// below alpha are flagged. A failing candidate is recorded and the screen continues.
inline ScreeningTable screen_predictors(const DataTable& table, const std::string& response,
                                        const std::string& grouping, const std::vector<std::string>& candidates,
                                        double alpha = 0.05) {
  ScreeningTable out;
  out.response = response;
  out.alpha = alpha;
  out.null_fit = fit(table, {response, {}, grouping});
  for (const auto& cand : candidates) {
    ScreeningRow row;
    row.candidate = cand;
    try {
      auto f = fit(table, {response, {cand}, grouping});
      const auto cmp = compare(out.null_fit, f);
      row.terms.assign(f.beta.begin() + 1, f.beta.end());
      row.df = cmp.df;
      row.lrt_p_value = cmp.p_value;
      row.flagged = cmp.p_value < alpha;
      row.fit = std::move(f);
    } catch (const Error& e) {
      row.error = e.what();
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

struct SelectionStep {
  std::string added;
  double lrt_p_value = 1.0;
  MixedModelFit fit;
};

struct ForwardSelection {
  MixedModelFit null_fit;
  std::vector<SelectionStep> steps;
  MixedModelFit final_fit;
};

/// Forward selection: repeatedly add the candidate with the smallest LRT p-value against the
/// current model while that p-value is below alpha. Ties go to the earlier candidate.
inline ForwardSelection forward_select(const DataTable& table, const std::string& response,
                                       const std::string& grouping, std::vector<std::string> candidates,
                                       double alpha = 0.05) {
  ForwardSelection out;
  out.null_fit = fit(table, {response, {}, grouping});
  out.final_fit = out.null_fit;
  while (!candidates.empty()) {
    std::optional<SelectionStep> best;
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      auto preds = out.final_fit.spec.fixed_predictors;
      preds.push_back(candidates[i]);
      try {
        auto f = fit(table, {response, preds, grouping});
        const double p = compare(out.final_fit, f).p_value;
        if (!best || p < best->lrt_p_value) {
          best = SelectionStep{candidates[i], p, std::move(f)};
          best_idx = i;
        }
      } catch (const Error&) {
        // Unfittable additions (collinear, missing data) are skipped.
      }
    }
    if (!best || !(best->lrt_p_value < alpha)) break;
    out.final_fit = best->fit;
    out.steps.push_back(std::move(*best));
    candidates.erase(candidates.begin() + static_cast<std::ptrdiff_t>(best_idx));
  }
  return out;
}

inline MixedModelFit fit(const SessionDataset& data, const MixedModelSpec& spec, const FitOptions& opt = {}) {
  return fit(to_table(data), spec, opt);
}

}  // namespace collabgame
