#include "imfuse/regression.hpp"

#include <boost/math/distributions/fisher_f.hpp>

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace imfuse {
namespace {

constexpr double k_rank_tolerance = 1e-10;

struct SubsetFit {
  Eigen::VectorXd coef;
  Eigen::VectorXd residual;
  double sse = 0.0;
};

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const std::vector<int>& cols) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = x.col(cols[i]);
  return out;
}

SubsetFit fit_subset(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const std::vector<int>& cols) {
  const Eigen::MatrixXd xs = select_columns(x, cols);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xs);
  qr.setThreshold(k_rank_tolerance);
  if (qr.rank() < xs.cols())
    throw std::runtime_error("stepwise_fit: design is rank deficient");
  SubsetFit fit;
  fit.coef = qr.solve(y);
  fit.residual = y - xs * fit.coef;
  fit.sse = fit.residual.squaredNorm();
  return fit;
}

// Columns of the current model, intercept first then entered clusters.
std::vector<int> model_columns(const std::vector<int>& entered) {
  std::vector<int> cols{0};
  for (const int k : entered) cols.push_back(k);
  return cols;
}

}  // namespace

double f_pvalue(double f_stat, int df1, int df2) {
  if (df1 < 1 || df2 < 1) throw std::invalid_argument("f_pvalue: degrees of freedom must be positive");
  if (std::isnan(f_stat) || f_stat < 0.0)
    throw std::invalid_argument("f_pvalue: statistic must be nonnegative");
  if (std::isinf(f_stat)) return 0.0;
  const boost::math::fisher_f_distribution<double> dist(df1, df2);
  return boost::math::cdf(boost::math::complement(dist, f_stat));
}

RegressionDesign build_design(const ClusterModel& cluster, const MmrsVector& aligned_mmrs,
                              const CellIndexMap& map) {
  const std::size_t n_common = map.common_count();
  const std::size_t q = static_cast<std::size_t>(aligned_mmrs.bin_count);
  const std::size_t rows = n_common * q;
  if (rows == 0) throw std::invalid_argument("build_design: no common neighbors");
  if (aligned_mmrs.neighbor_ids.size() < n_common ||
      static_cast<std::size_t>(cluster.centers.rows()) < rows)
    throw std::invalid_argument("build_design: inputs are not aligned");
  for (std::size_t j = 0; j < n_common; ++j)
    if (aligned_mmrs.neighbor_ids[j] != map.common[j])
      throw std::invalid_argument("build_design: MMRs vector is not in aligned order");

  RegressionDesign design;
  design.common_count = n_common;
  design.response.resize(static_cast<Eigen::Index>(rows));
  for (std::size_t r = 0; r < rows; ++r)
    design.response(static_cast<Eigen::Index>(r)) = static_cast<double>(aligned_mmrs.counts[r]);

  design.design.resize(static_cast<Eigen::Index>(rows), cluster.centers.cols() + 1);
  design.design.col(0).setOnes();
  design.design.rightCols(cluster.centers.cols()) =
      cluster.centers.topRows(static_cast<Eigen::Index>(rows));
  return design;
}

TrafficEstimate stepwise_fit(const RegressionDesign& design, double alpha_enter,
                             double alpha_remove) {
  const Eigen::VectorXd& y = design.response;
  const Eigen::MatrixXd& x = design.design;
  const Eigen::Index n = y.size();
  const int n_clusters = static_cast<int>(x.cols()) - 1;
  if (n < 3) throw std::invalid_argument("stepwise_fit: too few rows");
  if (n_clusters < 1) throw std::invalid_argument("stepwise_fit: design has no predictors");
  if (!(alpha_enter > 0.0 && alpha_enter < 1.0) || !(alpha_remove > 0.0 && alpha_remove < 1.0))
    throw std::invalid_argument("stepwise_fit: alphas must lie in (0, 1)");

  const double y_mean = y.mean();
  const double sst = (y.array() - y_mean).matrix().squaredNorm();

  std::vector<int> entered;
  SubsetFit current = fit_subset(x, y, model_columns(entered));
  std::set<std::vector<int>> visited;

  const double sse_floor = 1e-12 * std::max(sst, 1.0);

  while (static_cast<int>(entered.size()) < n_clusters) {
    if (current.sse <= sse_floor) break;  // nothing left to explain

    // Rank the remaining clusters by partial correlation with the response,
    // both residualized on the current model.
    int best = -1;
    double best_abs_corr = 0.0;
    int evaluable = 0;
    const double res_norm = current.residual.squaredNorm();
    for (int cand = 1; cand <= n_clusters; ++cand) {
      if (std::find(entered.begin(), entered.end(), cand) != entered.end()) continue;
      SubsetFit cand_on_model;
      try {
        cand_on_model = fit_subset(x, x.col(cand), model_columns(entered));
      } catch (const std::runtime_error&) {
        continue;
      }
      const double cand_norm = cand_on_model.residual.squaredNorm();
      if (cand_norm <= k_rank_tolerance * std::max(1.0, x.col(cand).squaredNorm()))
        continue;  // collinear with the current model
      ++evaluable;
      const double corr =
          current.residual.dot(cand_on_model.residual) / std::sqrt(res_norm * cand_norm);
      if (std::abs(corr) > best_abs_corr) {
        best_abs_corr = std::abs(corr);
        best = cand;
      }
    }
    if (best < 0) {
      if (entered.empty() && evaluable == 0)
        throw std::runtime_error("stepwise_fit: design is rank deficient");
      break;
    }

    auto trial = entered;
    trial.push_back(best);
    const SubsetFit fit_trial = fit_subset(x, y, model_columns(trial));
    const int df2 = static_cast<int>(n) - (static_cast<int>(trial.size()) + 1);
    if (df2 < 1) break;
    const double denom = fit_trial.sse / df2;
    const double f_enter = denom > 0.0 ? (current.sse - fit_trial.sse) / denom
                                       : std::numeric_limits<double>::infinity();
    if (f_pvalue(std::max(0.0, f_enter), 1, df2) > alpha_enter) break;

    entered = std::move(trial);
    current = fit_trial;

    // Backward pass: drop anything whose partial F went insignificant.
    bool removed = true;
    while (removed && entered.size() > 1) {
      removed = false;
      int worst = -1;
      double worst_p = -1.0;
      const int df2_rm = static_cast<int>(n) - (static_cast<int>(entered.size()) + 1);
      if (df2_rm < 1) break;
      for (const int k : entered) {
        std::vector<int> without;
        for (const int j : entered)
          if (j != k) without.push_back(j);
        const SubsetFit fit_without = fit_subset(x, y, model_columns(without));
        const double rm_denom = current.sse / df2_rm;
        const double f_rm = rm_denom > 0.0 ? (fit_without.sse - current.sse) / rm_denom
                                           : std::numeric_limits<double>::infinity();
        const double p = f_pvalue(std::max(0.0, f_rm), 1, df2_rm);
        if (p > worst_p) {
          worst_p = p;
          worst = k;
        }
      }
      if (worst >= 0 && worst_p >= alpha_remove) {
        entered.erase(std::find(entered.begin(), entered.end(), worst));
        current = fit_subset(x, y, model_columns(entered));
        removed = true;
      }
    }

    auto key = entered;
    std::sort(key.begin(), key.end());
    if (!visited.insert(key).second) break;  // revisited a model; stop cycling
  }

  TrafficEstimate out;
  out.beta = Eigen::VectorXd::Zero(x.cols());
  const std::vector<int> cols = model_columns(entered);
  const SubsetFit fit_final = fit_subset(x, y, cols);
  for (std::size_t i = 0; i < cols.size(); ++i)
    out.beta(cols[i]) = fit_final.coef(static_cast<Eigen::Index>(i));
  out.entered = entered;

  if (sst > 0.0) out.r_squared = 1.0 - fit_final.sse / sst;
  if (!entered.empty()) {
    const int p = static_cast<int>(entered.size());
    const int df2 = static_cast<int>(n) - p - 1;
    if (df2 >= 1) {
      const double denom = fit_final.sse / df2;
      const double f_model = denom > 0.0 ? ((sst - fit_final.sse) / p) / denom
                                         : std::numeric_limits<double>::infinity();
      out.model_p_value = f_pvalue(std::max(0.0, f_model), p, df2);
    } else {
      out.model_p_value = 1.0;
    }
  }
  return out;
}

}  // namespace imfuse
