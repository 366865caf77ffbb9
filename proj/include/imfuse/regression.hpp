#pragma once

#include <Eigen/Core>

#include <vector>

#include "imfuse/clustering.hpp"
#include "imfuse/source_data.hpp"

namespace imfuse {

// Regression problem restricted to the neighbors shared by MMR and DT data:
// the response stacks the leading N*Q counts of the aligned MMRs vector, the
// design puts an all-ones intercept column next to the matching rows of the
// cluster centers.
struct RegressionDesign {
  Eigen::VectorXd response;  // length N*Q
  Eigen::MatrixXd design;    // N*Q x (k+1), column 0 is the intercept
  std::size_t common_count = 0;
};

// Estimated traffic distribution over the clusters. beta[0] is the
// intercept, beta[k] the estimated report count for cluster k; clusters that
// never entered keep a zero coefficient. An empty entered list means no
// cluster passed the entry test and beta holds the intercept-only fit.
struct TrafficEstimate {
  Eigen::VectorXd beta;
  std::vector<int> entered;  // cluster ids in entry order
  double r_squared = 0.0;
  double model_p_value = 1.0;
};

RegressionDesign build_design(const ClusterModel& cluster, const MmrsVector& aligned_mmrs,
                              const CellIndexMap& map);

// Forward stepwise selection by largest partial correlation with a partial-F
// entry test, followed by backward elimination after every entry. Candidates
// that are numerically collinear with the current model are skipped.
TrafficEstimate stepwise_fit(const RegressionDesign& design, double alpha_enter = 0.05,
                             double alpha_remove = 0.10);

// Upper tail probability of the F distribution.
double f_pvalue(double f_stat, int df1, int df2);

}  // namespace imfuse
