#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "imfuse/cirsp.hpp"

namespace imfuse {

// K-means partition of the SP columns. Cluster ids run 1..k. Column k-1 of
// centers is the coordinate-wise mean of the cluster's SP columns, i.e. the
// fraction of the cluster's records whose pattern has value q for neighbor i.
// Clusters that end up empty keep an all-zero center.
struct ClusterModel {
  int k = 0;
  std::vector<int> membership;  // one entry per record, in 1..k
  std::vector<long long> sizes;
  Eigen::MatrixXd centers;  // row_count x k
  double inertia = 0.0;
  std::vector<double> inertia_history;  // objective after each assignment pass
};

// Lloyd iterations over the sparse SP columns with k-means++ seeding.
// Distance ties and empty clusters are resolved deterministically, so equal
// seeds give equal models. tol is the relative inertia improvement that
// counts as converged.
ClusterModel kmeans(const SpMatrix& sp, int k, std::uint64_t seed, int max_iter = 300,
                    double tol = 1e-6);

// Per-cluster means computed directly from a membership, independently of
// the kmeans loop. Empty clusters yield zero columns.
Eigen::MatrixXd cluster_centers(const std::vector<int>& membership, const SpMatrix& sp, int k);

}  // namespace imfuse
