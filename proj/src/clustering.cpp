#include "imfuse/clustering.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "imfuse/rng.hpp"

namespace imfuse {
namespace {

// Squared Euclidean distance of a binary sparse column to a dense center:
// ||c||^2 + nnz - 2 * sum of c over the column's rows.
double sq_dist(const std::vector<std::int32_t>& col, const Eigen::MatrixXd& centers,
               Eigen::Index k, double center_sq_norm) {
  double dot = 0.0;
  for (const auto r : col) dot += centers(r, k);
  return std::max(0.0, center_sq_norm + static_cast<double>(col.size()) - 2.0 * dot);
}

struct Assignment {
  std::vector<int> membership;  // 1..k
  std::vector<double> distance;
  double inertia = 0.0;
};

Assignment assign_all(const SpMatrix& sp, const Eigen::MatrixXd& centers) {
  const Eigen::Index k = centers.cols();
  Eigen::VectorXd sq_norms(k);
  for (Eigen::Index c = 0; c < k; ++c) sq_norms(c) = centers.col(c).squaredNorm();

  Assignment out;
  out.membership.resize(sp.record_count());
  out.distance.resize(sp.record_count());
  for (std::size_t m = 0; m < sp.record_count(); ++m) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Index best_k = 0;
    for (Eigen::Index c = 0; c < k; ++c) {
      const double d = sq_dist(sp.columns[m], centers, c, sq_norms(c));
      if (d < best) {
        best = d;
        best_k = c;
      }
    }
    out.membership[m] = static_cast<int>(best_k) + 1;
    out.distance[m] = best;
    out.inertia += best;
  }
  return out;
}

std::vector<long long> count_sizes(const std::vector<int>& membership, int k) {
  std::vector<long long> sizes(static_cast<std::size_t>(k), 0);
  for (const int c : membership) ++sizes[static_cast<std::size_t>(c - 1)];
  return sizes;
}

// Re-homes the farthest point of a multi-member cluster into each empty
// cluster, snapping the empty center onto that point. Deterministic; gives
// up when every remaining distance is zero.
void repair_empty_clusters(const SpMatrix& sp, Assignment& a, Eigen::MatrixXd& centers, int k) {
  auto sizes = count_sizes(a.membership, k);
  for (int empty = 1; empty <= k; ++empty) {
    if (sizes[static_cast<std::size_t>(empty - 1)] != 0) continue;
    std::size_t donor = sp.record_count();
    double worst = 0.0;
    for (std::size_t m = 0; m < sp.record_count(); ++m) {
      if (sizes[static_cast<std::size_t>(a.membership[m] - 1)] < 2) continue;
      if (a.distance[m] > worst) {
        worst = a.distance[m];
        donor = m;
      }
    }
    if (donor == sp.record_count()) continue;  // nothing separable remains
    --sizes[static_cast<std::size_t>(a.membership[donor] - 1)];
    ++sizes[static_cast<std::size_t>(empty - 1)];
    a.membership[donor] = empty;
    a.inertia -= a.distance[donor];
    a.distance[donor] = 0.0;
    centers.col(empty - 1) = sp.dense_column(donor);
  }
}

Eigen::MatrixXd seed_centers(const SpMatrix& sp, int k, Rng& rng) {
  const std::size_t record_count = sp.record_count();
  Eigen::MatrixXd centers =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sp.row_count), k);

  // k-means++: the first center uniform, the rest proportional to the
  // squared distance to the nearest chosen center.
  const std::size_t first = static_cast<std::size_t>(rng.index(record_count));
  centers.col(0) = sp.dense_column(first);

  std::vector<double> d2(record_count);
  for (std::size_t m = 0; m < record_count; ++m)
    d2[m] = sq_dist(sp.columns[m], centers, 0, centers.col(0).squaredNorm());

  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (const double d : d2) total += d;
    std::size_t chosen;
    if (total <= 0.0) {
      chosen = static_cast<std::size_t>(rng.index(record_count));
    } else {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      chosen = record_count - 1;
      for (std::size_t m = 0; m < record_count; ++m) {
        acc += d2[m];
        if (u < acc) {
          chosen = m;
          break;
        }
      }
    }
    centers.col(c) = sp.dense_column(chosen);
    const double sq_norm = centers.col(c).squaredNorm();
    for (std::size_t m = 0; m < record_count; ++m)
      d2[m] = std::min(d2[m], sq_dist(sp.columns[m], centers, c, sq_norm));
  }
  return centers;
}

}  // namespace

Eigen::MatrixXd cluster_centers(const std::vector<int>& membership, const SpMatrix& sp, int k) {
  if (k < 1) throw std::invalid_argument("cluster_centers: k must be positive");
  if (membership.size() != sp.record_count())
    throw std::invalid_argument("cluster_centers: membership size mismatch");
  Eigen::MatrixXd centers = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(sp.row_count), k);
  std::vector<long long> sizes(static_cast<std::size_t>(k), 0);
  for (std::size_t m = 0; m < membership.size(); ++m) {
    const int c = membership[m];
    if (c < 1 || c > k) throw std::invalid_argument("cluster_centers: cluster id out of range");
    ++sizes[static_cast<std::size_t>(c - 1)];
    for (const auto r : sp.columns[m]) centers(r, c - 1) += 1.0;
  }
  for (int c = 0; c < k; ++c)
    if (sizes[static_cast<std::size_t>(c)] > 0)
      centers.col(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
  return centers;
}

ClusterModel kmeans(const SpMatrix& sp, int k, std::uint64_t seed, int max_iter, double tol) {
  if (k < 1) throw std::invalid_argument("kmeans: k must be positive");
  if (sp.record_count() == 0) throw std::invalid_argument("kmeans: no records");
  if (static_cast<std::size_t>(k) > sp.record_count())
    throw std::invalid_argument("kmeans: k exceeds the number of records");
  if (max_iter < 1) throw std::invalid_argument("kmeans: max_iter must be positive");
  if (!(tol >= 0.0)) throw std::invalid_argument("kmeans: tol must be nonnegative");

  Rng rng(seed);
  Eigen::MatrixXd centers = seed_centers(sp, k, rng);

  ClusterModel model;
  model.k = k;

  Assignment current = assign_all(sp, centers);
  repair_empty_clusters(sp, current, centers, k);
  model.inertia_history.push_back(current.inertia);

  for (int iter = 0; iter < max_iter; ++iter) {
    centers = cluster_centers(current.membership, sp, k);
    Assignment next = assign_all(sp, centers);
    repair_empty_clusters(sp, next, centers, k);
    model.inertia_history.push_back(next.inertia);

    const bool stable = next.membership == current.membership;
    const double drop = current.inertia - next.inertia;
    current = std::move(next);
    if (stable) break;
    if (drop <= tol * std::max(current.inertia, 1e-300) && iter > 0) break;
  }

  model.membership = std::move(current.membership);
  model.sizes = count_sizes(model.membership, k);
  model.centers = cluster_centers(model.membership, sp, k);

  // Final objective against the exact per-cluster means.
  Eigen::VectorXd sq_norms(k);
  for (int c = 0; c < k; ++c) sq_norms(c) = model.centers.col(c).squaredNorm();
  model.inertia = 0.0;
  for (std::size_t m = 0; m < sp.record_count(); ++m) {
    const int c = model.membership[m] - 1;
    model.inertia += sq_dist(sp.columns[m], model.centers, c, sq_norms(c));
  }
  return model;
}

}  // namespace imfuse
