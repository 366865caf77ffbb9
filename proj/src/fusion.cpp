#include "imfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "imfuse/rng.hpp"

namespace imfuse {
namespace {

// beta with negative cluster coefficients clamped to zero; a cluster cannot
// contribute negative traffic.
double cluster_weight(const TrafficEstimate& traffic, int k) {
  return std::max(0.0, traffic.beta(k));
}

std::size_t aligned_dt_row(const CellIndexMap& map, const std::string& id) {
  const auto it = std::find(map.dt_only.begin(), map.dt_only.end(), id);
  if (it == map.dt_only.end())
    throw std::invalid_argument("fusion: cell '" + id + "' is not a DT-only neighbor");
  return map.common_count() + static_cast<std::size_t>(it - map.dt_only.begin());
}

long long round_half_up(double v) {
  return static_cast<long long>(std::floor(v + 0.5));
}

void check_traffic(const ClusterModel& cluster, const TrafficEstimate& traffic) {
  if (traffic.beta.size() != cluster.k + 1)
    throw std::invalid_argument("fusion: traffic estimate does not match the cluster model");
}

}  // namespace

long long ReinforcedMmrs::appended_at(std::size_t j, int q) const {
  const std::size_t bins = static_cast<std::size_t>(base.bin_count);
  if (j >= appended_ids.size() || q < 1 || static_cast<std::size_t>(q) > bins)
    throw std::out_of_range("ReinforcedMmrs::appended_at: index out of range");
  return appended_counts[j * bins + static_cast<std::size_t>(q - 1)];
}

std::vector<std::string> find_omitted_severe(const ClusterModel& cluster,
                                             const TrafficEstimate& traffic,
                                             const CellIndexMap& map, const BinningConfig& binning,
                                             double min_weight) {
  binning.validate();
  check_traffic(cluster, traffic);
  if (!(min_weight >= 0.0)) throw std::invalid_argument("fusion: min_weight must be nonnegative");
  const Eigen::Index q_count = binning.interval_count();
  const std::size_t n_rows = map.common_count() + map.dt_only.size();
  if (cluster.centers.rows() != static_cast<Eigen::Index>(n_rows) * q_count)
    throw std::invalid_argument("fusion: cluster centers do not cover the aligned neighbors");

  std::vector<std::string> omitted;
  for (std::size_t i = 0; i < map.dt_only.size(); ++i) {
    const Eigen::Index base = static_cast<Eigen::Index>(map.common_count() + i) * q_count;
    double mass = 0.0;
    for (int q = 1; q <= binning.q_threshold; ++q)
      for (int k = 1; k <= cluster.k; ++k)
        mass += cluster_weight(traffic, k) * cluster.centers(base + q - 1, k - 1);
    if (mass > min_weight) omitted.push_back(map.dt_only[i]);
  }
  return omitted;
}

std::vector<long long> complete_mmrs(const ClusterModel& cluster, const TrafficEstimate& traffic,
                                     const CellIndexMap& map,
                                     const std::vector<std::string>& omitted,
                                     const CompletionOptions& options) {
  check_traffic(cluster, traffic);
  const std::size_t n_rows = map.common_count() + map.dt_only.size();
  if (n_rows == 0) throw std::invalid_argument("fusion: empty alignment");
  if (cluster.centers.rows() % static_cast<Eigen::Index>(n_rows) != 0)
    throw std::invalid_argument("fusion: cluster centers do not cover the aligned neighbors");
  const Eigen::Index q_count = cluster.centers.rows() / static_cast<Eigen::Index>(n_rows);

  std::vector<long long> counts;
  counts.reserve(omitted.size() * static_cast<std::size_t>(q_count));
  for (const auto& id : omitted) {
    const Eigen::Index base = static_cast<Eigen::Index>(aligned_dt_row(map, id)) * q_count;
    for (Eigen::Index q = 0; q < q_count; ++q) {
      double v = options.include_intercept ? traffic.beta(0) : 0.0;
      for (int k = 1; k <= cluster.k; ++k)
        v += cluster_weight(traffic, k) * cluster.centers(base + q, k - 1);
      counts.push_back(std::max<long long>(0, round_half_up(v)));
    }
  }
  return counts;
}

ReinforcedMmrs reinforce(const MmrsVector& mmrs, const std::vector<long long>& estimated_counts,
                         const std::vector<std::string>& omitted) {
  if (estimated_counts.size() != omitted.size() * static_cast<std::size_t>(mmrs.bin_count))
    throw std::invalid_argument("reinforce: counts do not match the omitted cells");
  std::set<std::string> seen(mmrs.neighbor_ids.begin(), mmrs.neighbor_ids.end());
  for (const auto& id : omitted) {
    if (!seen.insert(id).second)
      throw std::invalid_argument("reinforce: cell '" + id + "' already present");
    if (id == mmrs.serving_id) throw std::invalid_argument("reinforce: serving cell appended");
  }
  for (const long long c : estimated_counts)
    if (c < 0) throw std::invalid_argument("reinforce: negative estimated count");

  ReinforcedMmrs out;
  out.base = mmrs;
  out.appended_ids = omitted;
  out.appended_counts = estimated_counts;
  return out;
}

long long ReshapedDt::record_count() const {
  long long total = 0;
  for (const long long m : multiplicity) total += m;
  return total;
}

DtMatrix ReshapedDt::materialize() const {
  DtMatrix out;
  out.serving_id = source.serving_id;
  out.neighbor_ids = source.neighbor_ids;
  out.cir_db.resize(source.cir_db.rows(), static_cast<Eigen::Index>(record_count()));
  Eigen::Index col = 0;
  int max_cluster = 0;
  for (const int c : membership) max_cluster = std::max(max_cluster, c);
  for (int c = 1; c <= max_cluster; ++c)
    for (std::size_t m = 0; m < multiplicity.size(); ++m) {
      if (membership[m] != c) continue;
      for (long long r = 0; r < multiplicity[m]; ++r)
        out.cir_db.col(col++) = source.cir_db.col(static_cast<Eigen::Index>(m));
    }
  return out;
}

ReshapedDt reshape_dt(const DtMatrix& dt, const ClusterModel& cluster,
                      const TrafficEstimate& traffic, std::uint64_t seed) {
  check_traffic(cluster, traffic);
  if (cluster.membership.size() != dt.record_count())
    throw std::invalid_argument("reshape_dt: cluster membership does not match the records");

  ReshapedDt out;
  out.source = dt;
  out.membership = cluster.membership;
  out.multiplicity.assign(dt.record_count(), 0);

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(cluster.k));
  for (std::size_t m = 0; m < cluster.membership.size(); ++m) {
    const int c = cluster.membership[m];
    if (c < 1 || c > cluster.k)
      throw std::invalid_argument("reshape_dt: membership value out of range");
    members[static_cast<std::size_t>(c - 1)].push_back(m);
  }

  Rng rng(seed);
  for (int k = 1; k <= cluster.k; ++k) {
    const auto& idx = members[static_cast<std::size_t>(k - 1)];
    const long long b = static_cast<long long>(idx.size());
    const long long target = static_cast<long long>(std::floor(cluster_weight(traffic, k)));
    SetTarget st;
    st.cluster = k;
    st.size = b;
    if (b == 0) {
      if (target > 0)
        throw std::runtime_error("reshape_dt: cluster " + std::to_string(k) +
                                 " has a positive target but no records");
      out.per_set_targets.push_back(st);
      continue;
    }
    st.replicate = target / b;
    st.extra = target % b;
    for (const std::size_t m : idx) out.multiplicity[m] += st.replicate;
    const auto picked =
        rng.sample_without_replacement(idx.size(), static_cast<std::size_t>(st.extra));
    for (const std::size_t p : picked) out.multiplicity[idx[p]] += 1;
    out.per_set_targets.push_back(st);
  }
  return out;
}

}  // namespace imfuse
