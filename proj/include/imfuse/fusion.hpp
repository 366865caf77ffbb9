#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "imfuse/binning.hpp"
#include "imfuse/clustering.hpp"
#include "imfuse/regression.hpp"
#include "imfuse/source_data.hpp"

namespace imfuse {

// MMRs data extended with estimated counts for neighbors that only ever
// appeared in drive tests. The measured block is kept verbatim.
struct ReinforcedMmrs {
  MmrsVector base;
  std::vector<std::string> appended_ids;
  std::vector<long long> appended_counts;  // appended_ids.size() * bin_count

  long long appended_at(std::size_t j, int q) const;
};

struct CompletionOptions {
  bool include_intercept = true;  // add beta[0] to every estimated slot
};

// DT-only neighbors whose estimated interference mass below the protection
// threshold is positive: sum over severe intervals and entered clusters of
// coefficient times center weight. Returned in the aligned DT-only order.
std::vector<std::string> find_omitted_severe(const ClusterModel& cluster,
                                             const TrafficEstimate& traffic,
                                             const CellIndexMap& map, const BinningConfig& binning,
                                             double min_weight = 0.0);

// Estimated per-interval MMR counts for the omitted cells, rounded half-up
// and floored at zero. Layout matches MmrsVector::counts.
std::vector<long long> complete_mmrs(const ClusterModel& cluster, const TrafficEstimate& traffic,
                                     const CellIndexMap& map,
                                     const std::vector<std::string>& omitted,
                                     const CompletionOptions& options = {});

ReinforcedMmrs reinforce(const MmrsVector& mmrs, const std::vector<long long>& estimated_counts,
                         const std::vector<std::string>& omitted);

// Replication plan for one cluster: all of its records are kept `replicate`
// times and `extra` distinct members once more, so the cluster contributes
// replicate*size + extra records to the reshaped data.
struct SetTarget {
  int cluster = 0;
  long long size = 0;
  long long replicate = 0;
  long long extra = 0;

  long long target() const { return replicate * size + extra; }
};

// Drive-test data reweighted toward the estimated traffic distribution,
// held as one multiplicity per source record rather than materialized
// copies.
struct ReshapedDt {
  DtMatrix source;
  std::vector<int> membership;
  std::vector<long long> multiplicity;  // one entry per source record
  std::vector<SetTarget> per_set_targets;

  long long record_count() const;
  // Expands the plan into explicit records, grouped by ascending cluster and
  // source order within a cluster. Intended for small inputs.
  DtMatrix materialize() const;
};

// Rounds every cluster's estimated count down to an integer target and picks
// the records carrying the remainder uniformly without replacement.
ReshapedDt reshape_dt(const DtMatrix& dt, const ClusterModel& cluster,
                      const TrafficEstimate& traffic, std::uint64_t seed);

}  // namespace imfuse
