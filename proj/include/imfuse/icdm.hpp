#pragma once

#include <map>
#include <string>

#include "imfuse/binning.hpp"
#include "imfuse/fusion.hpp"
#include "imfuse/source_data.hpp"

namespace imfuse {

// One row of an inter-cell dependency matrix: for every neighbor, the
// estimated probability that the CIR against it falls below the protection
// threshold.
struct Icdm {
  std::string serving_id;
  std::map<std::string, double> entries;
};

enum class MmrsNormalization {
  kTotalReports,  // severe counts divided by the number of reports
  kPerNeighbor,   // severe counts divided by the neighbor's own sample count
};

enum class PearsonSupport {
  kIntersection,    // ids present in both matrices
  kUnionWithZeros,  // all ids, missing entries read as zero
};

Icdm icdm_from_mmrs(const MmrsVector& mmrs, const BinningConfig& binning,
                    MmrsNormalization normalization = MmrsNormalization::kTotalReports);

Icdm icdm_from_mmrs(const ReinforcedMmrs& reinforced, const BinningConfig& binning,
                    MmrsNormalization normalization = MmrsNormalization::kTotalReports);

Icdm icdm_from_dt(const DtMatrix& dt, const BinningConfig& binning);

// Weighted variant; a record counts with its multiplicity.
Icdm icdm_from_dt(const ReshapedDt& reshaped, const BinningConfig& binning);

// Pearson correlation of two matrices over a shared neighbor set.
double pearson(const Icdm& a, const Icdm& b,
               PearsonSupport support = PearsonSupport::kIntersection);

struct ImError {
  double mean_abs_error = 0.0;
  double max_abs_error = 0.0;
  long long support_mismatch = 0;  // ids nonzero on exactly one side
};

// Elementwise error over the union of neighbor sets, absent entries read as
// zero.
ImError im_error(const Icdm& estimate, const Icdm& truth);

}  // namespace imfuse
