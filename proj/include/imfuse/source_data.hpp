#pragma once

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <vector>

#include "imfuse/binning.hpp"
#include "imfuse/measurements.hpp"

namespace imfuse {

// Binned MMR counts for one serving cell. counts[j*Q + (q-1)] is the number
// of reported CIR samples against neighbor j that fell into interval q.
struct MmrsVector {
  std::string serving_id;
  std::vector<std::string> neighbor_ids;
  std::vector<long long> counts;  // neighbor_ids.size() * bin_count entries
  long long total_reports = 0;
  int bin_count = 0;

  std::size_t neighbor_count() const { return neighbor_ids.size(); }
  long long at(std::size_t j, int q) const;
  // Sum over intervals 1..q_threshold for neighbor j.
  long long severe_count(std::size_t j, int q_threshold) const;
  // Total samples recorded against neighbor j.
  long long sample_count(std::size_t j) const;
};

// Per-record CIR values against every neighbor seen anywhere in the drive
// test. NaN marks "not detected in this record".
struct DtMatrix {
  std::string serving_id;
  std::vector<std::string> neighbor_ids;
  Eigen::MatrixXd cir_db;  // neighbor_ids.size() rows, one column per record

  std::size_t neighbor_count() const { return neighbor_ids.size(); }
  std::size_t record_count() const { return static_cast<std::size_t>(cir_db.cols()); }
  bool detected(std::size_t i, std::size_t m) const {
    return std::isfinite(cir_db(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)));
  }
};

// Alignment of the MMR and DT neighbor sets. The common ids occupy the
// leading positions of both structures, in one shared order.
struct CellIndexMap {
  std::vector<std::string> common;
  std::vector<std::string> mmr_only;
  std::vector<std::string> dt_only;

  std::size_t common_count() const { return common.size(); }
  std::vector<std::string> mmr_ids() const;  // common followed by mmr_only
  std::vector<std::string> dt_ids() const;   // common followed by dt_only
};

struct AlignedData {
  MmrsVector mmrs;
  DtMatrix dt;
  CellIndexMap map;
};

// Bins a batch of reports into an MMRs vector. All reports must share one
// serving cell and respect the per-report limits; neighbor ids come out in
// lexicographic order. An empty batch yields an empty vector.
MmrsVector build_mmrs_vector(const std::vector<MmrReport>& reports, const BinningConfig& binning);

// Collects drive-test records into a CIR matrix against the given serving
// cell. Every record must contain a serving reading.
DtMatrix build_dt_matrix(const std::vector<DtRecord>& records, const std::string& serving_id);

// Reorders both sides so the shared neighbors lead in identical order.
// Counts and CIR values are permuted, never altered.
AlignedData align_common_neighbors(const MmrsVector& mmrs, const DtMatrix& dt);

}  // namespace imfuse
