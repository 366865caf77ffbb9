#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "imfuse/binning.hpp"
#include "imfuse/source_data.hpp"

namespace imfuse {

// CIR sample pattern of one drive-test record: per neighbor, the interval
// index of its CIR for the (at most six) strongest detected neighbors, zero
// for every other neighbor. Acts as a radio fingerprint of the position.
struct Cirsp {
  std::vector<int> bins;  // one entry per DT neighbor, 0 or 1..Q
};

// One-hot encoding of the CIRSPs of all records, laid out like the MMRs
// vector: row i*Q + (q-1) of column m is 1 when record m has pattern value q
// for neighbor i. Kept sparse; each column holds at most six ones.
struct SpMatrix {
  std::size_t row_count = 0;  // neighbor_count * Q
  int bin_count = 0;
  std::vector<std::vector<std::int32_t>> columns;  // sorted nonzero row indices

  std::size_t record_count() const { return columns.size(); }
  Eigen::VectorXd dense_column(std::size_t m) const;
};

Cirsp derive_cirsp(const DtMatrix& dt, std::size_t record, const BinningConfig& binning);

Eigen::VectorXd to_sp_vector(const Cirsp& cirsp, const BinningConfig& binning);

SpMatrix build_sp_matrix(const DtMatrix& dt, const BinningConfig& binning);

}  // namespace imfuse
