#include "imfuse/cirsp.hpp"

#include <algorithm>
#include <stdexcept>

namespace imfuse {
namespace {

constexpr std::size_t k_max_pattern_cells = 6;

}  // namespace

Eigen::VectorXd SpMatrix::dense_column(std::size_t m) const {
  if (m >= columns.size()) throw std::out_of_range("SpMatrix::dense_column: column out of range");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(row_count));
  for (const auto r : columns[m]) v(r) = 1.0;
  return v;
}

Cirsp derive_cirsp(const DtMatrix& dt, std::size_t record, const BinningConfig& binning) {
  binning.validate();
  if (record >= dt.record_count())
    throw std::out_of_range("derive_cirsp: record index out of range");

  // Strongest interferers are the ones with the lowest CIR; keep at most six,
  // ties broken by neighbor order so the pattern is reproducible.
  std::vector<std::size_t> detected;
  for (std::size_t i = 0; i < dt.neighbor_count(); ++i)
    if (dt.detected(i, record)) detected.push_back(i);

  const Eigen::Index m = static_cast<Eigen::Index>(record);
  std::sort(detected.begin(), detected.end(), [&](std::size_t a, std::size_t b) {
    const double ca = dt.cir_db(static_cast<Eigen::Index>(a), m);
    const double cb = dt.cir_db(static_cast<Eigen::Index>(b), m);
    if (ca != cb) return ca < cb;
    return a < b;
  });
  if (detected.size() > k_max_pattern_cells) detected.resize(k_max_pattern_cells);

  Cirsp out;
  out.bins.assign(dt.neighbor_count(), 0);
  for (const auto i : detected)
    out.bins[i] = bin_cir(dt.cir_db(static_cast<Eigen::Index>(i), m), binning);
  return out;
}

Eigen::VectorXd to_sp_vector(const Cirsp& cirsp, const BinningConfig& binning) {
  binning.validate();
  const int q_count = binning.interval_count();
  Eigen::VectorXd v =
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cirsp.bins.size()) * q_count);
  for (std::size_t i = 0; i < cirsp.bins.size(); ++i) {
    const int q = cirsp.bins[i];
    if (q == 0) continue;
    if (q < 1 || q > q_count) throw std::invalid_argument("to_sp_vector: pattern value out of range");
    v(static_cast<Eigen::Index>(i) * q_count + (q - 1)) = 1.0;
  }
  return v;
}

SpMatrix build_sp_matrix(const DtMatrix& dt, const BinningConfig& binning) {
  binning.validate();
  SpMatrix sp;
  sp.bin_count = binning.interval_count();
  sp.row_count = dt.neighbor_count() * static_cast<std::size_t>(sp.bin_count);
  sp.columns.resize(dt.record_count());
  for (std::size_t m = 0; m < dt.record_count(); ++m) {
    const Cirsp pattern = derive_cirsp(dt, m, binning);
    auto& col = sp.columns[m];
    for (std::size_t i = 0; i < pattern.bins.size(); ++i)
      if (pattern.bins[i] != 0)
        col.push_back(static_cast<std::int32_t>(i * static_cast<std::size_t>(sp.bin_count)) +
                      (pattern.bins[i] - 1));
    std::sort(col.begin(), col.end());
  }
  return sp;
}

}  // namespace imfuse
