#include "imfuse/binning.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace imfuse {

double BinningConfig::cir_threshold_db() const {
  validate();
  return edges.at(static_cast<std::size_t>(q_threshold) - 1);
}

void BinningConfig::validate() const {
  if (edges.empty()) throw std::invalid_argument("binning: at least one edge required");
  for (double e : edges)
    if (!std::isfinite(e)) throw std::invalid_argument("binning: edges must be finite");
  for (std::size_t i = 1; i < edges.size(); ++i)
    if (!(edges[i - 1] < edges[i]))
      throw std::invalid_argument("binning: edges must be strictly increasing");
  if (q_threshold < 1 || q_threshold >= interval_count())
    throw std::invalid_argument("binning: q_threshold must lie in [1, Q-1]");
}

BinningConfig BinningConfig::gsm_default() {
  return BinningConfig{{-6.0, -3.0, 0.0, 3.0, 6.0, 9.0, 12.0, 15.0, 18.0}, 6};
}

double cir_db(double serving_rxlev_dbm, double neighbor_rxlev_dbm) {
  return serving_rxlev_dbm - neighbor_rxlev_dbm;
}

int bin_cir(double cir_db, const BinningConfig& binning) {
  binning.validate();
  if (!std::isfinite(cir_db)) throw std::invalid_argument("bin_cir: CIR must be finite");
  const auto it = std::upper_bound(binning.edges.begin(), binning.edges.end(), cir_db);
  // Number of edges <= cir; the value sits above exactly that many boundaries.
  return 1 + static_cast<int>(it - binning.edges.begin());
}

}  // namespace imfuse
