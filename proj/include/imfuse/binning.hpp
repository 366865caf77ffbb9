#pragma once

#include <vector>

namespace imfuse {

// Partition of the carrier-to-interference axis into Q ordered intervals.
// edges holds the Q-1 strictly increasing boundaries in dB; interval 1 is
// everything below edges.front() (worst interference) and interval Q
// everything at or above edges.back(). Intervals are half-open [lo, hi).
struct BinningConfig {
  std::vector<double> edges;
  int q_threshold = 6;  // intervals 1..q_threshold count as harmful interference

  int interval_count() const { return static_cast<int>(edges.size()) + 1; }
  double cir_threshold_db() const;
  void validate() const;

  // Q = 10 with 3 dB steps from -6 dB to 18 dB and a 9 dB protection ratio.
  static BinningConfig gsm_default();
};

// CIR in dB for a co-channel serving/neighbor level pair.
double cir_db(double serving_rxlev_dbm, double neighbor_rxlev_dbm);

// Interval index in 1..Q for a finite CIR value.
int bin_cir(double cir_db, const BinningConfig& binning);

}  // namespace imfuse
