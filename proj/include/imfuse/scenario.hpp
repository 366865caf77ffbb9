#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "imfuse/binning.hpp"
#include "imfuse/icdm.hpp"
#include "imfuse/measurements.hpp"

namespace imfuse {

struct CellSite {
  std::string id;
  double x = 0.0;  // meters
  double y = 0.0;
  double tx_power_dbm = 40.0;
};

// One component of the traffic mixture: an isotropic Gaussian blob of users.
struct Hotspot {
  double weight = 0.0;
  double x = 0.0;
  double y = 0.0;
  double sigma_m = 1.0;
};

// Log-distance path loss with optional log-normal shadowing,
//   rx = tx - reference_loss_db - 10 * exponent * log10(max(d, 1 m))
struct PathlossModel {
  double reference_loss_db = 30.0;
  double exponent = 3.5;
  double shadowing_sigma_db = 0.0;
};

using Polyline = std::vector<std::array<double, 2>>;

// Synthetic radio layout used to exercise the pipeline end to end: cell
// sites, a serving cell with its BA list, a traffic mixture for report
// positions, and roads for drive-test routes.
struct Scenario {
  std::vector<CellSite> cells;
  std::string serving_id;
  std::vector<std::string> ba_list;  // ids a phone may report; excludes the serving cell
  std::vector<Hotspot> traffic;      // weights sum to one
  std::vector<Polyline> roads;
  PathlossModel pathloss;
  double noise_floor_dbm = -120.0;          // serving below this yields no usable record
  double detection_threshold_dbm = -105.0;  // weaker neighbors go unreported
  std::uint64_t seed = 0;

  void validate() const;
  const CellSite& cell(const std::string& id) const;
  const CellSite& serving_cell() const;
};

// Received level in dBm at (x, y); shadowing_db is added as-is, so the
// function stays deterministic for a fixed draw.
double rxlev_dbm(const Scenario& scenario, const CellSite& cell, double x, double y,
                 double shadowing_db);

// Draws report positions from the traffic mixture and measures the serving
// cell plus the six strongest detectable BA neighbors. Levels are quantized
// to 0.1 dB like real measurement reports.
std::vector<MmrReport> simulate_mmrs(const Scenario& scenario, std::size_t n_reports,
                                     std::uint64_t seed);

struct DriveTestResult {
  std::vector<DtRecord> records;
  std::vector<int> region_labels;  // index of the road each record came from
  std::size_t skipped = 0;         // sample points without a usable serving signal
};

// Walks every road at a fixed arc-length spacing and records all detectable
// cells at each sample point.
DriveTestResult simulate_drive_test(const Scenario& scenario, double sample_spacing_m,
                                    std::uint64_t seed);

// Monte Carlo estimate of the true dependency row: the probability, under
// the traffic mixture, that the CIR against each other cell falls below the
// protection threshold. No detection limits apply; this is the quantity the
// measurement-based estimators approximate.
Icdm ground_truth_icdm(const Scenario& scenario, std::size_t n_samples,
                       const BinningConfig& binning, std::uint64_t seed);

}  // namespace imfuse
