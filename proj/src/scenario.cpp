#include "imfuse/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "imfuse/rng.hpp"

namespace imfuse {
namespace {

constexpr std::size_t k_max_ba_cells = 32;
constexpr std::size_t k_max_mmr_neighbors = 6;

// Measurement reports carry levels with 0.1 dB resolution.
double quantize_level(double v) { return std::round(v * 10.0) / 10.0; }

struct SampledPosition {
  double x = 0.0;
  double y = 0.0;
};

SampledPosition sample_traffic_position(const Scenario& s, Rng& rng) {
  std::vector<double> weights;
  weights.reserve(s.traffic.size());
  for (const auto& h : s.traffic) weights.push_back(h.weight);
  const auto& h = s.traffic[rng.pick_weighted(weights)];
  return {h.x + h.sigma_m * rng.normal(), h.y + h.sigma_m * rng.normal()};
}

double polyline_length(const Polyline& line) {
  double total = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i)
    total += std::hypot(line[i][0] - line[i - 1][0], line[i][1] - line[i - 1][1]);
  return total;
}

SampledPosition point_at_arclength(const Polyline& line, double dist) {
  double walked = 0.0;
  for (std::size_t i = 1; i < line.size(); ++i) {
    const double seg =
        std::hypot(line[i][0] - line[i - 1][0], line[i][1] - line[i - 1][1]);
    if (walked + seg >= dist && seg > 0.0) {
      const double t = (dist - walked) / seg;
      return {line[i - 1][0] + t * (line[i][0] - line[i - 1][0]),
              line[i - 1][1] + t * (line[i][1] - line[i - 1][1])};
    }
    walked += seg;
  }
  return {line.back()[0], line.back()[1]};
}

}  // namespace

void Scenario::validate() const {
  if (cells.empty()) throw std::invalid_argument("scenario: no cells");
  std::set<std::string> ids;
  for (const auto& c : cells) {
    if (c.id.empty()) throw std::invalid_argument("scenario: empty cell id");
    if (!ids.insert(c.id).second)
      throw std::invalid_argument("scenario: duplicate cell id '" + c.id + "'");
    if (!std::isfinite(c.x) || !std::isfinite(c.y) || !std::isfinite(c.tx_power_dbm))
      throw std::invalid_argument("scenario: cell '" + c.id + "' has non-finite parameters");
  }
  if (!ids.count(serving_id))
    throw std::invalid_argument("scenario: serving cell '" + serving_id + "' not in cells");

  if (ba_list.size() > k_max_ba_cells)
    throw std::invalid_argument("scenario: BA list exceeds 32 cells");
  std::set<std::string> ba;
  for (const auto& id : ba_list) {
    if (!ids.count(id))
      throw std::invalid_argument("scenario: BA cell '" + id + "' not in cells");
    if (id == serving_id) throw std::invalid_argument("scenario: serving cell in BA list");
    if (!ba.insert(id).second)
      throw std::invalid_argument("scenario: duplicate BA cell '" + id + "'");
  }

  if (traffic.empty()) throw std::invalid_argument("scenario: no traffic hotspots");
  double total = 0.0;
  for (const auto& h : traffic) {
    if (!(h.weight >= 0.0) || !std::isfinite(h.weight))
      throw std::invalid_argument("scenario: hotspot weights must be nonnegative");
    if (!(h.sigma_m > 0.0)) throw std::invalid_argument("scenario: hotspot sigma must be positive");
    total += h.weight;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("scenario: hotspot weights must sum to one");

  for (const auto& road : roads)
    if (road.size() < 2) throw std::invalid_argument("scenario: a road needs at least two vertices");

  if (!(pathloss.exponent > 0.0))
    throw std::invalid_argument("scenario: path loss exponent must be positive");
  if (!(pathloss.shadowing_sigma_db >= 0.0))
    throw std::invalid_argument("scenario: shadowing sigma must be nonnegative");
}

const CellSite& Scenario::cell(const std::string& id) const {
  for (const auto& c : cells)
    if (c.id == id) return c;
  throw std::invalid_argument("scenario: unknown cell '" + id + "'");
}

const CellSite& Scenario::serving_cell() const { return cell(serving_id); }

double rxlev_dbm(const Scenario& scenario, const CellSite& cell, double x, double y,
                 double shadowing_db) {
  const double d = std::max(1.0, std::hypot(x - cell.x, y - cell.y));
  return cell.tx_power_dbm - scenario.pathloss.reference_loss_db -
         10.0 * scenario.pathloss.exponent * std::log10(d) + shadowing_db;
}

std::vector<MmrReport> simulate_mmrs(const Scenario& scenario, std::size_t n_reports,
                                     std::uint64_t seed) {
  scenario.validate();
  if (n_reports == 0) throw std::invalid_argument("simulate_mmrs: n_reports must be positive");

  const double sigma = scenario.pathloss.shadowing_sigma_db;
  Rng rng(seed);
  std::vector<MmrReport> reports;
  reports.reserve(n_reports);
  for (std::size_t r = 0; r < n_reports; ++r) {
    const auto pos = sample_traffic_position(scenario, rng);

    MmrReport rep;
    rep.serving_id = scenario.serving_id;
    rep.serving_rxlev_dbm = quantize_level(
        rxlev_dbm(scenario, scenario.serving_cell(), pos.x, pos.y, sigma * rng.normal()));

    std::vector<Reading> candidates;
    for (const auto& id : scenario.ba_list) {
      const double rx = quantize_level(
          rxlev_dbm(scenario, scenario.cell(id), pos.x, pos.y, sigma * rng.normal()));
      if (rx >= scenario.detection_threshold_dbm) candidates.push_back({id, rx});
    }
    std::sort(candidates.begin(), candidates.end(), [](const Reading& a, const Reading& b) {
      if (a.rxlev_dbm != b.rxlev_dbm) return a.rxlev_dbm > b.rxlev_dbm;
      return a.cell_id < b.cell_id;
    });
    if (candidates.size() > k_max_mmr_neighbors) candidates.resize(k_max_mmr_neighbors);
    rep.neighbors = std::move(candidates);
    reports.push_back(std::move(rep));
  }
  return reports;
}

DriveTestResult simulate_drive_test(const Scenario& scenario, double sample_spacing_m,
                                    std::uint64_t seed) {
  scenario.validate();
  if (!(sample_spacing_m > 0.0))
    throw std::invalid_argument("simulate_drive_test: spacing must be positive");
  if (scenario.roads.empty())
    throw std::invalid_argument("simulate_drive_test: scenario has no roads");

  const double sigma = scenario.pathloss.shadowing_sigma_db;
  Rng rng(seed);
  DriveTestResult result;
  for (std::size_t road = 0; road < scenario.roads.size(); ++road) {
    const auto& line = scenario.roads[road];
    const double length = polyline_length(line);
    const std::size_t n_points = static_cast<std::size_t>(length / sample_spacing_m) + 1;
    for (std::size_t p = 0; p < n_points; ++p) {
      const auto pos = point_at_arclength(line, static_cast<double>(p) * sample_spacing_m);

      // Draw every cell's level before deciding whether the point is usable,
      // so the stream position does not depend on earlier outcomes.
      DtRecord rec;
      rec.x = pos.x;
      rec.y = pos.y;
      double serving_rx = 0.0;
      for (const auto& cell : scenario.cells) {
        const double rx =
            quantize_level(rxlev_dbm(scenario, cell, pos.x, pos.y, sigma * rng.normal()));
        if (cell.id == scenario.serving_id) {
          serving_rx = rx;
          rec.readings.push_back({cell.id, rx});
        } else if (rx >= scenario.detection_threshold_dbm) {
          rec.readings.push_back({cell.id, rx});
        }
      }
      if (serving_rx < scenario.noise_floor_dbm) {
        ++result.skipped;
        continue;
      }
      result.records.push_back(std::move(rec));
      result.region_labels.push_back(static_cast<int>(road));
    }
  }
  return result;
}

Icdm ground_truth_icdm(const Scenario& scenario, std::size_t n_samples,
                       const BinningConfig& binning, std::uint64_t seed) {
  scenario.validate();
  binning.validate();
  if (n_samples < 1000)
    throw std::invalid_argument("ground_truth_icdm: need at least 1000 samples");

  const double sigma = scenario.pathloss.shadowing_sigma_db;
  const double threshold = binning.cir_threshold_db();
  Rng rng(seed);

  std::vector<long long> below(scenario.cells.size(), 0);
  for (std::size_t t = 0; t < n_samples; ++t) {
    const auto pos = sample_traffic_position(scenario, rng);
    const double serving_rx =
        rxlev_dbm(scenario, scenario.serving_cell(), pos.x, pos.y, sigma * rng.normal());
    for (std::size_t i = 0; i < scenario.cells.size(); ++i) {
      const auto& cell = scenario.cells[i];
      if (cell.id == scenario.serving_id) {
        rng.normal();  // keep the stream aligned across cell orderings
        continue;
      }
      const double rx = rxlev_dbm(scenario, cell, pos.x, pos.y, sigma * rng.normal());
      if (cir_db(serving_rx, rx) < threshold) ++below[i];
    }
  }

  Icdm out;
  out.serving_id = scenario.serving_id;
  for (std::size_t i = 0; i < scenario.cells.size(); ++i) {
    if (scenario.cells[i].id == scenario.serving_id) continue;
    out.entries[scenario.cells[i].id] =
        static_cast<double>(below[i]) / static_cast<double>(n_samples);
  }
  return out;
}

}  // namespace imfuse
