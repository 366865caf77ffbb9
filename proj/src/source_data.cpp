#include "imfuse/source_data.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace imfuse {
namespace {

constexpr std::size_t k_max_mmr_neighbors = 6;

void check_distinct_ids(const std::vector<Reading>& readings, const char* what) {
  std::set<std::string> seen;
  for (const auto& r : readings)
    if (!seen.insert(r.cell_id).second)
      throw std::invalid_argument(std::string(what) + ": duplicate cell id '" + r.cell_id + "'");
}

std::vector<int> index_of(const std::vector<std::string>& ids,
                          const std::vector<std::string>& order) {
  std::unordered_map<std::string, int> pos;
  for (std::size_t i = 0; i < ids.size(); ++i) pos.emplace(ids[i], static_cast<int>(i));
  std::vector<int> out;
  out.reserve(order.size());
  for (const auto& id : order) out.push_back(pos.at(id));
  return out;
}

}  // namespace

long long MmrsVector::at(std::size_t j, int q) const {
  if (j >= neighbor_ids.size() || q < 1 || q > bin_count)
    throw std::out_of_range("MmrsVector::at: index out of range");
  return counts[j * static_cast<std::size_t>(bin_count) + static_cast<std::size_t>(q - 1)];
}

long long MmrsVector::severe_count(std::size_t j, int q_threshold) const {
  if (q_threshold < 1 || q_threshold > bin_count)
    throw std::out_of_range("MmrsVector::severe_count: q_threshold out of range");
  long long s = 0;
  for (int q = 1; q <= q_threshold; ++q) s += at(j, q);
  return s;
}

long long MmrsVector::sample_count(std::size_t j) const {
  long long s = 0;
  for (int q = 1; q <= bin_count; ++q) s += at(j, q);
  return s;
}

std::vector<std::string> CellIndexMap::mmr_ids() const {
  std::vector<std::string> out = common;
  out.insert(out.end(), mmr_only.begin(), mmr_only.end());
  return out;
}

std::vector<std::string> CellIndexMap::dt_ids() const {
  std::vector<std::string> out = common;
  out.insert(out.end(), dt_only.begin(), dt_only.end());
  return out;
}

MmrsVector build_mmrs_vector(const std::vector<MmrReport>& reports, const BinningConfig& binning) {
  binning.validate();
  MmrsVector out;
  out.bin_count = binning.interval_count();
  if (reports.empty()) return out;

  out.serving_id = reports.front().serving_id;
  std::set<std::string> ids;
  for (const auto& rep : reports) {
    if (rep.serving_id != out.serving_id)
      throw std::invalid_argument("build_mmrs_vector: reports mix serving cells '" +
                                  out.serving_id + "' and '" + rep.serving_id + "'");
    if (rep.neighbors.size() > k_max_mmr_neighbors)
      throw std::invalid_argument("build_mmrs_vector: a report lists more than 6 neighbors");
    check_distinct_ids(rep.neighbors, "build_mmrs_vector");
    for (const auto& n : rep.neighbors) {
      if (n.cell_id == out.serving_id)
        throw std::invalid_argument("build_mmrs_vector: serving cell listed as neighbor");
      ids.insert(n.cell_id);
    }
  }
  out.neighbor_ids.assign(ids.begin(), ids.end());
  out.counts.assign(out.neighbor_ids.size() * static_cast<std::size_t>(out.bin_count), 0);
  out.total_reports = static_cast<long long>(reports.size());

  std::unordered_map<std::string, std::size_t> row;
  for (std::size_t j = 0; j < out.neighbor_ids.size(); ++j) row.emplace(out.neighbor_ids[j], j);
  for (const auto& rep : reports) {
    for (const auto& n : rep.neighbors) {
      const int q = bin_cir(cir_db(rep.serving_rxlev_dbm, n.rxlev_dbm), binning);
      ++out.counts[row.at(n.cell_id) * static_cast<std::size_t>(out.bin_count) +
                   static_cast<std::size_t>(q - 1)];
    }
  }
  return out;
}

DtMatrix build_dt_matrix(const std::vector<DtRecord>& records, const std::string& serving_id) {
  if (records.empty()) throw std::invalid_argument("build_dt_matrix: no records");
  if (serving_id.empty()) throw std::invalid_argument("build_dt_matrix: serving id required");

  std::set<std::string> ids;
  for (const auto& rec : records) {
    check_distinct_ids(rec.readings, "build_dt_matrix");
    bool has_serving = false;
    for (const auto& r : rec.readings) {
      if (r.cell_id == serving_id)
        has_serving = true;
      else
        ids.insert(r.cell_id);
    }
    if (!has_serving)
      throw std::invalid_argument("build_dt_matrix: record lacks a reading for serving cell '" +
                                  serving_id + "'");
  }

  DtMatrix out;
  out.serving_id = serving_id;
  out.neighbor_ids.assign(ids.begin(), ids.end());
  out.cir_db = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(out.neighbor_ids.size()),
                                         static_cast<Eigen::Index>(records.size()),
                                         std::numeric_limits<double>::quiet_NaN());

  std::unordered_map<std::string, Eigen::Index> row;
  for (std::size_t i = 0; i < out.neighbor_ids.size(); ++i)
    row.emplace(out.neighbor_ids[i], static_cast<Eigen::Index>(i));
  for (std::size_t m = 0; m < records.size(); ++m) {
    double serving_rx = 0.0;
    for (const auto& r : records[m].readings)
      if (r.cell_id == serving_id) serving_rx = r.rxlev_dbm;
    for (const auto& r : records[m].readings) {
      if (r.cell_id == serving_id) continue;
      out.cir_db(row.at(r.cell_id), static_cast<Eigen::Index>(m)) =
          cir_db(serving_rx, r.rxlev_dbm);
    }
  }
  return out;
}

AlignedData align_common_neighbors(const MmrsVector& mmrs, const DtMatrix& dt) {
  if (!mmrs.serving_id.empty() && mmrs.serving_id != dt.serving_id)
    throw std::invalid_argument("align_common_neighbors: serving cells differ ('" +
                                mmrs.serving_id + "' vs '" + dt.serving_id + "')");

  const std::set<std::string> mmr_set(mmrs.neighbor_ids.begin(), mmrs.neighbor_ids.end());
  const std::set<std::string> dt_set(dt.neighbor_ids.begin(), dt.neighbor_ids.end());
  if (mmr_set.size() != mmrs.neighbor_ids.size() || dt_set.size() != dt.neighbor_ids.size())
    throw std::invalid_argument("align_common_neighbors: duplicate neighbor ids");

  CellIndexMap map;
  std::set_intersection(mmr_set.begin(), mmr_set.end(), dt_set.begin(), dt_set.end(),
                        std::back_inserter(map.common));
  std::set_difference(mmr_set.begin(), mmr_set.end(), dt_set.begin(), dt_set.end(),
                      std::back_inserter(map.mmr_only));
  std::set_difference(dt_set.begin(), dt_set.end(), mmr_set.begin(), mmr_set.end(),
                      std::back_inserter(map.dt_only));

  AlignedData out;
  out.map = map;

  out.mmrs.serving_id = mmrs.serving_id;
  out.mmrs.bin_count = mmrs.bin_count;
  out.mmrs.total_reports = mmrs.total_reports;
  out.mmrs.neighbor_ids = map.mmr_ids();
  out.mmrs.counts.resize(mmrs.counts.size());
  const std::size_t q = static_cast<std::size_t>(mmrs.bin_count);
  const auto mmr_perm = index_of(mmrs.neighbor_ids, out.mmrs.neighbor_ids);
  for (std::size_t j = 0; j < mmr_perm.size(); ++j)
    std::copy_n(mmrs.counts.begin() + static_cast<std::ptrdiff_t>(mmr_perm[j]) *
                                          static_cast<std::ptrdiff_t>(q),
                q, out.mmrs.counts.begin() + static_cast<std::ptrdiff_t>(j * q));

  out.dt.serving_id = dt.serving_id;
  out.dt.neighbor_ids = map.dt_ids();
  out.dt.cir_db.resize(dt.cir_db.rows(), dt.cir_db.cols());
  const auto dt_perm = index_of(dt.neighbor_ids, out.dt.neighbor_ids);
  for (std::size_t i = 0; i < dt_perm.size(); ++i)
    out.dt.cir_db.row(static_cast<Eigen::Index>(i)) = dt.cir_db.row(dt_perm[i]);

  return out;
}

}  // namespace imfuse
