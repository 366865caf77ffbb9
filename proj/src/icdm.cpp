#include "imfuse/icdm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace imfuse {
namespace {

double safe_ratio(long long num, long long den) {
  return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

}  // namespace

Icdm icdm_from_mmrs(const MmrsVector& mmrs, const BinningConfig& binning,
                    MmrsNormalization normalization) {
  binning.validate();
  if (binning.interval_count() != mmrs.bin_count)
    throw std::invalid_argument("icdm_from_mmrs: binning does not match the vector");
  if (mmrs.total_reports <= 0) throw std::invalid_argument("icdm_from_mmrs: no reports");

  Icdm out;
  out.serving_id = mmrs.serving_id;
  for (std::size_t j = 0; j < mmrs.neighbor_count(); ++j) {
    const long long severe = mmrs.severe_count(j, binning.q_threshold);
    const long long den = normalization == MmrsNormalization::kTotalReports
                              ? mmrs.total_reports
                              : mmrs.sample_count(j);
    out.entries[mmrs.neighbor_ids[j]] = safe_ratio(severe, den);
  }
  return out;
}

Icdm icdm_from_mmrs(const ReinforcedMmrs& reinforced, const BinningConfig& binning,
                    MmrsNormalization normalization) {
  Icdm out = icdm_from_mmrs(reinforced.base, binning, normalization);

  // Appended cells use the same denominator convention; their counts are
  // estimates of what the reports would have contained.
  for (std::size_t j = 0; j < reinforced.appended_ids.size(); ++j) {
    long long severe = 0;
    long long total = 0;
    for (int q = 1; q <= binning.interval_count(); ++q) {
      const long long c = reinforced.appended_at(j, q);
      total += c;
      if (q <= binning.q_threshold) severe += c;
    }
    const long long den = normalization == MmrsNormalization::kTotalReports
                              ? reinforced.base.total_reports
                              : total;
    // Estimated counts can overshoot the report total; the value is still a
    // probability, so cap it.
    const auto inserted = out.entries.emplace(reinforced.appended_ids[j],
                                              std::min(1.0, safe_ratio(severe, den)));
    if (!inserted.second)
      throw std::invalid_argument("icdm_from_mmrs: appended cell duplicates a measured one");
  }
  return out;
}

Icdm icdm_from_dt(const DtMatrix& dt, const BinningConfig& binning) {
  binning.validate();
  if (dt.record_count() == 0) throw std::invalid_argument("icdm_from_dt: no records");

  Icdm out;
  out.serving_id = dt.serving_id;
  const double threshold = binning.cir_threshold_db();
  for (std::size_t i = 0; i < dt.neighbor_count(); ++i) {
    long long below = 0;
    for (std::size_t m = 0; m < dt.record_count(); ++m)
      if (dt.detected(i, m) &&
          dt.cir_db(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) < threshold)
        ++below;
    out.entries[dt.neighbor_ids[i]] =
        static_cast<double>(below) / static_cast<double>(dt.record_count());
  }
  return out;
}

Icdm icdm_from_dt(const ReshapedDt& reshaped, const BinningConfig& binning) {
  binning.validate();
  const long long total = reshaped.record_count();
  if (total <= 0) throw std::invalid_argument("icdm_from_dt: reshaped data has no records");
  if (reshaped.multiplicity.size() != reshaped.source.record_count())
    throw std::invalid_argument("icdm_from_dt: multiplicities do not match the records");

  Icdm out;
  out.serving_id = reshaped.source.serving_id;
  const double threshold = binning.cir_threshold_db();
  for (std::size_t i = 0; i < reshaped.source.neighbor_count(); ++i) {
    long long below = 0;
    for (std::size_t m = 0; m < reshaped.source.record_count(); ++m)
      if (reshaped.source.detected(i, m) &&
          reshaped.source.cir_db(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) <
              threshold)
        below += reshaped.multiplicity[m];
    out.entries[reshaped.source.neighbor_ids[i]] =
        static_cast<double>(below) / static_cast<double>(total);
  }
  return out;
}

double pearson(const Icdm& a, const Icdm& b, PearsonSupport support) {
  std::vector<std::pair<double, double>> pairs;
  if (support == PearsonSupport::kIntersection) {
    for (const auto& [id, va] : a.entries) {
      const auto it = b.entries.find(id);
      if (it != b.entries.end()) pairs.emplace_back(va, it->second);
    }
  } else {
    for (const auto& [id, va] : a.entries) {
      const auto it = b.entries.find(id);
      pairs.emplace_back(va, it != b.entries.end() ? it->second : 0.0);
    }
    for (const auto& [id, vb] : b.entries)
      if (!a.entries.count(id)) pairs.emplace_back(0.0, vb);
  }
  if (pairs.size() < 2)
    throw std::invalid_argument("pearson: fewer than two shared neighbors");

  double mean_a = 0.0;
  double mean_b = 0.0;
  for (const auto& [va, vb] : pairs) {
    mean_a += va;
    mean_b += vb;
  }
  mean_a /= static_cast<double>(pairs.size());
  mean_b /= static_cast<double>(pairs.size());

  double cov = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
  for (const auto& [va, vb] : pairs) {
    cov += (va - mean_a) * (vb - mean_b);
    var_a += (va - mean_a) * (va - mean_a);
    var_b += (vb - mean_b) * (vb - mean_b);
  }
  if (var_a <= 0.0 || var_b <= 0.0)
    throw std::invalid_argument("pearson: a series is constant");
  return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

ImError im_error(const Icdm& estimate, const Icdm& truth) {
  std::vector<std::string> ids;
  for (const auto& [id, v] : estimate.entries) ids.push_back(id);
  for (const auto& [id, v] : truth.entries)
    if (!estimate.entries.count(id)) ids.push_back(id);

  ImError out;
  if (ids.empty()) return out;
  double sum = 0.0;
  for (const auto& id : ids) {
    const auto ie = estimate.entries.find(id);
    const auto it = truth.entries.find(id);
    const double e = ie != estimate.entries.end() ? ie->second : 0.0;
    const double t = it != truth.entries.end() ? it->second : 0.0;
    const double ae = std::abs(e - t);
    sum += ae;
    out.max_abs_error = std::max(out.max_abs_error, ae);
    if ((e > 0.0) != (t > 0.0)) ++out.support_mismatch;
  }
  out.mean_abs_error = sum / static_cast<double>(ids.size());
  return out;
}

}  // namespace imfuse
