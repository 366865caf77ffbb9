#include <doctest.h>

#include <cmath>
#include <limits>

#include "imfuse/icdm.hpp"
#include "imfuse/rng.hpp"

using namespace imfuse;

namespace {

constexpr double k_nan = std::numeric_limits<double>::quiet_NaN();

BinningConfig three_bins() {
  BinningConfig b;
  b.edges = {0.0, 5.0};
  b.q_threshold = 2;
  return b;
}

MmrsVector sample_mmrs() {
  MmrsVector m;
  m.serving_id = "S";
  m.neighbor_ids = {"A", "B", "C"};
  m.bin_count = 3;
  // A: severe 4 of 10 samples. B: severe 0 of 5. C: never sampled.
  m.counts = {3, 1, 6, 0, 0, 5, 0, 0, 0};
  m.total_reports = 20;
  return m;
}

DtMatrix sample_dt() {
  DtMatrix dt;
  dt.serving_id = "S";
  dt.neighbor_ids = {"A", "B"};
  dt.cir_db.resize(2, 4);
  dt.cir_db << 8.9, 9.0, k_nan, -3.0, 10.0, k_nan, k_nan, 20.0;
  return dt;
}

}  // namespace

TEST_CASE("MMR matrix rows are severe fractions") {
  const auto binning = three_bins();
  const auto mmrs = sample_mmrs();

  const Icdm by_reports = icdm_from_mmrs(mmrs, binning);
  CHECK(by_reports.serving_id == "S");
  REQUIRE(by_reports.entries.size() == 3);
  CHECK(by_reports.entries.at("A") == doctest::Approx(4.0 / 20.0));
  CHECK(by_reports.entries.at("B") == 0.0);
  CHECK(by_reports.entries.at("C") == 0.0);

  const Icdm by_samples = icdm_from_mmrs(mmrs, binning, MmrsNormalization::kPerNeighbor);
  CHECK(by_samples.entries.at("A") == doctest::Approx(4.0 / 10.0));
  CHECK(by_samples.entries.at("B") == 0.0);
  CHECK(by_samples.entries.at("C") == 0.0);  // zero denominator reads as zero

  auto wrong_bins = mmrs;
  wrong_bins.bin_count = 4;
  wrong_bins.counts.resize(12, 0);
  CHECK_THROWS_AS(icdm_from_mmrs(wrong_bins, binning), std::invalid_argument);
  auto no_reports = mmrs;
  no_reports.total_reports = 0;
  CHECK_THROWS_AS(icdm_from_mmrs(no_reports, binning), std::invalid_argument);
}

TEST_CASE("reinforced rows extend the matrix without changing measured rows") {
  const auto binning = three_bins();
  const auto mmrs = sample_mmrs();

  ReinforcedMmrs r;
  r.base = mmrs;
  r.appended_ids = {"X"};
  r.appended_counts = {2, 0, 2};  // severe 2 of 4 estimated samples

  const Icdm by_reports = icdm_from_mmrs(r, binning);
  REQUIRE(by_reports.entries.size() == 4);
  CHECK(by_reports.entries.at("A") == doctest::Approx(0.2));
  CHECK(by_reports.entries.at("X") == doctest::Approx(2.0 / 20.0));

  const Icdm by_samples = icdm_from_mmrs(r, binning, MmrsNormalization::kPerNeighbor);
  CHECK(by_samples.entries.at("X") == doctest::Approx(0.5));
  CHECK(by_samples.entries.at("A") == doctest::Approx(0.4));

  ReinforcedMmrs clash = r;
  clash.appended_ids = {"A"};
  CHECK_THROWS_AS(icdm_from_mmrs(clash, binning), std::invalid_argument);
}

TEST_CASE("DT matrix rows count records below the protection threshold") {
  BinningConfig binning = BinningConfig::gsm_default();
  CHECK(binning.cir_threshold_db() == 9.0);

  const DtMatrix dt = sample_dt();
  const Icdm icdm = icdm_from_dt(dt, binning);
  CHECK(icdm.serving_id == "S");
  // A: 8.9 and -3.0 fall below 9 dB, 9.0 itself does not, one record misses
  // the cell entirely. Denominator is the full record count.
  CHECK(icdm.entries.at("A") == doctest::Approx(2.0 / 4.0));
  CHECK(icdm.entries.at("B") == 0.0);

  DtMatrix empty = dt;
  empty.cir_db.resize(2, 0);
  CHECK_THROWS_AS(icdm_from_dt(empty, binning), std::invalid_argument);
}

TEST_CASE("reshaped DT rows weight records by multiplicity") {
  const BinningConfig binning = BinningConfig::gsm_default();

  ReshapedDt r;
  r.source = sample_dt();
  r.membership = {1, 1, 2, 2};
  r.multiplicity = {2, 1, 0, 3};

  const Icdm icdm = icdm_from_dt(r, binning);
  // A's below-threshold records carry weights 2 and 3 out of 6 total.
  CHECK(icdm.entries.at("A") == doctest::Approx(5.0 / 6.0));
  CHECK(icdm.entries.at("B") == 0.0);

  // The unweighted matrix is the multiplicity-one special case.
  ReshapedDt unit = r;
  unit.multiplicity = {1, 1, 1, 1};
  const Icdm plain = icdm_from_dt(r.source, binning);
  const Icdm weighted = icdm_from_dt(unit, binning);
  for (const auto& [id, v] : plain.entries) CHECK(weighted.entries.at(id) == v);

  ReshapedDt empty = r;
  empty.multiplicity = {0, 0, 0, 0};
  CHECK_THROWS_AS(icdm_from_dt(empty, binning), std::invalid_argument);
  ReshapedDt mismatched = r;
  mismatched.multiplicity = {1, 1};
  CHECK_THROWS_AS(icdm_from_dt(mismatched, binning), std::invalid_argument);
}

namespace {

Icdm icdm_of(std::initializer_list<std::pair<const char*, double>> entries) {
  Icdm icdm;
  icdm.serving_id = "S";
  for (const auto& [id, v] : entries) icdm.entries[id] = v;
  return icdm;
}

}  // namespace

TEST_CASE("pearson correlation against hand values") {
  const Icdm a = icdm_of({{"A", 1.0}, {"B", 2.0}, {"C", 3.0}, {"D", 4.0}});
  const Icdm linear = icdm_of({{"A", 2.0}, {"B", 4.0}, {"C", 6.0}, {"D", 8.0}});
  const Icdm reversed = icdm_of({{"A", 4.0}, {"B", 3.0}, {"C", 2.0}, {"D", 1.0}});
  const Icdm swapped = icdm_of({{"A", 1.0}, {"B", 3.0}, {"C", 2.0}, {"D", 4.0}});

  CHECK(pearson(a, linear) == doctest::Approx(1.0));
  CHECK(pearson(a, reversed) == doctest::Approx(-1.0));
  CHECK(pearson(a, swapped) == doctest::Approx(0.8));
  CHECK(pearson(a, linear) <= 1.0);
  CHECK(pearson(a, reversed) >= -1.0);

  // Intersection support ignores ids missing on either side.
  Icdm extra = a;
  extra.entries["E"] = 100.0;
  CHECK(pearson(extra, swapped) == doctest::Approx(0.8));
  CHECK(pearson(swapped, extra) == doctest::Approx(0.8));

  // Union support reads absences as zero.
  const Icdm left = icdm_of({{"A", 1.0}, {"B", 2.0}});
  const Icdm right = icdm_of({{"B", 2.0}, {"C", 2.0}});
  CHECK(pearson(left, right, PearsonSupport::kUnionWithZeros) == doctest::Approx(0.0));

  const Icdm lone = icdm_of({{"A", 1.0}});
  CHECK_THROWS_AS(pearson(lone, a), std::invalid_argument);
  const Icdm constant = icdm_of({{"A", 0.5}, {"B", 0.5}, {"C", 0.5}, {"D", 0.5}});
  CHECK_THROWS_AS(pearson(a, constant), std::invalid_argument);
}

TEST_CASE("matrix error over the union of neighbors") {
  const Icdm estimate = icdm_of({{"A", 0.5}, {"B", 0.0}, {"C", 0.2}});
  const Icdm truth = icdm_of({{"A", 0.25}, {"C", 0.2}, {"D", 0.1}});

  const ImError err = im_error(estimate, truth);
  CHECK(err.mean_abs_error == doctest::Approx(0.35 / 4.0));
  CHECK(err.max_abs_error == doctest::Approx(0.25));
  CHECK(err.support_mismatch == 1);  // D is interference the estimate missed

  const ImError self = im_error(truth, truth);
  CHECK(self.mean_abs_error == 0.0);
  CHECK(self.max_abs_error == 0.0);
  CHECK(self.support_mismatch == 0);

  const ImError isolated = im_error(icdm_of({{"A", 0.3}}), icdm_of({{"B", 0.4}}));
  CHECK(isolated.support_mismatch == 2);
  CHECK(isolated.mean_abs_error == doctest::Approx(0.35));

  CHECK(im_error(Icdm{}, Icdm{}).mean_abs_error == 0.0);
}

TEST_CASE("matrix entries stay in range and grow with the threshold") {
  Rng rng(21);
  BinningConfig binning = BinningConfig::gsm_default();

  DtMatrix dt;
  dt.serving_id = "S";
  for (int i = 0; i < 6; ++i) dt.neighbor_ids.push_back("N" + std::to_string(i));
  dt.cir_db.resize(6, 40);
  for (Eigen::Index r = 0; r < 6; ++r)
    for (Eigen::Index c = 0; c < 40; ++c)
      dt.cir_db(r, c) = rng.uniform() < 0.2 ? k_nan : -10.0 + 35.0 * rng.uniform();

  MmrsVector mmrs;
  mmrs.serving_id = "S";
  mmrs.neighbor_ids = dt.neighbor_ids;
  mmrs.bin_count = binning.interval_count();
  for (int i = 0; i < 6 * mmrs.bin_count; ++i)
    mmrs.counts.push_back(static_cast<long long>(rng.index(7)));
  mmrs.total_reports = 200;

  Icdm prev_dt;
  Icdm prev_mmr;
  for (int t = 1; t < binning.interval_count(); ++t) {
    BinningConfig b = binning;
    b.q_threshold = t;
    const Icdm from_dt = icdm_from_dt(dt, b);
    const Icdm from_mmr = icdm_from_mmrs(mmrs, b);
    for (const auto& [id, v] : from_dt.entries) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      if (t > 1) CHECK(v >= prev_dt.entries.at(id));
    }
    for (const auto& [id, v] : from_mmr.entries) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      if (t > 1) CHECK(v >= prev_mmr.entries.at(id));
    }
    prev_dt = from_dt;
    prev_mmr = from_mmr;
  }
}
