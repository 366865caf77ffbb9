#include <doctest.h>

#include <limits>

#include "imfuse/cirsp.hpp"

using namespace imfuse;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

DtMatrix matrix_from(const std::vector<std::string>& ids, const std::vector<std::vector<double>>& rows) {
  DtMatrix dt;
  dt.serving_id = "S";
  dt.neighbor_ids = ids;
  dt.cir_db.resize(static_cast<Eigen::Index>(rows.size()),
                   static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t m = 0; m < rows[i].size(); ++m)
      dt.cir_db(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)) = rows[i][m];
  return dt;
}

}  // namespace

TEST_CASE("pattern keeps the six strongest interferers") {
  const auto b = BinningConfig::gsm_default();
  // Eight detected neighbors; the two weakest interferers (largest CIR) drop.
  const DtMatrix dt = matrix_from({"n0", "n1", "n2", "n3", "n4", "n5", "n6", "n7"},
                                  {{5.0}, {-2.0}, {20.0}, {0.5}, {11.0}, {3.0}, {-7.0}, {9.0}});
  const Cirsp p = derive_cirsp(dt, 0, b);
  CHECK(p.bins == std::vector<int>{5, 3, 0, 4, 0, 5, 1, 7});
}

TEST_CASE("pattern ties break toward the earlier neighbor") {
  const auto b = BinningConfig::gsm_default();
  const DtMatrix dt = matrix_from({"a", "b", "c", "d", "e", "f", "g"},
                                  {{1.0}, {1.0}, {1.0}, {1.0}, {1.0}, {1.0}, {1.0}});
  const Cirsp p = derive_cirsp(dt, 0, b);
  CHECK(p.bins == std::vector<int>{4, 4, 4, 4, 4, 4, 0});
}

TEST_CASE("pattern with few detections uses them all") {
  const auto b = BinningConfig::gsm_default();
  const DtMatrix dt = matrix_from({"a", "b", "c"}, {{kNaN, 2.0}, {7.5, kNaN}, {kNaN, -9.0}});
  CHECK(derive_cirsp(dt, 0, b).bins == std::vector<int>{0, 6, 0});
  CHECK(derive_cirsp(dt, 1, b).bins == std::vector<int>{4, 0, 1});
  CHECK_THROWS_AS(derive_cirsp(dt, 2, b), std::out_of_range);
}

TEST_CASE("one-hot layout puts interval q of neighbor i at row i*Q + q - 1") {
  const auto b = BinningConfig::gsm_default();
  Cirsp p;
  p.bins = {2, 1, 10};
  const Eigen::VectorXd v = to_sp_vector(p, b);
  REQUIRE(v.size() == 30);
  CHECK(v.sum() == doctest::Approx(3.0));
  CHECK(v(1) == 1.0);
  CHECK(v(10) == 1.0);
  CHECK(v(29) == 1.0);

  p.bins = {0, 0, 0};
  CHECK(to_sp_vector(p, b).sum() == 0.0);
  p.bins = {11, 0, 0};
  CHECK_THROWS_AS(to_sp_vector(p, b), std::invalid_argument);
}

TEST_CASE("SP matrix columns match the per-record patterns") {
  const auto b = BinningConfig::gsm_default();
  const DtMatrix dt = matrix_from({"a", "b", "c", "d", "e", "f", "g", "h"},
                                  {{5.0, kNaN},
                                   {-2.0, 1.0},
                                   {20.0, kNaN},
                                   {0.5, kNaN},
                                   {11.0, 30.0},
                                   {3.0, kNaN},
                                   {-7.0, kNaN},
                                   {9.0, kNaN}});
  const SpMatrix sp = build_sp_matrix(dt, b);
  CHECK(sp.record_count() == 2);
  CHECK(sp.row_count == 80);
  CHECK(sp.bin_count == 10);

  for (std::size_t m = 0; m < sp.record_count(); ++m) {
    const Eigen::VectorXd expected = to_sp_vector(derive_cirsp(dt, m, b), b);
    const Eigen::VectorXd got = sp.dense_column(m);
    CHECK((expected - got).lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(sp.columns[m].size() <= 6);  // L0 bound
    CHECK(std::is_sorted(sp.columns[m].begin(), sp.columns[m].end()));
  }
  CHECK(sp.columns[1].size() == 2);
}
