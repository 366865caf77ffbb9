#include <doctest.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "imfuse/io.hpp"
#include "imfuse/rng.hpp"
#include "support.hpp"

using namespace imfuse;
using test_support::read_file;
using test_support::scratch_dir;

namespace {

constexpr double k_nan = std::numeric_limits<double>::quiet_NaN();

double parse_back(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  REQUIRE(res.ec == std::errc{});
  REQUIRE(res.ptr == s.data() + s.size());
  return v;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

}  // namespace

TEST_CASE("doubles serialize to their shortest exact form") {
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(2.0) == "2");
  CHECK(io::format_double(-60.5) == "-60.5");
  CHECK(io::format_double(0.0) == "0");
  CHECK(io::format_double(std::nan("")) == "nan");
  // 0.1 + 0.2 is not 0.3; the text must preserve the difference.
  CHECK(io::format_double(0.1 + 0.2) != "0.3");
  CHECK(parse_back(io::format_double(0.1 + 0.2)) == 0.1 + 0.2);

  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.normal() * 3.0);
    CHECK(parse_back(io::format_double(v)) == v);
  }
}

TEST_CASE("scenario files round-trip every field") {
  const auto dir = scratch_dir("io_scenario");
  Scenario s;
  s.cells.push_back({"S", 0.0, 0.0, 40.0});
  s.cells.push_back({"N1", 1.0 / 3.0, -250.25, 39.5});
  s.serving_id = "S";
  s.ba_list = {"N1"};
  s.traffic = {{0.75, 10.0, -20.0, 45.0}, {0.25, 0.1 + 0.2, 5.0, 90.0}};
  s.roads = {{{0.0, 0.0}, {100.0, 0.5}}, {{-5.0, 2.0}, {-5.0, 40.0}, {12.0, 40.0}}};
  s.pathloss = {31.5, 3.25, 6.0};
  s.noise_floor_dbm = -119.0;
  s.detection_threshold_dbm = -104.5;
  s.seed = 12345;

  const auto path = dir / "scenario.json";
  io::write_scenario(path, s);
  const Scenario r = io::read_scenario(path);

  REQUIRE(r.cells.size() == 2);
  CHECK(r.cells[1].id == "N1");
  CHECK(r.cells[1].x == 1.0 / 3.0);
  CHECK(r.cells[1].y == -250.25);
  CHECK(r.serving_id == "S");
  CHECK(r.ba_list == s.ba_list);
  REQUIRE(r.traffic.size() == 2);
  CHECK(r.traffic[1].weight == 0.25);
  CHECK(r.traffic[1].x == 0.1 + 0.2);
  CHECK(r.roads == s.roads);
  CHECK(r.pathloss.reference_loss_db == 31.5);
  CHECK(r.pathloss.exponent == 3.25);
  CHECK(r.pathloss.shadowing_sigma_db == 6.0);
  CHECK(r.noise_floor_dbm == -119.0);
  CHECK(r.detection_threshold_dbm == -104.5);
  CHECK(r.seed == 12345);

  // Writing validates: a broken scenario never reaches the disk.
  Scenario bad = s;
  bad.traffic[0].weight = 0.9;
  CHECK_THROWS_AS(io::write_scenario(dir / "bad.json", bad), std::invalid_argument);

  write_text(dir / "corrupt.json", "{\"cells\": []");
  CHECK_THROWS(io::read_scenario(dir / "corrupt.json"));
  CHECK_THROWS(io::read_scenario(dir / "missing.json"));
}

TEST_CASE("measurement report streams round-trip") {
  const auto dir = scratch_dir("io_mmr");
  std::vector<MmrReport> reports(3);
  reports[0].serving_id = "S";
  reports[0].serving_rxlev_dbm = -63.7;
  reports[0].neighbors = {{"A", -70.1}, {"B", -88.0}};
  reports[1].serving_id = "S";
  reports[1].serving_rxlev_dbm = 0.1 + 0.2;
  reports[2].serving_id = "S";
  reports[2].serving_rxlev_dbm = -110.0;
  reports[2].neighbors = {{"C", -104.9}};

  const auto path = dir / "mmr.jsonl";
  io::write_mmr_jsonl(path, reports);
  const auto r = io::read_mmr_jsonl(path);
  REQUIRE(r.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(r[i].serving_id == reports[i].serving_id);
    CHECK(r[i].serving_rxlev_dbm == reports[i].serving_rxlev_dbm);
    REQUIRE(r[i].neighbors.size() == reports[i].neighbors.size());
    for (std::size_t j = 0; j < r[i].neighbors.size(); ++j) {
      CHECK(r[i].neighbors[j].cell_id == reports[i].neighbors[j].cell_id);
      CHECK(r[i].neighbors[j].rxlev_dbm == reports[i].neighbors[j].rxlev_dbm);
    }
  }

  write_text(dir / "bad.jsonl", R"({"serving_id": "S", "neighbors": []})"
                                "\n");
  CHECK_THROWS(io::read_mmr_jsonl(dir / "bad.jsonl"));
  write_text(dir / "notjson.jsonl", "hello\n");
  CHECK_THROWS(io::read_mmr_jsonl(dir / "notjson.jsonl"));
}

TEST_CASE("drive test streams round-trip") {
  const auto dir = scratch_dir("io_dt");
  std::vector<DtRecord> records(2);
  records[0].x = 10.0;
  records[0].y = -3.5;
  records[0].readings = {{"S", -60.0}, {"A", -72.3}};
  records[1].x = 1.0 / 3.0;
  records[1].y = 0.0;
  records[1].readings = {{"S", -100.4}};

  const auto path = dir / "dt.jsonl";
  io::write_dt_jsonl(path, records);
  const auto r = io::read_dt_jsonl(path);
  REQUIRE(r.size() == 2);
  CHECK(r[1].x == 1.0 / 3.0);
  CHECK(r[0].readings[1].cell_id == "A");
  CHECK(r[0].readings[1].rxlev_dbm == -72.3);
  CHECK(r[1].readings.size() == 1);
}

TEST_CASE("MMRs vector tables round-trip and keep file order") {
  const auto dir = scratch_dir("io_mmrs_csv");
  MmrsVector m;
  m.serving_id = "S";
  m.neighbor_ids = {"zeta", "alpha", "mid"};  // deliberately not sorted
  m.bin_count = 3;
  m.counts = {1, 0, 4, 0, 0, 0, 7, 8, 9};
  m.total_reports = 29;

  const auto path = dir / "mmrs.csv";
  io::write_mmrs_csv(path, m);
  const MmrsVector r = io::read_mmrs_csv(path);
  CHECK(r.serving_id == m.serving_id);
  CHECK(r.neighbor_ids == m.neighbor_ids);
  CHECK(r.counts == m.counts);
  CHECK(r.total_reports == m.total_reports);
  CHECK(r.bin_count == m.bin_count);

  // The metadata line pins the artifact kind.
  write_text(dir / "wrong_kind.csv",
             "# {\"kind\": \"dt_matrix\", \"serving_id\": \"S\"}\nneighbor_id,q,count\n");
  CHECK_THROWS(io::read_mmrs_csv(dir / "wrong_kind.csv"));
  write_text(dir / "no_meta.csv", "neighbor_id,q,count\nA,1,2\n");
  CHECK_THROWS(io::read_mmrs_csv(dir / "no_meta.csv"));

  const std::string meta =
      "# {\"kind\": \"mmrs_vector\", \"serving_id\": \"S\", \"total_reports\": 5, \"q\": 3}\n";
  write_text(dir / "badq.csv", meta + "neighbor_id,q,count\nA,4,2\n");
  CHECK_THROWS(io::read_mmrs_csv(dir / "badq.csv"));
  write_text(dir / "negative.csv", meta + "neighbor_id,q,count\nA,1,-2\n");
  CHECK_THROWS(io::read_mmrs_csv(dir / "negative.csv"));
  write_text(dir / "split_block.csv", meta + "neighbor_id,q,count\nA,1,2\nB,1,1\nA,2,2\n");
  CHECK_THROWS(io::read_mmrs_csv(dir / "split_block.csv"));

  MmrsVector bad_id = m;
  bad_id.neighbor_ids[0] = "has,comma";
  CHECK_THROWS_AS(io::write_mmrs_csv(dir / "badid.csv", bad_id), std::invalid_argument);
}

TEST_CASE("DT matrix tables restore sparsity and exact values") {
  const auto dir = scratch_dir("io_dtmat");
  DtMatrix dt;
  dt.serving_id = "S";
  dt.neighbor_ids = {"B", "A", "silent"};  // order must survive, silent is all-NaN
  dt.cir_db.resize(3, 4);
  dt.cir_db << 1.5, k_nan, 0.1 + 0.2, -3.25, k_nan, k_nan, 7.0, 2.0, k_nan, k_nan, k_nan, k_nan;

  const auto path = dir / "dt_matrix.csv";
  io::write_dt_matrix_csv(path, dt);
  const DtMatrix r = io::read_dt_matrix_csv(path);
  CHECK(r.serving_id == "S");
  CHECK(r.neighbor_ids == dt.neighbor_ids);
  REQUIRE(r.cir_db.rows() == 3);
  REQUIRE(r.cir_db.cols() == 4);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index m = 0; m < 4; ++m) {
      if (std::isnan(dt.cir_db(i, m)))
        CHECK(std::isnan(r.cir_db(i, m)));
      else
        CHECK(r.cir_db(i, m) == dt.cir_db(i, m));
    }

  const std::string meta =
      "# {\"kind\": \"dt_matrix\", \"serving_id\": \"S\", \"record_count\": 2, "
      "\"neighbor_ids\": [\"A\"]}\n";
  write_text(dir / "unknown.csv", meta + "neighbor_id,record_index,cir_db\nB,0,1.0\n");
  CHECK_THROWS(io::read_dt_matrix_csv(dir / "unknown.csv"));
  write_text(dir / "range.csv", meta + "neighbor_id,record_index,cir_db\nA,2,1.0\n");
  CHECK_THROWS(io::read_dt_matrix_csv(dir / "range.csv"));
}

TEST_CASE("pattern matrix export lists the nonzero rows") {
  const auto dir = scratch_dir("io_sp");
  SpMatrix sp;
  sp.row_count = 6;
  sp.bin_count = 3;
  sp.columns = {{0, 4}, {}, {5}};
  const auto path = dir / "sp.csv";
  io::write_sp_csv(path, sp);
  const std::string text = read_file(path);
  CHECK(text.find("\"kind\":\"sp_matrix\"") != std::string::npos);
  CHECK(text.find("record_index,row\n0,0\n0,4\n2,5\n") != std::string::npos);
}

TEST_CASE("dependency matrix tables round-trip at fixed precision") {
  const auto dir = scratch_dir("io_icdm");
  Icdm icdm;
  icdm.serving_id = "S";
  icdm.entries = {{"A", 0.123456789}, {"B", 0.0}, {"C", 1.0}};
  const auto path = dir / "icdm.csv";
  io::write_icdm_csv(path, icdm);

  const auto rows = io::read_icdm_csv(path);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].serving_id == "S");
  CHECK(rows[0].entries.at("A") == doctest::Approx(0.123457).epsilon(1e-9));
  CHECK(rows[0].entries.at("B") == 0.0);
  CHECK(rows[0].entries.at("C") == 1.0);

  // Several serving cells may share a file; rows group by the first column.
  write_text(dir / "multi.csv",
             "serving_id,neighbor_id,probability\nS1,A,0.5\nS1,B,0.25\nS2,A,0.75\n");
  const auto multi = io::read_icdm_csv(dir / "multi.csv");
  REQUIRE(multi.size() == 2);
  CHECK(multi[0].serving_id == "S1");
  CHECK(multi[0].entries.size() == 2);
  CHECK(multi[1].entries.at("A") == 0.75);

  write_text(dir / "range.csv", "serving_id,neighbor_id,probability\nS,A,1.5\n");
  CHECK_THROWS(io::read_icdm_csv(dir / "range.csv"));
  write_text(dir / "dup.csv", "serving_id,neighbor_id,probability\nS,A,0.5\nS,A,0.5\n");
  CHECK_THROWS(io::read_icdm_csv(dir / "dup.csv"));
  write_text(dir / "empty.csv", "serving_id,neighbor_id,probability\n");
  CHECK_THROWS(io::read_icdm_csv(dir / "empty.csv"));
}

TEST_CASE("binning files round-trip") {
  const auto dir = scratch_dir("io_binning");
  const BinningConfig b = BinningConfig::gsm_default();
  const auto path = dir / "binning.json";
  io::write_binning_json(path, b);
  const BinningConfig r = io::read_binning_json(path);
  CHECK(r.edges == b.edges);
  CHECK(r.q_threshold == b.q_threshold);

  BinningConfig bad;
  bad.edges = {3.0, 1.0};
  CHECK_THROWS_AS(io::write_binning_json(dir / "bad.json", bad), std::invalid_argument);
  write_text(dir / "invalid.json", "{\"edges\": [1.0, 2.0], \"q_threshold\": 9}");
  CHECK_THROWS(io::read_binning_json(dir / "invalid.json"));
}

TEST_CASE("cluster model files round-trip exactly") {
  const auto dir = scratch_dir("io_cluster");
  io::StoredClusterModel stored;
  stored.model.k = 2;
  stored.model.membership = {1, 2, 2, 1};
  stored.model.sizes = {2, 2};
  stored.model.inertia = 1.0 / 3.0;
  stored.model.centers.resize(4, 2);
  stored.model.centers << 0.5, 0.0, 0.25, 1.0 / 3.0, 0.0, 0.1 + 0.2, 1.0, 0.75;
  stored.neighbor_ids = {"A", "B"};
  stored.common_count = 1;
  stored.bin_count = 2;

  const auto path = dir / "cluster.json";
  io::write_cluster_model_json(path, stored);
  const auto r = io::read_cluster_model_json(path);
  CHECK(r.model.k == 2);
  CHECK(r.model.membership == stored.model.membership);
  CHECK(r.model.sizes == stored.model.sizes);
  CHECK(r.model.inertia == stored.model.inertia);
  CHECK(r.neighbor_ids == stored.neighbor_ids);
  CHECK(r.common_count == 1);
  CHECK(r.bin_count == 2);
  REQUIRE(r.model.centers.rows() == 4);
  REQUIRE(r.model.centers.cols() == 2);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) CHECK(r.model.centers(i, j) == stored.model.centers(i, j));

  write_text(dir / "ragged.json", R"({"k": 2, "q": 2, "common_count": 1,
    "neighbor_ids": ["A"], "membership": [1], "sizes": [1, 0], "inertia": 0.0,
    "centers": [[0.1, 0.2], [0.3]]})");
  CHECK_THROWS(io::read_cluster_model_json(dir / "ragged.json"));
  write_text(dir / "badk.json", R"({"k": 3, "q": 2, "common_count": 1,
    "neighbor_ids": ["A"], "membership": [1], "sizes": [1], "inertia": 0.0,
    "centers": [[0.1], [0.2]]})");
  CHECK_THROWS(io::read_cluster_model_json(dir / "badk.json"));
}

TEST_CASE("traffic estimate files round-trip exactly") {
  const auto dir = scratch_dir("io_traffic");
  TrafficEstimate t;
  t.beta = Eigen::VectorXd(3);
  t.beta << 1.0 / 3.0, -2.5, 40.125;
  t.entered = {2, 1};
  t.r_squared = 0.875;
  t.model_p_value = 1e-9;

  const auto path = dir / "traffic.json";
  io::write_traffic_json(path, t, 0.05, 0.1);
  const TrafficEstimate r = io::read_traffic_json(path);
  REQUIRE(r.beta.size() == 3);
  CHECK(r.beta(0) == t.beta(0));
  CHECK(r.beta(1) == -2.5);
  CHECK(r.beta(2) == 40.125);
  CHECK(r.entered == t.entered);
  CHECK(r.r_squared == 0.875);
  CHECK(r.model_p_value == 1e-9);

  const std::string text = read_file(path);
  CHECK(text.find("\"alpha_enter\"") != std::string::npos);
}

TEST_CASE("fusion reports list omissions and reshape targets") {
  const auto dir = scratch_dir("io_fusion_report");
  io::write_fusion_report_json(dir / "mmrs.json", {"X1", "X2"}, std::nullopt);
  const std::string mmrs_text = read_file(dir / "mmrs.json");
  CHECK(mmrs_text.find("\"X1\"") != std::string::npos);
  CHECK(mmrs_text.find("per_set_targets") == std::string::npos);

  SetTarget t;
  t.cluster = 1;
  t.size = 10;
  t.replicate = 3;
  t.extra = 4;
  io::write_fusion_report_json(dir / "dt.json", {}, std::vector<SetTarget>{t});
  const std::string dt_text = read_file(dir / "dt.json");
  CHECK(dt_text.find("\"replicate\": 3") != std::string::npos);
  CHECK(dt_text.find("\"target\": 34") != std::string::npos);
}

TEST_CASE("multiplicity tables round-trip") {
  const auto dir = scratch_dir("io_mult");
  ReshapedDt r;
  r.membership = {1, 2, 1};
  r.multiplicity = {4, 0, 2};
  const auto path = dir / "mult.csv";
  io::write_multiplicity_csv(path, r);
  const auto stored = io::read_multiplicity_csv(path);
  CHECK(stored.membership == r.membership);
  CHECK(stored.multiplicity == r.multiplicity);
}

TEST_CASE("label tables list one road per record") {
  const auto dir = scratch_dir("io_labels");
  const auto path = dir / "labels.csv";
  io::write_labels_csv(path, {0, 0, 1, 2});
  const std::string text = read_file(path);
  CHECK(text.find("record_index,road\n0,0\n1,0\n2,1\n3,2\n") != std::string::npos);
}

TEST_CASE("key-value configuration parsing") {
  const auto cfg = io::KvConfig::parse_string(
      "# a comment\n"
      "k = 8\n"
      "tol = 1e-6   # trailing comment\n"
      "scenario = \"fixtures/demo.json\"\n"
      "output_dir = out/run1\n"
      "dump_sp = true\n"
      "quiet = false\n"
      "binning_edges = [-6, -3, 0.5]\n"
      "\n");
  CHECK(cfg.has("k"));
  CHECK(!cfg.has("missing"));
  CHECK(cfg.get_int("k") == 8);
  CHECK(cfg.get_double("tol") == 1e-6);
  CHECK(cfg.get_string("scenario") == "fixtures/demo.json");
  CHECK(cfg.get_string("output_dir") == "out/run1");
  CHECK(cfg.get_bool("dump_sp"));
  CHECK(!cfg.get_bool("quiet"));
  CHECK(cfg.get_double_list("binning_edges") == std::vector<double>{-6.0, -3.0, 0.5});
  CHECK(cfg.keys() == std::vector<std::string>{"binning_edges", "dump_sp", "k", "output_dir",
                                               "quiet", "scenario", "tol"});

  CHECK_THROWS(io::KvConfig::parse_string("novalue\n"));
  CHECK_THROWS(io::KvConfig::parse_string("k = 1\nk = 2\n"));
  CHECK_THROWS(io::KvConfig::parse_string("k =\n"));
  CHECK_THROWS(cfg.get_int("tol"));
  CHECK_THROWS(cfg.get_double("scenario"));
  CHECK_THROWS(cfg.get_bool("k"));
  CHECK_THROWS(cfg.get_double_list("k"));
  CHECK_THROWS(cfg.get_string("missing"));

  const auto dir = scratch_dir("io_kv");
  write_text(dir / "cfg.txt", "seed_simulation = 42\n");
  CHECK(io::KvConfig::parse_file(dir / "cfg.txt").get_int("seed_simulation") == 42);
  CHECK_THROWS(io::KvConfig::parse_file(dir / "nope.txt"));
}
