#include "imfuse/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace imfuse::io {
namespace {

using nlohmann::json;

std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return in;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return out;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

[[noreturn]] void fail_at(const std::filesystem::path& path, std::size_t line,
                          const std::string& msg) {
  throw std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + msg);
}

json parse_json(const std::filesystem::path& path, const std::string& text, std::size_t line) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail_at(path, line, "invalid JSON");
  return j;
}

const json& require_field(const json& j, const char* key, const std::filesystem::path& path,
                          std::size_t line) {
  const auto it = j.find(key);
  if (it == j.end()) fail_at(path, line, std::string("missing field '") + key + "'");
  return *it;
}

double require_number(const json& j, const char* key, const std::filesystem::path& path,
                      std::size_t line) {
  const json& v = require_field(j, key, path, line);
  if (!v.is_number()) fail_at(path, line, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

std::string require_string(const json& j, const char* key, const std::filesystem::path& path,
                           std::size_t line) {
  const json& v = require_field(j, key, path, line);
  if (!v.is_string()) fail_at(path, line, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

void check_csv_id(const std::string& id) {
  if (id.empty()) throw std::invalid_argument("empty cell id cannot be serialized");
  for (const char c : id)
    if (c == ',' || c == '"' || c == '\n' || c == '\r' || c == '#')
      throw std::invalid_argument("cell id '" + id + "' contains characters not allowed in CSV");
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_double_token(const std::string& tok, const std::filesystem::path& path,
                          std::size_t line) {
  if (tok == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    fail_at(path, line, "expected a number, got '" + tok + "'");
  return v;
}

long long parse_int_token(const std::string& tok, const std::filesystem::path& path,
                          std::size_t line) {
  long long v = 0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    fail_at(path, line, "expected an integer, got '" + tok + "'");
  return v;
}

// Reads the `# {...}` metadata comment expected on the first line.
json read_csv_meta(std::ifstream& in, const std::filesystem::path& path,
                   const std::string& expected_kind) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw std::runtime_error(path.string() + ": missing metadata comment line");
  const json meta = parse_json(path, line.substr(2), 1);
  if (require_string(meta, "kind", path, 1) != expected_kind)
    throw std::runtime_error(path.string() + ": expected kind '" + expected_kind + "', got '" +
                             meta["kind"].get<std::string>() + "'");
  return meta;
}

json reading_to_json(const Reading& r) { return json{{"id", r.cell_id}, {"rxlev", r.rxlev_dbm}}; }

Reading reading_from_json(const json& j, const std::filesystem::path& path, std::size_t line) {
  Reading r;
  r.cell_id = require_string(j, "id", path, line);
  r.rxlev_dbm = require_number(j, "rxlev", path, line);
  return r;
}

json load_json_file(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_json(path, buffer.str(), 1);
}

void store_json_file(const std::filesystem::path& path, const json& j) {
  auto out = open_for_write(path);
  out << j.dump(2) << '\n';
  finish_write(out, path);
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Scenario read_scenario(const std::filesystem::path& path) {
  const json j = load_json_file(path);
  Scenario s;
  for (const auto& c : require_field(j, "cells", path, 1)) {
    CellSite cell;
    cell.id = require_string(c, "id", path, 1);
    cell.x = require_number(c, "x", path, 1);
    cell.y = require_number(c, "y", path, 1);
    cell.tx_power_dbm = require_number(c, "tx_power_dbm", path, 1);
    s.cells.push_back(std::move(cell));
  }
  s.serving_id = require_string(j, "serving_id", path, 1);
  for (const auto& id : require_field(j, "ba_list", path, 1)) s.ba_list.push_back(id.get<std::string>());
  for (const auto& h : require_field(j, "traffic", path, 1)) {
    Hotspot hot;
    hot.weight = require_number(h, "weight", path, 1);
    hot.x = require_number(h, "x", path, 1);
    hot.y = require_number(h, "y", path, 1);
    hot.sigma_m = require_number(h, "sigma_m", path, 1);
    s.traffic.push_back(hot);
  }
  if (j.contains("roads"))
    for (const auto& road : j["roads"]) {
      Polyline line;
      for (const auto& pt : road) {
        if (!pt.is_array() || pt.size() != 2)
          throw std::runtime_error(path.string() + ": road vertices must be [x, y] pairs");
        line.push_back({pt[0].get<double>(), pt[1].get<double>()});
      }
      s.roads.push_back(std::move(line));
    }
  if (j.contains("pathloss")) {
    const json& p = j["pathloss"];
    s.pathloss.reference_loss_db = require_number(p, "reference_loss_db", path, 1);
    s.pathloss.exponent = require_number(p, "exponent", path, 1);
    if (p.contains("shadowing_sigma_db"))
      s.pathloss.shadowing_sigma_db = p["shadowing_sigma_db"].get<double>();
  }
  if (j.contains("noise_floor_dbm")) s.noise_floor_dbm = j["noise_floor_dbm"].get<double>();
  if (j.contains("detection_threshold_dbm"))
    s.detection_threshold_dbm = j["detection_threshold_dbm"].get<double>();
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  s.validate();
  return s;
}

void write_scenario(const std::filesystem::path& path, const Scenario& s) {
  s.validate();
  json cells = json::array();
  for (const auto& c : s.cells)
    cells.push_back({{"id", c.id}, {"x", c.x}, {"y", c.y}, {"tx_power_dbm", c.tx_power_dbm}});
  json traffic = json::array();
  for (const auto& h : s.traffic)
    traffic.push_back({{"weight", h.weight}, {"x", h.x}, {"y", h.y}, {"sigma_m", h.sigma_m}});
  json roads = json::array();
  for (const auto& road : s.roads) {
    json line = json::array();
    for (const auto& pt : road) line.push_back({pt[0], pt[1]});
    roads.push_back(std::move(line));
  }
  const json j{{"cells", cells},
               {"serving_id", s.serving_id},
               {"ba_list", s.ba_list},
               {"traffic", traffic},
               {"roads", roads},
               {"pathloss",
                {{"reference_loss_db", s.pathloss.reference_loss_db},
                 {"exponent", s.pathloss.exponent},
                 {"shadowing_sigma_db", s.pathloss.shadowing_sigma_db}}},
               {"noise_floor_dbm", s.noise_floor_dbm},
               {"detection_threshold_dbm", s.detection_threshold_dbm},
               {"seed", s.seed}};
  store_json_file(path, j);
}

std::vector<MmrReport> read_mmr_jsonl(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  std::vector<MmrReport> reports;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = parse_json(path, line, line_no);
    MmrReport rep;
    rep.serving_id = require_string(j, "serving_id", path, line_no);
    rep.serving_rxlev_dbm = require_number(j, "serving_rxlev", path, line_no);
    for (const auto& n : require_field(j, "neighbors", path, line_no))
      rep.neighbors.push_back(reading_from_json(n, path, line_no));
    reports.push_back(std::move(rep));
  }
  return reports;
}

void write_mmr_jsonl(const std::filesystem::path& path, const std::vector<MmrReport>& reports) {
  auto out = open_for_write(path);
  for (const auto& rep : reports) {
    json neighbors = json::array();
    for (const auto& n : rep.neighbors) neighbors.push_back(reading_to_json(n));
    const json j{{"serving_id", rep.serving_id},
                 {"serving_rxlev", rep.serving_rxlev_dbm},
                 {"neighbors", neighbors}};
    out << j.dump() << '\n';
  }
  finish_write(out, path);
}

std::vector<DtRecord> read_dt_jsonl(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  std::vector<DtRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json j = parse_json(path, line, line_no);
    DtRecord rec;
    rec.x = require_number(j, "x", path, line_no);
    rec.y = require_number(j, "y", path, line_no);
    for (const auto& r : require_field(j, "readings", path, line_no))
      rec.readings.push_back(reading_from_json(r, path, line_no));
    records.push_back(std::move(rec));
  }
  return records;
}

void write_dt_jsonl(const std::filesystem::path& path, const std::vector<DtRecord>& records) {
  auto out = open_for_write(path);
  for (const auto& rec : records) {
    json readings = json::array();
    for (const auto& r : rec.readings) readings.push_back(reading_to_json(r));
    const json j{{"x", rec.x}, {"y", rec.y}, {"readings", readings}};
    out << j.dump() << '\n';
  }
  finish_write(out, path);
}

MmrsVector read_mmrs_csv(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  const json meta = read_csv_meta(in, path, "mmrs_vector");
  MmrsVector out;
  out.serving_id = require_string(meta, "serving_id", path, 1);
  out.total_reports = meta.at("total_reports").get<long long>();
  out.bin_count = meta.at("q").get<int>();
  if (out.bin_count < 2) throw std::runtime_error(path.string() + ": invalid interval count");

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != "neighbor_id,q,count")
    throw std::runtime_error(path.string() + ": missing 'neighbor_id,q,count' header");
  ++line_no;

  std::string current_id;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3) fail_at(path, line_no, "expected 3 fields");
    const std::string& id = fields[0];
    const long long q = parse_int_token(fields[1], path, line_no);
    const long long count = parse_int_token(fields[2], path, line_no);
    if (q < 1 || q > out.bin_count) fail_at(path, line_no, "interval index out of range");
    if (count < 0) fail_at(path, line_no, "negative count");
    if (id != current_id) {
      for (const auto& seen : out.neighbor_ids)
        if (seen == id) fail_at(path, line_no, "neighbor '" + id + "' appears twice");
      out.neighbor_ids.push_back(id);
      out.counts.resize(out.counts.size() + static_cast<std::size_t>(out.bin_count), 0);
      current_id = id;
    }
    out.counts[(out.neighbor_ids.size() - 1) * static_cast<std::size_t>(out.bin_count) +
               static_cast<std::size_t>(q - 1)] = count;
  }
  return out;
}

void write_mmrs_csv(const std::filesystem::path& path, const MmrsVector& mmrs) {
  for (const auto& id : mmrs.neighbor_ids) check_csv_id(id);
  auto out = open_for_write(path);
  const json meta{{"schema", 1},
                  {"kind", "mmrs_vector"},
                  {"serving_id", mmrs.serving_id},
                  {"total_reports", mmrs.total_reports},
                  {"q", mmrs.bin_count}};
  out << "# " << meta.dump() << '\n';
  out << "neighbor_id,q,count\n";
  for (std::size_t j = 0; j < mmrs.neighbor_count(); ++j)
    for (int q = 1; q <= mmrs.bin_count; ++q)
      out << mmrs.neighbor_ids[j] << ',' << q << ',' << mmrs.at(j, q) << '\n';
  finish_write(out, path);
}

DtMatrix read_dt_matrix_csv(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  const json meta = read_csv_meta(in, path, "dt_matrix");
  DtMatrix out;
  out.serving_id = require_string(meta, "serving_id", path, 1);
  const long long n_records = meta.at("record_count").get<long long>();
  if (n_records < 1) throw std::runtime_error(path.string() + ": record_count must be positive");
  const json& ids = meta.at("neighbor_ids");
  for (const auto& id : ids) out.neighbor_ids.push_back(id.get<std::string>());
  out.cir_db = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(out.neighbor_ids.size()),
                                         static_cast<Eigen::Index>(n_records),
                                         std::numeric_limits<double>::quiet_NaN());

  std::map<std::string, Eigen::Index> row;
  for (std::size_t i = 0; i < out.neighbor_ids.size(); ++i)
    row.emplace(out.neighbor_ids[i], static_cast<Eigen::Index>(i));

  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != "neighbor_id,record_index,cir_db")
    throw std::runtime_error(path.string() + ": missing 'neighbor_id,record_index,cir_db' header");
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3) fail_at(path, line_no, "expected 3 fields");
    const auto it = row.find(fields[0]);
    if (it == row.end()) fail_at(path, line_no, "unknown neighbor '" + fields[0] + "'");
    const long long m = parse_int_token(fields[1], path, line_no);
    if (m < 0 || m >= n_records) fail_at(path, line_no, "record index out of range");
    out.cir_db(it->second, static_cast<Eigen::Index>(m)) =
        parse_double_token(fields[2], path, line_no);
  }
  return out;
}

void write_dt_matrix_csv(const std::filesystem::path& path, const DtMatrix& dt) {
  for (const auto& id : dt.neighbor_ids) check_csv_id(id);
  auto out = open_for_write(path);
  const json meta{{"schema", 1},
                  {"kind", "dt_matrix"},
                  {"serving_id", dt.serving_id},
                  {"record_count", dt.record_count()},
                  {"neighbor_ids", dt.neighbor_ids}};
  out << "# " << meta.dump() << '\n';
  out << "neighbor_id,record_index,cir_db\n";
  for (std::size_t i = 0; i < dt.neighbor_count(); ++i)
    for (std::size_t m = 0; m < dt.record_count(); ++m)
      if (dt.detected(i, m))
        out << dt.neighbor_ids[i] << ',' << m << ','
            << format_double(dt.cir_db(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)))
            << '\n';
  finish_write(out, path);
}

void write_sp_csv(const std::filesystem::path& path, const SpMatrix& sp) {
  auto out = open_for_write(path);
  const json meta{{"schema", 1},
                  {"kind", "sp_matrix"},
                  {"row_count", sp.row_count},
                  {"q", sp.bin_count},
                  {"record_count", sp.record_count()}};
  out << "# " << meta.dump() << '\n';
  out << "record_index,row\n";
  for (std::size_t m = 0; m < sp.record_count(); ++m)
    for (const auto r : sp.columns[m]) out << m << ',' << r << '\n';
  finish_write(out, path);
}

std::vector<Icdm> read_icdm_csv(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": empty file");
  if (line.rfind("# ", 0) == 0) {
    ++line_no;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": missing header");
  }
  if (line != "serving_id,neighbor_id,probability")
    throw std::runtime_error(path.string() +
                             ": missing 'serving_id,neighbor_id,probability' header");

  std::vector<Icdm> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3) fail_at(path, line_no, "expected 3 fields");
    const double p = parse_double_token(fields[2], path, line_no);
    if (!(p >= 0.0 && p <= 1.0)) fail_at(path, line_no, "probability out of [0, 1]");
    if (out.empty() || out.back().serving_id != fields[0]) {
      out.push_back(Icdm{fields[0], {}});
    }
    if (!out.back().entries.emplace(fields[1], p).second)
      fail_at(path, line_no, "duplicate neighbor '" + fields[1] + "'");
  }
  if (out.empty()) throw std::runtime_error(path.string() + ": no entries");
  return out;
}

void write_icdm_csv(const std::filesystem::path& path, const Icdm& icdm) {
  check_csv_id(icdm.serving_id);
  for (const auto& [id, p] : icdm.entries) check_csv_id(id);
  auto out = open_for_write(path);
  const json meta{{"schema", 1}, {"kind", "icdm"}, {"serving_id", icdm.serving_id}};
  out << "# " << meta.dump() << '\n';
  out << "serving_id,neighbor_id,probability\n";
  char buf[32];
  for (const auto& [id, p] : icdm.entries) {
    std::snprintf(buf, sizeof buf, "%.6f", p);
    out << icdm.serving_id << ',' << id << ',' << buf << '\n';
  }
  finish_write(out, path);
}

void write_binning_json(const std::filesystem::path& path, const BinningConfig& binning) {
  binning.validate();
  store_json_file(path, json{{"schema", 1},
                             {"kind", "binning"},
                             {"edges", binning.edges},
                             {"q_threshold", binning.q_threshold}});
}

BinningConfig read_binning_json(const std::filesystem::path& path) {
  const json j = load_json_file(path);
  BinningConfig b;
  b.edges = j.at("edges").get<std::vector<double>>();
  b.q_threshold = j.at("q_threshold").get<int>();
  b.validate();
  return b;
}

void write_cluster_model_json(const std::filesystem::path& path, const StoredClusterModel& stored) {
  json centers = json::array();
  for (Eigen::Index c = 0; c < stored.model.centers.cols(); ++c) {
    json col = json::array();
    for (Eigen::Index r = 0; r < stored.model.centers.rows(); ++r)
      col.push_back(stored.model.centers(r, c));
    centers.push_back(std::move(col));
  }
  store_json_file(path, json{{"schema", 1},
                             {"kind", "cluster_model"},
                             {"k", stored.model.k},
                             {"q", stored.bin_count},
                             {"common_count", stored.common_count},
                             {"neighbor_ids", stored.neighbor_ids},
                             {"membership", stored.model.membership},
                             {"sizes", stored.model.sizes},
                             {"inertia", stored.model.inertia},
                             {"centers", centers}});
}

StoredClusterModel read_cluster_model_json(const std::filesystem::path& path) {
  const json j = load_json_file(path);
  StoredClusterModel stored;
  stored.model.k = j.at("k").get<int>();
  stored.bin_count = j.at("q").get<int>();
  stored.common_count = j.at("common_count").get<std::size_t>();
  stored.neighbor_ids = j.at("neighbor_ids").get<std::vector<std::string>>();
  stored.model.membership = j.at("membership").get<std::vector<int>>();
  stored.model.sizes = j.at("sizes").get<std::vector<long long>>();
  stored.model.inertia = j.at("inertia").get<double>();
  const json& centers = j.at("centers");
  if (centers.empty() || static_cast<int>(centers.size()) != stored.model.k)
    throw std::runtime_error(path.string() + ": centers do not match k");
  const std::size_t rows = centers[0].size();
  stored.model.centers.resize(static_cast<Eigen::Index>(rows),
                              static_cast<Eigen::Index>(stored.model.k));
  for (int c = 0; c < stored.model.k; ++c) {
    if (centers[static_cast<std::size_t>(c)].size() != rows)
      throw std::runtime_error(path.string() + ": ragged centers");
    for (std::size_t r = 0; r < rows; ++r)
      stored.model.centers(static_cast<Eigen::Index>(r), c) =
          centers[static_cast<std::size_t>(c)][r].get<double>();
  }
  return stored;
}

void write_traffic_json(const std::filesystem::path& path, const TrafficEstimate& traffic,
                        double alpha_enter, double alpha_remove) {
  json beta = json::array();
  for (Eigen::Index i = 0; i < traffic.beta.size(); ++i) beta.push_back(traffic.beta(i));
  store_json_file(path, json{{"schema", 1},
                             {"kind", "traffic_estimate"},
                             {"beta", beta},
                             {"entered", traffic.entered},
                             {"r_squared", traffic.r_squared},
                             {"model_p_value", traffic.model_p_value},
                             {"alpha_enter", alpha_enter},
                             {"alpha_remove", alpha_remove}});
}

TrafficEstimate read_traffic_json(const std::filesystem::path& path) {
  const json j = load_json_file(path);
  TrafficEstimate t;
  const auto beta = j.at("beta").get<std::vector<double>>();
  t.beta.resize(static_cast<Eigen::Index>(beta.size()));
  for (std::size_t i = 0; i < beta.size(); ++i) t.beta(static_cast<Eigen::Index>(i)) = beta[i];
  t.entered = j.at("entered").get<std::vector<int>>();
  t.r_squared = j.at("r_squared").get<double>();
  t.model_p_value = j.at("model_p_value").get<double>();
  return t;
}

void write_fusion_report_json(const std::filesystem::path& path,
                              const std::vector<std::string>& omitted_ids,
                              const std::optional<std::vector<SetTarget>>& per_set_targets) {
  json j{{"schema", 1}, {"kind", "fusion_report"}, {"omitted_ids", omitted_ids}};
  if (per_set_targets) {
    json targets = json::array();
    for (const auto& t : *per_set_targets)
      targets.push_back({{"cluster", t.cluster},
                         {"size", t.size},
                         {"replicate", t.replicate},
                         {"extra", t.extra},
                         {"target", t.target()}});
    j["per_set_targets"] = std::move(targets);
  }
  store_json_file(path, j);
}

void write_multiplicity_csv(const std::filesystem::path& path, const ReshapedDt& reshaped) {
  auto out = open_for_write(path);
  const json meta{{"schema", 1},
                  {"kind", "reshape_multiplicity"},
                  {"record_count", reshaped.multiplicity.size()}};
  out << "# " << meta.dump() << '\n';
  out << "record_index,cluster,multiplicity\n";
  for (std::size_t m = 0; m < reshaped.multiplicity.size(); ++m)
    out << m << ',' << reshaped.membership[m] << ',' << reshaped.multiplicity[m] << '\n';
  finish_write(out, path);
}

StoredMultiplicity read_multiplicity_csv(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  const json meta = read_csv_meta(in, path, "reshape_multiplicity");
  const std::size_t n = meta.at("record_count").get<std::size_t>();
  StoredMultiplicity out;
  out.membership.assign(n, 0);
  out.multiplicity.assign(n, 0);
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != "record_index,cluster,multiplicity")
    throw std::runtime_error(path.string() + ": missing multiplicity header");
  ++line_no;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3) fail_at(path, line_no, "expected 3 fields");
    const long long m = parse_int_token(fields[0], path, line_no);
    if (m < 0 || static_cast<std::size_t>(m) >= n) fail_at(path, line_no, "index out of range");
    out.membership[static_cast<std::size_t>(m)] =
        static_cast<int>(parse_int_token(fields[1], path, line_no));
    out.multiplicity[static_cast<std::size_t>(m)] = parse_int_token(fields[2], path, line_no);
  }
  return out;
}

void write_labels_csv(const std::filesystem::path& path, const std::vector<int>& region_labels) {
  auto out = open_for_write(path);
  const json meta{{"schema", 1}, {"kind", "dt_labels"}, {"record_count", region_labels.size()}};
  out << "# " << meta.dump() << '\n';
  out << "record_index,road\n";
  for (std::size_t m = 0; m < region_labels.size(); ++m) out << m << ',' << region_labels[m] << '\n';
  finish_write(out, path);
}

KvConfig KvConfig::parse_file(const std::filesystem::path& path) {
  auto in = open_for_read(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_string(buffer.str());
  } catch (const std::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

KvConfig KvConfig::parse_string(const std::string& text) {
  KvConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::runtime_error("line " + std::to_string(line_no) + ": expected 'key = value'");
    if (!cfg.values_.emplace(key, value).second)
      throw std::runtime_error("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
  }
  return cfg;
}

std::vector<std::string> KvConfig::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

std::string KvConfig::get_string(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw std::runtime_error("config: missing key '" + key + "'");
  const std::string& v = it->second;
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

double KvConfig::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  try {
    std::size_t idx = 0;
    const double d = std::stod(v, &idx);
    if (idx != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw std::runtime_error("config: key '" + key + "' is not a number ('" + v + "')");
  }
}

long long KvConfig::get_int(const std::string& key) const {
  const std::string v = get_string(key);
  long long out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw std::runtime_error("config: key '" + key + "' is not an integer ('" + v + "')");
  return out;
}

bool KvConfig::get_bool(const std::string& key) const {
  const std::string v = get_string(key);
  if (v == "true") return true;
  if (v == "false") return false;
  throw std::runtime_error("config: key '" + key + "' is not true/false ('" + v + "')");
}

std::vector<double> KvConfig::get_double_list(const std::string& key) const {
  std::string v = get_string(key);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']')
    throw std::runtime_error("config: key '" + key + "' is not a [a, b, ...] list");
  v = v.substr(1, v.size() - 2);
  std::vector<double> out;
  std::istringstream in(v);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    const auto b = tok.find_first_not_of(" \t");
    const auto e = tok.find_last_not_of(" \t");
    if (b == std::string::npos)
      throw std::runtime_error("config: empty element in list '" + key + "'");
    tok = tok.substr(b, e - b + 1);
    try {
      std::size_t idx = 0;
      out.push_back(std::stod(tok, &idx));
      if (idx != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw std::runtime_error("config: list '" + key + "' holds a non-number ('" + tok + "')");
    }
  }
  if (out.empty()) throw std::runtime_error("config: list '" + key + "' is empty");
  return out;
}

}  // namespace imfuse::io
