#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "imfuse/clustering.hpp"
#include "imfuse/fusion.hpp"
#include "imfuse/icdm.hpp"
#include "imfuse/measurements.hpp"
#include "imfuse/regression.hpp"
#include "imfuse/scenario.hpp"
#include "imfuse/source_data.hpp"

namespace imfuse::io {

// Measurement streams are JSON lines; derived artifacts are CSV with one
// leading `# {...}` metadata comment, or plain JSON. Floating point values
// round-trip exactly (shortest representation), so artifacts can be re-read
// and reproduce downstream results bit for bit.

Scenario read_scenario(const std::filesystem::path& path);
void write_scenario(const std::filesystem::path& path, const Scenario& scenario);

std::vector<MmrReport> read_mmr_jsonl(const std::filesystem::path& path);
void write_mmr_jsonl(const std::filesystem::path& path, const std::vector<MmrReport>& reports);

std::vector<DtRecord> read_dt_jsonl(const std::filesystem::path& path);
void write_dt_jsonl(const std::filesystem::path& path, const std::vector<DtRecord>& records);

MmrsVector read_mmrs_csv(const std::filesystem::path& path);
void write_mmrs_csv(const std::filesystem::path& path, const MmrsVector& mmrs);

DtMatrix read_dt_matrix_csv(const std::filesystem::path& path);
void write_dt_matrix_csv(const std::filesystem::path& path, const DtMatrix& dt);

void write_sp_csv(const std::filesystem::path& path, const SpMatrix& sp);

std::vector<Icdm> read_icdm_csv(const std::filesystem::path& path);
void write_icdm_csv(const std::filesystem::path& path, const Icdm& icdm);

void write_binning_json(const std::filesystem::path& path, const BinningConfig& binning);
BinningConfig read_binning_json(const std::filesystem::path& path);

struct StoredClusterModel {
  ClusterModel model;
  std::vector<std::string> neighbor_ids;  // aligned DT order, common cells first
  std::size_t common_count = 0;
  int bin_count = 0;
};

void write_cluster_model_json(const std::filesystem::path& path, const StoredClusterModel& stored);
StoredClusterModel read_cluster_model_json(const std::filesystem::path& path);

void write_traffic_json(const std::filesystem::path& path, const TrafficEstimate& traffic,
                        double alpha_enter, double alpha_remove);
TrafficEstimate read_traffic_json(const std::filesystem::path& path);

void write_fusion_report_json(const std::filesystem::path& path,
                              const std::vector<std::string>& omitted_ids,
                              const std::optional<std::vector<SetTarget>>& per_set_targets);

void write_multiplicity_csv(const std::filesystem::path& path, const ReshapedDt& reshaped);
struct StoredMultiplicity {
  std::vector<int> membership;
  std::vector<long long> multiplicity;
};
StoredMultiplicity read_multiplicity_csv(const std::filesystem::path& path);

void write_labels_csv(const std::filesystem::path& path, const std::vector<int>& region_labels);

// Flat `key = value` configuration. Values are numbers, booleans, quoted or
// bare strings, or bracketed number lists; `#` starts a comment.
class KvConfig {
 public:
  static KvConfig parse_file(const std::filesystem::path& path);
  static KvConfig parse_string(const std::string& text);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::vector<std::string> keys() const;

  std::string get_string(const std::string& key) const;
  double get_double(const std::string& key) const;
  long long get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_double_list(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;  // raw right-hand sides
};

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace imfuse::io
