#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "imfuse/binning.hpp"
#include "imfuse/icdm.hpp"
#include "imfuse/io.hpp"
#include "imfuse/regression.hpp"

namespace imfuse {

// Settings shared by the pipeline stages. Seeds have no defaults: every
// stochastic stage demands one, so runs are reproducible by construction.
struct PipelineConfig {
  std::filesystem::path scenario_path;
  std::filesystem::path mmr_path;
  std::filesystem::path dt_path;
  std::filesystem::path output_dir;
  std::string serving_id;  // empty: taken from the MMR stream

  BinningConfig binning = BinningConfig::gsm_default();
  int k = 8;
  int max_iter = 300;
  double tol = 1e-6;
  double alpha_enter = 0.05;
  double alpha_remove = 0.10;

  std::optional<std::uint64_t> seed_simulation;
  std::optional<std::uint64_t> seed_clustering;
  std::optional<std::uint64_t> seed_fusion;

  std::size_t n_mmr_reports = 20000;
  double dt_sample_spacing_m = 10.0;
  std::size_t oracle_samples = 200000;

  bool dump_sp = false;
  bool include_intercept = true;
  double min_weight = 0.0;
  MmrsNormalization mmrs_normalization = MmrsNormalization::kTotalReports;
  PearsonSupport pearson_support = PearsonSupport::kIntersection;
};

// Reads a `key = value` file, rejecting unknown keys. Only the keys present
// override the defaults.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct SimulateOutput {
  std::filesystem::path mmr_path;
  std::filesystem::path dt_path;
  std::filesystem::path truth_path;
  std::filesystem::path labels_path;
  std::size_t mmr_count = 0;
  std::size_t dt_count = 0;
  std::size_t dt_skipped = 0;
};

// scenario.json -> mmr.jsonl, dt.jsonl, icdm_true.csv, dt_labels.csv.
SimulateOutput run_simulate(const PipelineConfig& config);

struct BinOutput {
  std::filesystem::path mmrs_csv;
  std::filesystem::path dt_matrix_csv;
  std::filesystem::path binning_json;
  MmrsVector mmrs;
  DtMatrix dt;
};

// mmr.jsonl + dt.jsonl -> mmrs_vector.csv, dt_matrix.csv, binning.json.
BinOutput run_bin(const PipelineConfig& config);

struct FuseOutput {
  Icdm im_base;
  Icdm im_fused;
  TrafficEstimate traffic;
  std::vector<std::string> omitted_ids;
  std::vector<SetTarget> per_set_targets;  // only for the DT direction
  std::filesystem::path im_base_path;
  std::filesystem::path im_fused_path;
};

// Full chain ending in a reinforced measurement-report matrix: bin, cluster,
// regress, estimate the omitted cells, append them.
FuseOutput run_fuse_mmrs(const PipelineConfig& config);

// Full chain ending in reshaped drive-test data: bin, cluster, regress,
// replicate records toward the estimated traffic distribution.
FuseOutput run_fuse_dt(const PipelineConfig& config);

struct ComparePair {
  std::string a;
  std::string b;
  double pearson = 0.0;
};

struct CompareTruthEntry {
  std::string im;
  double mean_abs_error = 0.0;
  double max_abs_error = 0.0;
  long long support_mismatch = 0;
};

struct CompareOutput {
  std::vector<ComparePair> pairwise;
  std::vector<CompareTruthEntry> vs_truth;
};

CompareOutput run_compare(const std::vector<std::filesystem::path>& icdm_paths,
                          const std::optional<std::filesystem::path>& truth_path,
                          const std::optional<std::filesystem::path>& report_path,
                          PearsonSupport support);

// Renders plot-ready CSVs (cluster scatter, per-neighbor CIR distribution
// curves) from the artifacts a fuse-dt run left in the output directory.
void run_report(const PipelineConfig& config, const std::filesystem::path& artifact_dir);

}  // namespace imfuse
