#include "imfuse/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <stdexcept>

#include "imfuse/cirsp.hpp"
#include "imfuse/clustering.hpp"
#include "imfuse/fusion.hpp"
#include "imfuse/scenario.hpp"

namespace imfuse {
namespace {

using nlohmann::json;

template <typename F>
auto stage(const char* name, F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string("[") + name + "] " + e.what());
  }
}

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed, const char* key) {
  if (!seed) throw std::runtime_error(std::string("missing required seed '") + key + "'");
  return *seed;
}

void require_path(const std::filesystem::path& p, const char* what) {
  if (p.empty()) throw std::runtime_error(std::string("missing required path '") + what + "'");
}

void ensure_output_dir(const PipelineConfig& config) {
  require_path(config.output_dir, "output_dir");
  std::filesystem::create_directories(config.output_dir);
}

struct AlignedInputs {
  AlignedData aligned;
  SpMatrix sp;
};

// Stages re-read their inputs from the serialized artifacts, so any stage
// can be rerun from files alone and reproduce identical outputs.
AlignedInputs load_aligned(const PipelineConfig& config) {
  const MmrsVector mmrs = io::read_mmrs_csv(config.output_dir / "mmrs_vector.csv");
  const DtMatrix dt = io::read_dt_matrix_csv(config.output_dir / "dt_matrix.csv");
  const BinningConfig binning = io::read_binning_json(config.output_dir / "binning.json");
  AlignedInputs out;
  out.aligned = align_common_neighbors(mmrs, dt);
  out.sp = build_sp_matrix(out.aligned.dt, binning);
  return out;
}

io::StoredClusterModel run_cluster_stage(const PipelineConfig& config) {
  return stage("cluster", [&] {
    const AlignedInputs in = load_aligned(config);
    io::StoredClusterModel stored;
    stored.model = kmeans(in.sp, config.k, require_seed(config.seed_clustering, "seed_clustering"),
                          config.max_iter, config.tol);
    stored.neighbor_ids = in.aligned.dt.neighbor_ids;
    stored.common_count = in.aligned.map.common_count();
    stored.bin_count = config.binning.interval_count();
    io::write_cluster_model_json(config.output_dir / "cluster_model.json", stored);
    if (config.dump_sp) io::write_sp_csv(config.output_dir / "sp_matrix.csv", in.sp);
    return stored;
  });
}

TrafficEstimate run_regress_stage(const PipelineConfig& config) {
  return stage("regress", [&] {
    const AlignedInputs in = load_aligned(config);
    const io::StoredClusterModel stored =
        io::read_cluster_model_json(config.output_dir / "cluster_model.json");
    if (stored.neighbor_ids != in.aligned.dt.neighbor_ids)
      throw std::runtime_error("cluster model was built from different drive-test data");
    const RegressionDesign design =
        build_design(stored.model, in.aligned.mmrs, in.aligned.map);
    const TrafficEstimate traffic =
        stepwise_fit(design, config.alpha_enter, config.alpha_remove);
    io::write_traffic_json(config.output_dir / "regression.json", traffic, config.alpha_enter,
                           config.alpha_remove);
    return traffic;
  });
}

}  // namespace

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  const io::KvConfig kv = io::KvConfig::parse_file(path);
  static const std::set<std::string> known{
      "scenario",        "mmr_file",           "dt_file",
      "output_dir",      "serving_id",         "binning_edges",
      "q_threshold",     "k",                  "max_iter",
      "tol",             "alpha_enter",        "alpha_remove",
      "seed_simulation", "seed_clustering",    "seed_fusion",
      "n_mmr_reports",   "dt_sample_spacing_m", "oracle_samples",
      "dump_sp",         "include_intercept",  "min_weight",
      "mmrs_normalization", "pearson_support"};
  for (const auto& key : kv.keys())
    if (!known.count(key))
      throw std::runtime_error(path.string() + ": unknown config key '" + key + "'");

  PipelineConfig c;
  if (kv.has("scenario")) c.scenario_path = kv.get_string("scenario");
  if (kv.has("mmr_file")) c.mmr_path = kv.get_string("mmr_file");
  if (kv.has("dt_file")) c.dt_path = kv.get_string("dt_file");
  if (kv.has("output_dir")) c.output_dir = kv.get_string("output_dir");
  if (kv.has("serving_id")) c.serving_id = kv.get_string("serving_id");
  if (kv.has("binning_edges")) c.binning.edges = kv.get_double_list("binning_edges");
  if (kv.has("q_threshold")) c.binning.q_threshold = static_cast<int>(kv.get_int("q_threshold"));
  if (kv.has("k")) c.k = static_cast<int>(kv.get_int("k"));
  if (kv.has("max_iter")) c.max_iter = static_cast<int>(kv.get_int("max_iter"));
  if (kv.has("tol")) c.tol = kv.get_double("tol");
  if (kv.has("alpha_enter")) c.alpha_enter = kv.get_double("alpha_enter");
  if (kv.has("alpha_remove")) c.alpha_remove = kv.get_double("alpha_remove");
  if (kv.has("seed_simulation"))
    c.seed_simulation = static_cast<std::uint64_t>(kv.get_int("seed_simulation"));
  if (kv.has("seed_clustering"))
    c.seed_clustering = static_cast<std::uint64_t>(kv.get_int("seed_clustering"));
  if (kv.has("seed_fusion")) c.seed_fusion = static_cast<std::uint64_t>(kv.get_int("seed_fusion"));
  if (kv.has("n_mmr_reports")) {
    const long long n = kv.get_int("n_mmr_reports");
    if (n < 1) throw std::runtime_error(path.string() + ": n_mmr_reports must be positive");
    c.n_mmr_reports = static_cast<std::size_t>(n);
  }
  if (kv.has("dt_sample_spacing_m")) c.dt_sample_spacing_m = kv.get_double("dt_sample_spacing_m");
  if (kv.has("oracle_samples")) {
    const long long n = kv.get_int("oracle_samples");
    if (n < 1) throw std::runtime_error(path.string() + ": oracle_samples must be positive");
    c.oracle_samples = static_cast<std::size_t>(n);
  }
  if (kv.has("dump_sp")) c.dump_sp = kv.get_bool("dump_sp");
  if (kv.has("include_intercept")) c.include_intercept = kv.get_bool("include_intercept");
  if (kv.has("min_weight")) c.min_weight = kv.get_double("min_weight");
  if (kv.has("mmrs_normalization")) {
    const std::string v = kv.get_string("mmrs_normalization");
    if (v == "total_reports")
      c.mmrs_normalization = MmrsNormalization::kTotalReports;
    else if (v == "per_neighbor")
      c.mmrs_normalization = MmrsNormalization::kPerNeighbor;
    else
      throw std::runtime_error(path.string() + ": mmrs_normalization must be 'total_reports' or 'per_neighbor'");
  }
  if (kv.has("pearson_support")) {
    const std::string v = kv.get_string("pearson_support");
    if (v == "intersection")
      c.pearson_support = PearsonSupport::kIntersection;
    else if (v == "union")
      c.pearson_support = PearsonSupport::kUnionWithZeros;
    else
      throw std::runtime_error(path.string() + ": pearson_support must be 'intersection' or 'union'");
  }
  c.binning.validate();
  return c;
}

SimulateOutput run_simulate(const PipelineConfig& config) {
  return stage("simulate", [&] {
    require_path(config.scenario_path, "scenario");
    ensure_output_dir(config);
    const Scenario scenario = io::read_scenario(config.scenario_path);
    const std::uint64_t seed =
        config.seed_simulation ? *config.seed_simulation : scenario.seed;

    SimulateOutput out;
    out.mmr_path = config.output_dir / "mmr.jsonl";
    out.dt_path = config.output_dir / "dt.jsonl";
    out.truth_path = config.output_dir / "icdm_true.csv";
    out.labels_path = config.output_dir / "dt_labels.csv";

    const auto reports = simulate_mmrs(scenario, config.n_mmr_reports, seed);
    io::write_mmr_jsonl(out.mmr_path, reports);
    out.mmr_count = reports.size();

    const DriveTestResult dt = simulate_drive_test(scenario, config.dt_sample_spacing_m, seed + 1);
    io::write_dt_jsonl(out.dt_path, dt.records);
    io::write_labels_csv(out.labels_path, dt.region_labels);
    out.dt_count = dt.records.size();
    out.dt_skipped = dt.skipped;

    const Icdm truth = ground_truth_icdm(scenario, config.oracle_samples, config.binning, seed + 2);
    io::write_icdm_csv(out.truth_path, truth);
    return out;
  });
}

BinOutput run_bin(const PipelineConfig& config) {
  return stage("bin", [&] {
    require_path(config.mmr_path, "mmr_file");
    require_path(config.dt_path, "dt_file");
    ensure_output_dir(config);

    BinOutput out;
    const auto reports = io::read_mmr_jsonl(config.mmr_path);
    std::string serving = config.serving_id;
    if (serving.empty()) {
      if (reports.empty())
        throw std::runtime_error("serving cell unknown: MMR stream is empty and no serving_id set");
      serving = reports.front().serving_id;
    }
    out.mmrs = build_mmrs_vector(reports, config.binning);
    if (!out.mmrs.serving_id.empty() && out.mmrs.serving_id != serving)
      throw std::runtime_error("serving_id '" + serving + "' does not match the MMR stream ('" +
                               out.mmrs.serving_id + "')");
    out.mmrs.serving_id = serving;
    out.dt = build_dt_matrix(io::read_dt_jsonl(config.dt_path), serving);

    out.mmrs_csv = config.output_dir / "mmrs_vector.csv";
    out.dt_matrix_csv = config.output_dir / "dt_matrix.csv";
    out.binning_json = config.output_dir / "binning.json";
    io::write_mmrs_csv(out.mmrs_csv, out.mmrs);
    io::write_dt_matrix_csv(out.dt_matrix_csv, out.dt);
    io::write_binning_json(out.binning_json, config.binning);
    return out;
  });
}

FuseOutput run_fuse_mmrs(const PipelineConfig& config) {
  run_bin(config);
  run_cluster_stage(config);
  run_regress_stage(config);
  return stage("fuse-mmrs", [&] {
    const AlignedInputs in = load_aligned(config);
    const io::StoredClusterModel stored =
        io::read_cluster_model_json(config.output_dir / "cluster_model.json");
    const TrafficEstimate traffic = io::read_traffic_json(config.output_dir / "regression.json");

    FuseOutput out;
    out.traffic = traffic;
    out.omitted_ids =
        find_omitted_severe(stored.model, traffic, in.aligned.map, config.binning, config.min_weight);
    const auto counts = complete_mmrs(stored.model, traffic, in.aligned.map, out.omitted_ids,
                                      CompletionOptions{config.include_intercept});
    const ReinforcedMmrs reinforced = reinforce(in.aligned.mmrs, counts, out.omitted_ids);

    out.im_base = icdm_from_mmrs(in.aligned.mmrs, config.binning, config.mmrs_normalization);
    out.im_fused = icdm_from_mmrs(reinforced, config.binning, config.mmrs_normalization);
    out.im_base_path = config.output_dir / "im_mr.csv";
    out.im_fused_path = config.output_dir / "im_mr_prime.csv";
    io::write_icdm_csv(out.im_base_path, out.im_base);
    io::write_icdm_csv(out.im_fused_path, out.im_fused);
    io::write_fusion_report_json(config.output_dir / "fusion_report_mmrs.json", out.omitted_ids,
                                 std::nullopt);
    return out;
  });
}

FuseOutput run_fuse_dt(const PipelineConfig& config) {
  run_bin(config);
  run_cluster_stage(config);
  run_regress_stage(config);
  return stage("fuse-dt", [&] {
    const AlignedInputs in = load_aligned(config);
    const io::StoredClusterModel stored =
        io::read_cluster_model_json(config.output_dir / "cluster_model.json");
    const TrafficEstimate traffic = io::read_traffic_json(config.output_dir / "regression.json");

    FuseOutput out;
    out.traffic = traffic;
    out.omitted_ids =
        find_omitted_severe(stored.model, traffic, in.aligned.map, config.binning, config.min_weight);
    const ReshapedDt reshaped = reshape_dt(in.aligned.dt, stored.model, traffic,
                                           require_seed(config.seed_fusion, "seed_fusion"));
    out.per_set_targets = reshaped.per_set_targets;

    out.im_base = icdm_from_dt(in.aligned.dt, config.binning);
    out.im_fused = icdm_from_dt(reshaped, config.binning);
    out.im_base_path = config.output_dir / "im_dt.csv";
    out.im_fused_path = config.output_dir / "im_dt_prime.csv";
    io::write_icdm_csv(out.im_base_path, out.im_base);
    io::write_icdm_csv(out.im_fused_path, out.im_fused);
    io::write_fusion_report_json(config.output_dir / "fusion_report_dt.json", out.omitted_ids,
                                 out.per_set_targets);
    io::write_multiplicity_csv(config.output_dir / "reshape_multiplicity.csv", reshaped);
    return out;
  });
}

CompareOutput run_compare(const std::vector<std::filesystem::path>& icdm_paths,
                          const std::optional<std::filesystem::path>& truth_path,
                          const std::optional<std::filesystem::path>& report_path,
                          PearsonSupport support) {
  return stage("compare", [&] {
    if (icdm_paths.size() < 1) throw std::runtime_error("no matrices to compare");

    std::vector<std::pair<std::string, Icdm>> ims;
    for (const auto& p : icdm_paths) {
      const auto loaded = io::read_icdm_csv(p);
      for (const auto& im : loaded) ims.emplace_back(p.string(), im);
    }

    CompareOutput out;
    for (std::size_t a = 0; a < ims.size(); ++a)
      for (std::size_t b = a + 1; b < ims.size(); ++b)
        out.pairwise.push_back(
            {ims[a].first, ims[b].first, pearson(ims[a].second, ims[b].second, support)});

    if (truth_path) {
      const auto truths = io::read_icdm_csv(*truth_path);
      if (truths.size() != 1)
        throw std::runtime_error("truth file must hold exactly one matrix row");
      for (const auto& [name, im] : ims) {
        const ImError err = im_error(im, truths.front());
        out.vs_truth.push_back({name, err.mean_abs_error, err.max_abs_error, err.support_mismatch});
      }
    }

    if (report_path) {
      json pairwise = json::array();
      for (const auto& p : out.pairwise)
        pairwise.push_back({{"a", p.a}, {"b", p.b}, {"pearson", p.pearson}});
      json vs_truth = json::array();
      for (const auto& t : out.vs_truth)
        vs_truth.push_back({{"im", t.im},
                            {"mae", t.mean_abs_error},
                            {"max_ae", t.max_abs_error},
                            {"support_mismatch", t.support_mismatch}});
      json j{{"schema", 1}, {"kind", "compare_report"}, {"pairwise", pairwise}};
      if (truth_path) j["vs_truth"] = vs_truth;
      std::ofstream f(*report_path);
      if (!f) throw std::runtime_error("cannot open '" + report_path->string() + "' for writing");
      f << j.dump(2) << '\n';
      if (!f) throw std::runtime_error("failed writing '" + report_path->string() + "'");
    }
    return out;
  });
}

void run_report(const PipelineConfig& config, const std::filesystem::path& artifact_dir) {
  stage("report", [&] {
    require_path(config.dt_path, "dt_file");
    const auto records = io::read_dt_jsonl(config.dt_path);
    const io::StoredClusterModel stored =
        io::read_cluster_model_json(artifact_dir / "cluster_model.json");
    if (records.size() != stored.model.membership.size())
      throw std::runtime_error("drive-test stream does not match the cluster model");

    ensure_output_dir(config);
    {
      std::ofstream f(config.output_dir / "report_clusters_xy.csv");
      if (!f) throw std::runtime_error("cannot write report_clusters_xy.csv");
      f << "record_index,x,y,cluster\n";
      for (std::size_t m = 0; m < records.size(); ++m)
        f << m << ',' << io::format_double(records[m].x) << ',' << io::format_double(records[m].y)
          << ',' << stored.model.membership[m] << '\n';
    }

    const DtMatrix dt = io::read_dt_matrix_csv(artifact_dir / "dt_matrix.csv");
    const io::StoredMultiplicity mult =
        io::read_multiplicity_csv(artifact_dir / "reshape_multiplicity.csv");
    if (mult.multiplicity.size() != dt.record_count())
      throw std::runtime_error("reshape multiplicities do not match the drive-test matrix");

    // Empirical CIR distribution per neighbor, original vs reshaped weights.
    long long total_weight = 0;
    for (const long long w : mult.multiplicity) total_weight += w;
    std::ofstream f(config.output_dir / "report_cir_cdf.csv");
    if (!f) throw std::runtime_error("cannot write report_cir_cdf.csv");
    f << "neighbor_id,cir_db,cdf_original,cdf_reshaped\n";
    for (std::size_t i = 0; i < dt.neighbor_count(); ++i) {
      std::vector<std::pair<double, long long>> values;
      for (std::size_t m = 0; m < dt.record_count(); ++m)
        if (dt.detected(i, m))
          values.emplace_back(
              dt.cir_db(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(m)),
              mult.multiplicity[m]);
      std::sort(values.begin(), values.end());
      long long seen = 0;
      long long seen_weighted = 0;
      for (const auto& [cir, w] : values) {
        seen += 1;
        seen_weighted += w;
        f << dt.neighbor_ids[i] << ',' << io::format_double(cir) << ','
          << io::format_double(static_cast<double>(seen) / static_cast<double>(dt.record_count()))
          << ','
          << io::format_double(total_weight > 0 ? static_cast<double>(seen_weighted) /
                                                      static_cast<double>(total_weight)
                                                : 0.0)
          << '\n';
      }
    }
    if (!f) throw std::runtime_error("failed writing report_cir_cdf.csv");
    return 0;
  });
}

}  // namespace imfuse
