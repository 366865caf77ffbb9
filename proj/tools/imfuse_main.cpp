#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "imfuse/icdm.hpp"
#include "imfuse/io.hpp"
#include "imfuse/pipeline.hpp"
#include "imfuse/source_data.hpp"

namespace {

using imfuse::PipelineConfig;

// Shared pipeline flags. A --config file is applied first, explicit flags
// override it.
struct PipelineFlags {
  std::string config_file;
  std::string scenario, mmr, dt, out, serving_id;
  std::vector<double> edges;
  int q_threshold = 0, k = 0, max_iter = 0;
  double tol = 0.0, alpha_enter = 0.0, alpha_remove = 0.0, spacing = 0.0, min_weight = 0.0;
  std::uint64_t seed = 0, seed_clustering = 0, seed_fusion = 0;
  std::uint64_t n_reports = 0, oracle_samples = 0;
  bool dump_sp = false, no_intercept = false;
  std::string normalization, support;

  CLI::Option *o_config = nullptr, *o_scenario = nullptr, *o_mmr = nullptr, *o_dt = nullptr,
              *o_out = nullptr, *o_serving = nullptr, *o_edges = nullptr, *o_qthr = nullptr,
              *o_k = nullptr, *o_max_iter = nullptr, *o_tol = nullptr, *o_enter = nullptr,
              *o_remove = nullptr, *o_spacing = nullptr, *o_min_weight = nullptr,
              *o_seed = nullptr, *o_seed_clustering = nullptr, *o_seed_fusion = nullptr,
              *o_n_reports = nullptr, *o_oracle = nullptr, *o_dump_sp = nullptr,
              *o_no_intercept = nullptr, *o_normalization = nullptr;

  void attach_common(CLI::App* sub) {
    o_config = sub->add_option("--config", config_file, "key = value configuration file")
                   ->check(CLI::ExistingFile);
    o_out = sub->add_option("--out", out, "output directory");
    o_edges = sub->add_option("--binning-edges", edges,
                              "CIR interval boundaries in dB, strictly increasing")
                  ->expected(1, 64);
    o_qthr = sub->add_option("--q-threshold", q_threshold,
                             "intervals 1..q count as harmful interference");
  }

  void attach_measurements(CLI::App* sub) {
    o_mmr = sub->add_option("--mmr", mmr, "measurement reports, JSON lines");
    o_dt = sub->add_option("--dt", dt, "drive-test records, JSON lines");
    o_serving = sub->add_option("--serving-id", serving_id, "serving cell id");
  }

  void attach_fusion(CLI::App* sub) {
    o_k = sub->add_option("--k", k, "number of clusters");
    o_max_iter = sub->add_option("--max-iter", max_iter, "clustering iteration cap");
    o_tol = sub->add_option("--tol", tol, "relative inertia improvement treated as converged");
    o_enter = sub->add_option("--alpha-enter", alpha_enter, "stepwise entry significance");
    o_remove = sub->add_option("--alpha-remove", alpha_remove, "stepwise removal significance");
    o_seed = sub->add_option("--seed", seed,
                             "master seed (clustering uses it, record replication uses +1)");
    o_seed_clustering = sub->add_option("--seed-clustering", seed_clustering, "clustering seed");
    o_seed_fusion = sub->add_option("--seed-fusion", seed_fusion, "record replication seed");
    o_dump_sp = sub->add_flag("--dump-sp", dump_sp, "also write the sample-pattern matrix");
    o_no_intercept =
        sub->add_flag("--no-intercept", no_intercept, "omit the intercept from estimated counts");
    o_min_weight = sub->add_option("--min-weight", min_weight,
                                   "estimated severe mass a DT-only cell must exceed");
    o_normalization = sub->add_option("--normalization", normalization,
                                      "report-matrix denominator: total_reports or per_neighbor")
                          ->check(CLI::IsMember({"total_reports", "per_neighbor"}));
  }

  void attach_simulation(CLI::App* sub) {
    o_scenario = sub->add_option("--scenario", scenario, "scenario JSON file");
    o_n_reports = sub->add_option("--n-reports", n_reports, "measurement reports to draw");
    o_spacing = sub->add_option("--spacing", spacing, "drive-test sample spacing in meters");
    o_oracle = sub->add_option("--oracle-samples", oracle_samples,
                               "Monte Carlo samples for the true matrix");
    o_seed = sub->add_option("--seed", seed, "simulation seed (overrides the scenario's)");
  }

  PipelineConfig build() const {
    PipelineConfig c;
    if (o_config && *o_config) c = imfuse::load_pipeline_config(config_file);
    auto set = [](CLI::Option* o) { return o && o->count() > 0; };
    if (set(o_scenario)) c.scenario_path = scenario;
    if (set(o_mmr)) c.mmr_path = mmr;
    if (set(o_dt)) c.dt_path = dt;
    if (set(o_out)) c.output_dir = out;
    if (set(o_serving)) c.serving_id = serving_id;
    if (set(o_edges)) c.binning.edges = edges;
    if (set(o_qthr)) c.binning.q_threshold = q_threshold;
    if (set(o_k)) c.k = k;
    if (set(o_max_iter)) c.max_iter = max_iter;
    if (set(o_tol)) c.tol = tol;
    if (set(o_enter)) c.alpha_enter = alpha_enter;
    if (set(o_remove)) c.alpha_remove = alpha_remove;
    if (set(o_spacing)) c.dt_sample_spacing_m = spacing;
    if (set(o_min_weight)) c.min_weight = min_weight;
    if (set(o_seed)) {
      c.seed_simulation = seed;
      c.seed_clustering = seed;
      c.seed_fusion = seed + 1;
    }
    if (set(o_seed_clustering)) c.seed_clustering = seed_clustering;
    if (set(o_seed_fusion)) c.seed_fusion = seed_fusion;
    if (set(o_n_reports)) c.n_mmr_reports = n_reports;
    if (set(o_oracle)) c.oracle_samples = oracle_samples;
    if (set(o_dump_sp)) c.dump_sp = dump_sp;
    if (set(o_no_intercept)) c.include_intercept = !no_intercept;
    if (set(o_normalization))
      c.mmrs_normalization = normalization == "per_neighbor"
                                 ? imfuse::MmrsNormalization::kPerNeighbor
                                 : imfuse::MmrsNormalization::kTotalReports;
    c.binning.validate();
    return c;
  }
};

void print_fusion_summary(const imfuse::FuseOutput& out) {
  std::printf("entered clusters:");
  for (const int k : out.traffic.entered) std::printf(" %d", k);
  if (out.traffic.entered.empty()) std::printf(" none (intercept-only fit)");
  std::printf("\nr_squared = %.4f, model p = %.3g\n", out.traffic.r_squared,
              out.traffic.model_p_value);
  std::printf("omitted severe interferers: %zu\n", out.omitted_ids.size());
  for (const auto& id : out.omitted_ids) std::printf("  %s\n", id.c_str());
  std::printf("wrote %s\nwrote %s\n", out.im_base_path.string().c_str(),
              out.im_fused_path.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inter-cell dependency matrices from fused measurement reports and drive tests"};
  app.require_subcommand(1);

  PipelineFlags sim_flags;
  auto* sim = app.add_subcommand("simulate",
                                 "Generate measurement streams and the true matrix for a scenario");
  sim_flags.attach_common(sim);
  sim_flags.attach_simulation(sim);

  PipelineFlags bin_flags;
  auto* bin = app.add_subcommand("bin", "Bin raw measurement streams into matrix artifacts");
  bin_flags.attach_common(bin);
  bin_flags.attach_measurements(bin);

  PipelineFlags fuse_mmrs_flags;
  auto* fuse_mmrs = app.add_subcommand(
      "fuse-mmrs", "Reinforce the report matrix with drive-test-only interferers");
  fuse_mmrs_flags.attach_common(fuse_mmrs);
  fuse_mmrs_flags.attach_measurements(fuse_mmrs);
  fuse_mmrs_flags.attach_fusion(fuse_mmrs);

  PipelineFlags fuse_dt_flags;
  auto* fuse_dt = app.add_subcommand(
      "fuse-dt", "Reshape drive-test records toward the estimated traffic distribution");
  fuse_dt_flags.attach_common(fuse_dt);
  fuse_dt_flags.attach_measurements(fuse_dt);
  fuse_dt_flags.attach_fusion(fuse_dt);

  PipelineFlags icdm_flags;
  std::string icdm_mmrs_csv, icdm_dt_csv, icdm_out;
  auto* icdm_cmd =
      app.add_subcommand("icdm", "Estimate a dependency row from a single measurement source");
  icdm_flags.attach_common(icdm_cmd);
  icdm_flags.attach_measurements(icdm_cmd);
  icdm_cmd->add_option("--mmrs-csv", icdm_mmrs_csv, "binned report matrix artifact");
  icdm_cmd->add_option("--dt-csv", icdm_dt_csv, "drive-test matrix artifact");
  auto* icdm_out_opt =
      icdm_cmd->add_option("--out-file", icdm_out, "output CSV path")->required();
  auto* icdm_norm =
      icdm_cmd->add_option("--normalization", icdm_flags.normalization,
                           "report-matrix denominator: total_reports or per_neighbor")
          ->check(CLI::IsMember({"total_reports", "per_neighbor"}));

  std::vector<std::string> compare_ims;
  std::string compare_truth, compare_out, compare_support = "intersection";
  auto* compare = app.add_subcommand("compare", "Correlate matrices and score them against truth");
  compare->add_option("--im", compare_ims, "matrix CSV (repeatable)")->required()->expected(1, 64);
  compare->add_option("--truth", compare_truth, "true matrix CSV");
  compare->add_option("--out-file", compare_out, "JSON report path");
  compare->add_option("--support", compare_support, "neighbor set for correlations")
      ->check(CLI::IsMember({"intersection", "union"}));

  PipelineFlags report_flags;
  std::string report_artifacts;
  auto* report = app.add_subcommand("report", "Render plot-ready CSVs from fuse-dt artifacts");
  report_flags.attach_common(report);
  report_flags.attach_measurements(report);
  report->add_option("--artifacts", report_artifacts, "directory a fuse-dt run wrote")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      const auto out = imfuse::run_simulate(sim_flags.build());
      std::printf("wrote %zu reports to %s\n", out.mmr_count, out.mmr_path.string().c_str());
      std::printf("wrote %zu drive-test records to %s (%zu points skipped)\n", out.dt_count,
                  out.dt_path.string().c_str(), out.dt_skipped);
      std::printf("wrote true matrix to %s\n", out.truth_path.string().c_str());
    } else if (bin->parsed()) {
      const auto out = imfuse::run_bin(bin_flags.build());
      std::printf("binned %lld reports over %zu neighbors -> %s\n", out.mmrs.total_reports,
                  out.mmrs.neighbor_count(), out.mmrs_csv.string().c_str());
      std::printf("%zu drive-test records over %zu neighbors -> %s\n", out.dt.record_count(),
                  out.dt.neighbor_count(), out.dt_matrix_csv.string().c_str());
    } else if (fuse_mmrs->parsed()) {
      print_fusion_summary(imfuse::run_fuse_mmrs(fuse_mmrs_flags.build()));
    } else if (fuse_dt->parsed()) {
      print_fusion_summary(imfuse::run_fuse_dt(fuse_dt_flags.build()));
    } else if (icdm_cmd->parsed()) {
      const PipelineConfig config = icdm_flags.build();
      const int sources = (icdm_flags.o_mmr->count() ? 1 : 0) +
                          (icdm_flags.o_dt->count() ? 1 : 0) + (icdm_mmrs_csv.empty() ? 0 : 1) +
                          (icdm_dt_csv.empty() ? 0 : 1);
      if (sources != 1)
        throw std::runtime_error("icdm needs exactly one of --mmr, --dt, --mmrs-csv, --dt-csv");
      (void)icdm_norm;
      imfuse::Icdm im;
      if (icdm_flags.o_mmr->count()) {
        auto mmrs = imfuse::build_mmrs_vector(imfuse::io::read_mmr_jsonl(config.mmr_path),
                                              config.binning);
        if (!config.serving_id.empty()) mmrs.serving_id = config.serving_id;
        im = imfuse::icdm_from_mmrs(mmrs, config.binning, config.mmrs_normalization);
      } else if (icdm_flags.o_dt->count()) {
        if (config.serving_id.empty())
          throw std::runtime_error("icdm --dt needs --serving-id");
        const auto dt = imfuse::build_dt_matrix(imfuse::io::read_dt_jsonl(config.dt_path),
                                                config.serving_id);
        im = imfuse::icdm_from_dt(dt, config.binning);
      } else if (!icdm_mmrs_csv.empty()) {
        im = imfuse::icdm_from_mmrs(imfuse::io::read_mmrs_csv(icdm_mmrs_csv), config.binning,
                                    config.mmrs_normalization);
      } else {
        im = imfuse::icdm_from_dt(imfuse::io::read_dt_matrix_csv(icdm_dt_csv), config.binning);
      }
      imfuse::io::write_icdm_csv(icdm_out, im);
      std::printf("wrote %zu entries to %s\n", im.entries.size(), icdm_out.c_str());
      (void)icdm_out_opt;
    } else if (compare->parsed()) {
      std::vector<std::filesystem::path> paths(compare_ims.begin(), compare_ims.end());
      const auto support = compare_support == "union" ? imfuse::PearsonSupport::kUnionWithZeros
                                                      : imfuse::PearsonSupport::kIntersection;
      const auto out = imfuse::run_compare(
          paths, compare_truth.empty() ? std::nullopt : std::optional<std::filesystem::path>(compare_truth),
          compare_out.empty() ? std::nullopt : std::optional<std::filesystem::path>(compare_out),
          support);
      for (const auto& p : out.pairwise)
        std::printf("pearson(%s, %s) = %.4f\n", p.a.c_str(), p.b.c_str(), p.pearson);
      for (const auto& t : out.vs_truth)
        std::printf("%s vs truth: mae = %.6f, max_ae = %.6f, support mismatches = %lld\n",
                    t.im.c_str(), t.mean_abs_error, t.max_abs_error, t.support_mismatch);
    } else if (report->parsed()) {
      imfuse::run_report(report_flags.build(), report_artifacts);
      std::printf("wrote report CSVs\n");
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
