// Python bindings for the core operations: binning, source-data assembly,
// clustering, regression, the two fusion directions, matrix estimation, and
// the file-level pipeline stages.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <utility>

#include "imfuse/binning.hpp"
#include "imfuse/cirsp.hpp"
#include "imfuse/clustering.hpp"
#include "imfuse/fusion.hpp"
#include "imfuse/icdm.hpp"
#include "imfuse/io.hpp"
#include "imfuse/measurements.hpp"
#include "imfuse/pipeline.hpp"
#include "imfuse/regression.hpp"
#include "imfuse/scenario.hpp"
#include "imfuse/source_data.hpp"

namespace py = pybind11;
using namespace imfuse;

PYBIND11_MODULE(_imfuse, m) {
  m.doc() = "Inter-cell dependency matrices from fused measurement reports and drive tests";

  // Binning.
  py::class_<BinningConfig>(m, "BinningConfig")
      .def(py::init([](std::vector<double> edges, int q_threshold) {
             return BinningConfig{std::move(edges), q_threshold};
           }),
           py::arg("edges"), py::arg("q_threshold"))
      .def_readwrite("edges", &BinningConfig::edges)
      .def_readwrite("q_threshold", &BinningConfig::q_threshold)
      .def("interval_count", &BinningConfig::interval_count)
      .def("cir_threshold_db", &BinningConfig::cir_threshold_db)
      .def("validate", &BinningConfig::validate)
      .def_static("gsm_default", &BinningConfig::gsm_default);
  m.def("bin_cir", &bin_cir, py::arg("cir_db"), py::arg("binning"));

  // Raw measurements.
  py::class_<Reading>(m, "Reading")
      .def(py::init([](std::string cell_id, double rxlev_dbm) {
             return Reading{std::move(cell_id), rxlev_dbm};
           }),
           py::arg("cell_id"), py::arg("rxlev_dbm"))
      .def_readwrite("cell_id", &Reading::cell_id)
      .def_readwrite("rxlev_dbm", &Reading::rxlev_dbm);
  py::class_<MmrReport>(m, "MmrReport")
      .def(py::init([](std::string serving_id, double serving_rxlev_dbm,
                       std::vector<Reading> neighbors) {
             return MmrReport{std::move(serving_id), serving_rxlev_dbm, std::move(neighbors)};
           }),
           py::arg("serving_id"), py::arg("serving_rxlev_dbm"),
           py::arg("neighbors") = std::vector<Reading>{})
      .def_readwrite("serving_id", &MmrReport::serving_id)
      .def_readwrite("serving_rxlev_dbm", &MmrReport::serving_rxlev_dbm)
      .def_readwrite("neighbors", &MmrReport::neighbors);
  py::class_<DtRecord>(m, "DtRecord")
      .def(py::init([](double x, double y, std::vector<Reading> readings) {
             return DtRecord{x, y, std::move(readings)};
           }),
           py::arg("x"), py::arg("y"), py::arg("readings") = std::vector<Reading>{})
      .def_readwrite("x", &DtRecord::x)
      .def_readwrite("y", &DtRecord::y)
      .def_readwrite("readings", &DtRecord::readings);

  // Binned source data.
  py::class_<MmrsVector>(m, "MmrsVector")
      .def_readonly("serving_id", &MmrsVector::serving_id)
      .def_readonly("neighbor_ids", &MmrsVector::neighbor_ids)
      .def_readonly("counts", &MmrsVector::counts)
      .def_readonly("total_reports", &MmrsVector::total_reports)
      .def_readonly("bin_count", &MmrsVector::bin_count)
      .def("at", &MmrsVector::at, py::arg("neighbor"), py::arg("q"))
      .def("severe_count", &MmrsVector::severe_count, py::arg("neighbor"), py::arg("q_threshold"))
      .def("sample_count", &MmrsVector::sample_count, py::arg("neighbor"));
  py::class_<DtMatrix>(m, "DtMatrix")
      .def_readonly("serving_id", &DtMatrix::serving_id)
      .def_readonly("neighbor_ids", &DtMatrix::neighbor_ids)
      .def_readonly("cir_db", &DtMatrix::cir_db)
      .def("record_count", &DtMatrix::record_count)
      .def("detected", &DtMatrix::detected, py::arg("neighbor"), py::arg("record"));
  py::class_<CellIndexMap>(m, "CellIndexMap")
      .def_readonly("common", &CellIndexMap::common)
      .def_readonly("mmr_only", &CellIndexMap::mmr_only)
      .def_readonly("dt_only", &CellIndexMap::dt_only)
      .def("mmr_ids", &CellIndexMap::mmr_ids)
      .def("dt_ids", &CellIndexMap::dt_ids);
  py::class_<AlignedData>(m, "AlignedData")
      .def_readonly("mmrs", &AlignedData::mmrs)
      .def_readonly("dt", &AlignedData::dt)
      .def_readonly("map", &AlignedData::map);
  m.def("build_mmrs_vector", &build_mmrs_vector, py::arg("reports"), py::arg("binning"));
  m.def("build_dt_matrix", &build_dt_matrix, py::arg("records"), py::arg("serving_id"));
  m.def("align_common_neighbors", &align_common_neighbors, py::arg("mmrs"), py::arg("dt"));

  // Patterns and clustering.
  py::class_<SpMatrix>(m, "SpMatrix")
      .def_readonly("row_count", &SpMatrix::row_count)
      .def_readonly("bin_count", &SpMatrix::bin_count)
      .def_readonly("columns", &SpMatrix::columns)
      .def("record_count", &SpMatrix::record_count)
      .def("dense_column", &SpMatrix::dense_column, py::arg("record"));
  m.def("build_sp_matrix", &build_sp_matrix, py::arg("dt"), py::arg("binning"));
  py::class_<ClusterModel>(m, "ClusterModel")
      .def_readonly("k", &ClusterModel::k)
      .def_readonly("membership", &ClusterModel::membership)
      .def_readonly("sizes", &ClusterModel::sizes)
      .def_readonly("centers", &ClusterModel::centers)
      .def_readonly("inertia", &ClusterModel::inertia)
      .def_readonly("inertia_history", &ClusterModel::inertia_history);
  m.def("kmeans", &kmeans, py::arg("sp"), py::arg("k"), py::arg("seed"),
        py::arg("max_iter") = 300, py::arg("tol") = 1e-6);
  m.def("cluster_centers", &cluster_centers, py::arg("membership"), py::arg("sp"), py::arg("k"));

  // Traffic regression.
  py::class_<RegressionDesign>(m, "RegressionDesign")
      .def(py::init<>())
      .def_readwrite("response", &RegressionDesign::response)
      .def_readwrite("design", &RegressionDesign::design)
      .def_readwrite("common_count", &RegressionDesign::common_count);
  py::class_<TrafficEstimate>(m, "TrafficEstimate")
      .def(py::init([](Eigen::VectorXd beta, std::vector<int> entered, double r_squared,
                       double model_p_value) {
             return TrafficEstimate{std::move(beta), std::move(entered), r_squared,
                                    model_p_value};
           }),
           py::arg("beta") = Eigen::VectorXd{}, py::arg("entered") = std::vector<int>{},
           py::arg("r_squared") = 0.0, py::arg("model_p_value") = 1.0)
      .def_readwrite("beta", &TrafficEstimate::beta)
      .def_readwrite("entered", &TrafficEstimate::entered)
      .def_readwrite("r_squared", &TrafficEstimate::r_squared)
      .def_readwrite("model_p_value", &TrafficEstimate::model_p_value);
  m.def("build_design", &build_design, py::arg("cluster"), py::arg("aligned_mmrs"),
        py::arg("map"));
  m.def("stepwise_fit", &stepwise_fit, py::arg("design"), py::arg("alpha_enter") = 0.05,
        py::arg("alpha_remove") = 0.10);
  m.def("f_pvalue", &f_pvalue, py::arg("f_stat"), py::arg("df1"), py::arg("df2"));

  // Fusion.
  py::class_<ReinforcedMmrs>(m, "ReinforcedMmrs")
      .def_readonly("base", &ReinforcedMmrs::base)
      .def_readonly("appended_ids", &ReinforcedMmrs::appended_ids)
      .def_readonly("appended_counts", &ReinforcedMmrs::appended_counts)
      .def("appended_at", &ReinforcedMmrs::appended_at, py::arg("j"), py::arg("q"));
  py::class_<SetTarget>(m, "SetTarget")
      .def_readonly("cluster", &SetTarget::cluster)
      .def_readonly("size", &SetTarget::size)
      .def_readonly("replicate", &SetTarget::replicate)
      .def_readonly("extra", &SetTarget::extra)
      .def("target", &SetTarget::target);
  py::class_<ReshapedDt>(m, "ReshapedDt")
      .def_readonly("source", &ReshapedDt::source)
      .def_readonly("membership", &ReshapedDt::membership)
      .def_readonly("multiplicity", &ReshapedDt::multiplicity)
      .def_readonly("per_set_targets", &ReshapedDt::per_set_targets)
      .def("record_count", &ReshapedDt::record_count)
      .def("materialize", &ReshapedDt::materialize);
  m.def("find_omitted_severe", &find_omitted_severe, py::arg("cluster"), py::arg("traffic"),
        py::arg("map"), py::arg("binning"), py::arg("min_weight") = 0.0);
  m.def(
      "complete_mmrs",
      [](const ClusterModel& cluster, const TrafficEstimate& traffic, const CellIndexMap& map,
         const std::vector<std::string>& omitted, bool include_intercept) {
        return complete_mmrs(cluster, traffic, map, omitted,
                             CompletionOptions{include_intercept});
      },
      py::arg("cluster"), py::arg("traffic"), py::arg("map"), py::arg("omitted"),
      py::arg("include_intercept") = true);
  m.def("reinforce", &reinforce, py::arg("mmrs"), py::arg("estimated_counts"),
        py::arg("omitted"));
  m.def("reshape_dt", &reshape_dt, py::arg("dt"), py::arg("cluster"), py::arg("traffic"),
        py::arg("seed"));

  // Dependency matrices and metrics.
  py::enum_<MmrsNormalization>(m, "MmrsNormalization")
      .value("TOTAL_REPORTS", MmrsNormalization::kTotalReports)
      .value("PER_NEIGHBOR", MmrsNormalization::kPerNeighbor);
  py::enum_<PearsonSupport>(m, "PearsonSupport")
      .value("INTERSECTION", PearsonSupport::kIntersection)
      .value("UNION_WITH_ZEROS", PearsonSupport::kUnionWithZeros);
  py::class_<Icdm>(m, "Icdm")
      .def(py::init([](std::string serving_id, std::map<std::string, double> entries) {
             return Icdm{std::move(serving_id), std::move(entries)};
           }),
           py::arg("serving_id") = "", py::arg("entries") = std::map<std::string, double>{})
      .def_readwrite("serving_id", &Icdm::serving_id)
      .def_readwrite("entries", &Icdm::entries);
  py::class_<ImError>(m, "ImError")
      .def_readonly("mean_abs_error", &ImError::mean_abs_error)
      .def_readonly("max_abs_error", &ImError::max_abs_error)
      .def_readonly("support_mismatch", &ImError::support_mismatch);
  m.def("icdm_from_mmrs",
        py::overload_cast<const MmrsVector&, const BinningConfig&, MmrsNormalization>(
            &icdm_from_mmrs),
        py::arg("mmrs"), py::arg("binning"),
        py::arg("normalization") = MmrsNormalization::kTotalReports);
  m.def("icdm_from_mmrs",
        py::overload_cast<const ReinforcedMmrs&, const BinningConfig&, MmrsNormalization>(
            &icdm_from_mmrs),
        py::arg("reinforced"), py::arg("binning"),
        py::arg("normalization") = MmrsNormalization::kTotalReports);
  m.def("icdm_from_dt",
        py::overload_cast<const DtMatrix&, const BinningConfig&>(&icdm_from_dt), py::arg("dt"),
        py::arg("binning"));
  m.def("icdm_from_dt",
        py::overload_cast<const ReshapedDt&, const BinningConfig&>(&icdm_from_dt),
        py::arg("reshaped"), py::arg("binning"));
  m.def("pearson", &pearson, py::arg("a"), py::arg("b"),
        py::arg("support") = PearsonSupport::kIntersection);
  m.def("im_error", &im_error, py::arg("estimate"), py::arg("truth"));

  // Synthetic scenarios.
  py::class_<CellSite>(m, "CellSite")
      .def(py::init([](std::string id, double x, double y, double tx_power_dbm) {
             return CellSite{std::move(id), x, y, tx_power_dbm};
           }),
           py::arg("id"), py::arg("x") = 0.0, py::arg("y") = 0.0,
           py::arg("tx_power_dbm") = 40.0)
      .def_readwrite("id", &CellSite::id)
      .def_readwrite("x", &CellSite::x)
      .def_readwrite("y", &CellSite::y)
      .def_readwrite("tx_power_dbm", &CellSite::tx_power_dbm);
  py::class_<Hotspot>(m, "Hotspot")
      .def(py::init([](double weight, double x, double y, double sigma_m) {
             return Hotspot{weight, x, y, sigma_m};
           }),
           py::arg("weight"), py::arg("x"), py::arg("y"), py::arg("sigma_m"))
      .def_readwrite("weight", &Hotspot::weight)
      .def_readwrite("x", &Hotspot::x)
      .def_readwrite("y", &Hotspot::y)
      .def_readwrite("sigma_m", &Hotspot::sigma_m);
  py::class_<PathlossModel>(m, "PathlossModel")
      .def(py::init([](double reference_loss_db, double exponent, double shadowing_sigma_db) {
             return PathlossModel{reference_loss_db, exponent, shadowing_sigma_db};
           }),
           py::arg("reference_loss_db") = 30.0, py::arg("exponent") = 3.5,
           py::arg("shadowing_sigma_db") = 0.0)
      .def_readwrite("reference_loss_db", &PathlossModel::reference_loss_db)
      .def_readwrite("exponent", &PathlossModel::exponent)
      .def_readwrite("shadowing_sigma_db", &PathlossModel::shadowing_sigma_db);
  py::class_<Scenario>(m, "Scenario")
      .def(py::init<>())
      .def_readwrite("cells", &Scenario::cells)
      .def_readwrite("serving_id", &Scenario::serving_id)
      .def_readwrite("ba_list", &Scenario::ba_list)
      .def_readwrite("traffic", &Scenario::traffic)
      .def_readwrite("roads", &Scenario::roads)
      .def_readwrite("pathloss", &Scenario::pathloss)
      .def_readwrite("noise_floor_dbm", &Scenario::noise_floor_dbm)
      .def_readwrite("detection_threshold_dbm", &Scenario::detection_threshold_dbm)
      .def_readwrite("seed", &Scenario::seed)
      .def("validate", &Scenario::validate);
  py::class_<DriveTestResult>(m, "DriveTestResult")
      .def_readonly("records", &DriveTestResult::records)
      .def_readonly("region_labels", &DriveTestResult::region_labels)
      .def_readonly("skipped", &DriveTestResult::skipped);
  m.def("simulate_mmrs", &simulate_mmrs, py::arg("scenario"), py::arg("n_reports"),
        py::arg("seed"));
  m.def("simulate_drive_test", &simulate_drive_test, py::arg("scenario"),
        py::arg("sample_spacing_m"), py::arg("seed"));
  m.def("ground_truth_icdm", &ground_truth_icdm, py::arg("scenario"), py::arg("n_samples"),
        py::arg("binning"), py::arg("seed"));

  // File formats.
  m.def("read_mmr_jsonl", &io::read_mmr_jsonl, py::arg("path"));
  m.def("write_mmr_jsonl", &io::write_mmr_jsonl, py::arg("path"), py::arg("reports"));
  m.def("read_dt_jsonl", &io::read_dt_jsonl, py::arg("path"));
  m.def("write_dt_jsonl", &io::write_dt_jsonl, py::arg("path"), py::arg("records"));
  m.def("read_icdm_csv", &io::read_icdm_csv, py::arg("path"));
  m.def("write_icdm_csv", &io::write_icdm_csv, py::arg("path"), py::arg("icdm"));
  m.def("read_scenario", &io::read_scenario, py::arg("path"));
  m.def("write_scenario", &io::write_scenario, py::arg("path"), py::arg("scenario"));

  // Pipeline stages.
  py::class_<PipelineConfig>(m, "PipelineConfig")
      .def(py::init<>())
      .def_readwrite("scenario_path", &PipelineConfig::scenario_path)
      .def_readwrite("mmr_path", &PipelineConfig::mmr_path)
      .def_readwrite("dt_path", &PipelineConfig::dt_path)
      .def_readwrite("output_dir", &PipelineConfig::output_dir)
      .def_readwrite("serving_id", &PipelineConfig::serving_id)
      .def_readwrite("binning", &PipelineConfig::binning)
      .def_readwrite("k", &PipelineConfig::k)
      .def_readwrite("max_iter", &PipelineConfig::max_iter)
      .def_readwrite("tol", &PipelineConfig::tol)
      .def_readwrite("alpha_enter", &PipelineConfig::alpha_enter)
      .def_readwrite("alpha_remove", &PipelineConfig::alpha_remove)
      .def_readwrite("seed_simulation", &PipelineConfig::seed_simulation)
      .def_readwrite("seed_clustering", &PipelineConfig::seed_clustering)
      .def_readwrite("seed_fusion", &PipelineConfig::seed_fusion)
      .def_readwrite("n_mmr_reports", &PipelineConfig::n_mmr_reports)
      .def_readwrite("dt_sample_spacing_m", &PipelineConfig::dt_sample_spacing_m)
      .def_readwrite("oracle_samples", &PipelineConfig::oracle_samples)
      .def_readwrite("dump_sp", &PipelineConfig::dump_sp)
      .def_readwrite("include_intercept", &PipelineConfig::include_intercept)
      .def_readwrite("min_weight", &PipelineConfig::min_weight)
      .def_readwrite("mmrs_normalization", &PipelineConfig::mmrs_normalization)
      .def_readwrite("pearson_support", &PipelineConfig::pearson_support);
  py::class_<SimulateOutput>(m, "SimulateOutput")
      .def_readonly("mmr_path", &SimulateOutput::mmr_path)
      .def_readonly("dt_path", &SimulateOutput::dt_path)
      .def_readonly("truth_path", &SimulateOutput::truth_path)
      .def_readonly("labels_path", &SimulateOutput::labels_path)
      .def_readonly("mmr_count", &SimulateOutput::mmr_count)
      .def_readonly("dt_count", &SimulateOutput::dt_count)
      .def_readonly("dt_skipped", &SimulateOutput::dt_skipped);
  py::class_<BinOutput>(m, "BinOutput")
      .def_readonly("mmrs_csv", &BinOutput::mmrs_csv)
      .def_readonly("dt_matrix_csv", &BinOutput::dt_matrix_csv)
      .def_readonly("binning_json", &BinOutput::binning_json)
      .def_readonly("mmrs", &BinOutput::mmrs)
      .def_readonly("dt", &BinOutput::dt);
  py::class_<FuseOutput>(m, "FuseOutput")
      .def_readonly("im_base", &FuseOutput::im_base)
      .def_readonly("im_fused", &FuseOutput::im_fused)
      .def_readonly("traffic", &FuseOutput::traffic)
      .def_readonly("omitted_ids", &FuseOutput::omitted_ids)
      .def_readonly("per_set_targets", &FuseOutput::per_set_targets)
      .def_readonly("im_base_path", &FuseOutput::im_base_path)
      .def_readonly("im_fused_path", &FuseOutput::im_fused_path);
  py::class_<ComparePair>(m, "ComparePair")
      .def_readonly("a", &ComparePair::a)
      .def_readonly("b", &ComparePair::b)
      .def_readonly("pearson", &ComparePair::pearson);
  py::class_<CompareTruthEntry>(m, "CompareTruthEntry")
      .def_readonly("im", &CompareTruthEntry::im)
      .def_readonly("mean_abs_error", &CompareTruthEntry::mean_abs_error)
      .def_readonly("max_abs_error", &CompareTruthEntry::max_abs_error)
      .def_readonly("support_mismatch", &CompareTruthEntry::support_mismatch);
  py::class_<CompareOutput>(m, "CompareOutput")
      .def_readonly("pairwise", &CompareOutput::pairwise)
      .def_readonly("vs_truth", &CompareOutput::vs_truth);
  m.def("load_pipeline_config", &load_pipeline_config, py::arg("path"));
  m.def("run_simulate", &run_simulate, py::arg("config"));
  m.def("run_bin", &run_bin, py::arg("config"));
  m.def("run_fuse_mmrs", &run_fuse_mmrs, py::arg("config"));
  m.def("run_fuse_dt", &run_fuse_dt, py::arg("config"));
  m.def("run_compare", &run_compare, py::arg("icdm_paths"), py::arg("truth_path") = py::none(),
        py::arg("report_path") = py::none(),
        py::arg("support") = PearsonSupport::kIntersection);
  m.def("run_report", &run_report, py::arg("config"), py::arg("artifact_dir"));
}
