#pragma once

#include <fstream>
#include <iomanip>
#include <optional>
#include <string>

#include <json.hpp>

#include "sssvd/filter.hpp"
#include "sssvd/pipeline.hpp"

namespace sssvd {

inline constexpr int kReportSchemaVersion = 1;

template <typename Scalar>
nlohmann::json config_to_json(const RunConfig<Scalar>& config) {
  return {
      {"interval", {config.interval_a, config.interval_b}},
      {"mode", to_string(config.mode)},
      {"transform", to_string(config.transform().kind())},
      {"L", config.params.block_size},
      {"M", config.params.moment_degree},
      {"N", config.params.quadrature_count},
      {"ell", config.params.refinement_steps},
      {"delta", config.params.lowrank_threshold},
      {"epsilon", config.params.spurious_threshold},
      {"alpha", config.aspect},
      {"seed", config.params.seed},
      {"threads", config.threads},
  };
}

template <typename Scalar>
nlohmann::json result_to_json(const RunConfig<Scalar>& config, const RunResult<Scalar>& result,
                              const std::optional<AccuracyStats<Scalar>>& accuracy = {}) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["config"] = config_to_json(config);
  j["empty"] = result.empty;
  if (!result.note.empty()) j["note"] = result.note;
  j["input_transposed"] = result.input_transposed;
  j["retained_rank"] = result.retained_rank();
  j["rank_deficient_qr"] = result.rank_deficient_qr;
  j["counts"] = {
      {"candidates", result.triplets.count()},
      {"in_interval", result.count_in_interval},
      {"nonspurious_in_interval", result.count_nonspurious_in_interval},
      {"interior", result.count_interior},
      {"boundary", result.count_boundary},
  };
  j["timings"] = {
      {"steps_1_2", result.timings.steps_1_2}, {"step_3", result.timings.step_3},
      {"step_4", result.timings.step_4},       {"step_5", result.timings.step_5},
      {"postprocess", result.timings.postprocess}, {"total", result.timings.total()},
  };
  if (result.residuals.calibration_index) {
    j["residual_calibration"] = {{"index", *result.residuals.calibration_index},
                                 {"mu", *result.residuals.mu}};
  }
  auto triplets = nlohmann::json::array();
  for (Index i = 0; i < result.triplets.count(); ++i) {
    nlohmann::json t = {
        {"sigma", result.triplets.sigma(i)},
        {"in_interval", static_cast<bool>(result.triplets.in_interval[i])},
        {"spurious", static_cast<bool>(result.verdict.spurious[i])},
        {"tau", result.verdict.tau(i)},
        {"residual_estimated", result.residuals.estimated.size() > i ? result.residuals.estimated(i)
                                                                     : Scalar(0)},
        {"galerkin", result.galerkin.size() > i ? result.galerkin(i) : Scalar(0)},
    };
    if (result.residuals.exact) t["residual_exact"] = (*result.residuals.exact)(i);
    triplets.push_back(std::move(t));
  }
  j["triplets"] = std::move(triplets);
  if (accuracy) {
    j["accuracy"] = {
        {"max_rel_error_nonspurious", accuracy->max_rel_error_nonspurious},
        {"median_rel_error_nonspurious", accuracy->median_rel_error_nonspurious},
        {"max_rel_error_all", accuracy->max_rel_error_all},
        {"median_rel_error_all", accuracy->median_rel_error_all},
    };
  }
  return j;
}

template <typename Scalar>
void write_report_json(const std::string& path, const RunConfig<Scalar>& config,
                       const RunResult<Scalar>& result,
                       const std::optional<AccuracyStats<Scalar>>& accuracy = {}) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_report_json: cannot open " + path);
  out << result_to_json(config, result, accuracy).dump(2) << "\n";
}

template <typename Scalar>
void write_triplets_csv(const std::string& path, const RunResult<Scalar>& result) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_triplets_csv: cannot open " + path);
  out << std::setprecision(17);
  out << "index,sigma,in_interval,spurious,tau,residual_exact,residual_estimated,galerkin\n";
  for (Index i = 0; i < result.triplets.count(); ++i) {
    out << i << "," << result.triplets.sigma(i) << "," << int(result.triplets.in_interval[i])
        << "," << int(result.verdict.spurious[i]) << "," << result.verdict.tau(i) << ",";
    if (result.residuals.exact) out << (*result.residuals.exact)(i);
    out << "," << (result.residuals.estimated.size() > i ? result.residuals.estimated(i) : Scalar(0))
        << "," << (result.galerkin.size() > i ? result.galerkin(i) : Scalar(0)) << "\n";
  }
}

template <typename Scalar>
void write_filter_csv(const std::string& path, const ContourRule<Scalar>& rule,
                      const FilterProfile<Scalar>& profile) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_filter_csv: cannot open " + path);
  out << std::setprecision(17);
  out << "# interval=[" << rule.interval_a() << "," << rule.interval_b() << "]"
      << " transform=" << to_string(rule.transform().kind()) << " N=" << rule.count()
      << " alpha=" << rule.aspect() << " center=" << rule.center() << " radius=" << rule.radius()
      << "\n";
  out << "sigma,abs_f\n";
  for (size_t i = 0; i < profile.grid.size(); ++i)
    out << profile.grid[i] << "," << profile.values[i] << "\n";
}

}  // namespace sssvd
