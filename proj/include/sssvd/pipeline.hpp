#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sssvd/contour.hpp"
#include "sssvd/core.hpp"
#include "sssvd/extract.hpp"
#include "sssvd/moments.hpp"
#include "sssvd/postprocess.hpp"
#include "sssvd/problem.hpp"
#include "sssvd/shifted_solver.hpp"
#include "sssvd/transform.hpp"

namespace sssvd {

enum class SolveMode { SsSvd, SsSvdNT, Naive, NaiveNT };

inline const char* to_string(SolveMode mode) {
  switch (mode) {
    case SolveMode::SsSvd: return "ss-svd";
    case SolveMode::SsSvdNT: return "ss-svd-nt";
    case SolveMode::Naive: return "naive";
    case SolveMode::NaiveNT: return "naive-nt";
  }
  return "?";
}

inline bool uses_exp_transform(SolveMode mode) {
  return mode == SolveMode::SsSvdNT || mode == SolveMode::NaiveNT;
}
inline bool uses_naive_route(SolveMode mode) {
  return mode == SolveMode::Naive || mode == SolveMode::NaiveNT;
}

template <typename Scalar = double>
struct RunConfig {
  Scalar interval_a = Scalar(0);
  Scalar interval_b = Scalar(1);
  SolveMode mode = SolveMode::SsSvd;
  Scalar aspect = Scalar(0.1);
  SsParams<Scalar> params;
  int threads = 0;  // 0: SSSVD_THREADS env or hardware
  Scalar estimator_rcond_identity = Scalar(kEstimatorRcondIdentity);
  Scalar estimator_rcond_exp = Scalar(kEstimatorRcondExp);

  SpectralTransform<Scalar> transform() const {
    return uses_exp_transform(mode) ? SpectralTransform<Scalar>::exponential()
                                    : SpectralTransform<Scalar>::identity();
  }
};

/// Wall-clock per step group, matching the algorithm's step numbering:
/// steps 1-2 = shifted solves (factorizations included), step 3 =
/// low-rank truncation, step 4 = QR of A U_S1, step 5 = small SVD and
/// assembly. Residual estimation and spurious detection are outside the
/// algorithm proper and tracked separately.
struct StepTimings {
  double steps_1_2 = 0;
  double step_3 = 0;
  double step_4 = 0;
  double step_5 = 0;
  double postprocess = 0;
  double total() const { return steps_1_2 + step_3 + step_4 + step_5; }
};

template <typename Scalar = double>
struct RunResult {
  TripletSet<Scalar> triplets;  // user orientation
  SpuriousVerdict<Scalar> verdict;
  ResidualReport<Scalar> residuals;
  Vector<Scalar> galerkin;  // ||A v_i - sigma_i u_i|| per triplet, user orientation
  ReducedBasis<Scalar> basis;
  MomentBlocks<Scalar> blocks;
  std::optional<Matrix<Scalar>> left_projection_basis;  // Utilde (two-sided route)
  bool rank_deficient_qr = false;
  StepTimings timings;
  bool empty = false;            // filter annihilated the subspace
  std::string note;
  bool input_transposed = false;

  Index count_in_interval = 0;
  Index count_nonspurious_in_interval = 0;
  Index count_interior = 0;  // strictly inside the contour's real-axis extent
  Index count_boundary = 0;  // at an interval endpoint within 1e-9 relative

  Index retained_rank() const { return basis.rank(); }
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename Scalar>
bool near_endpoint(Scalar sigma, Scalar endpoint) {
  return std::abs(sigma - endpoint) <= Scalar(1e-9) * std::max(std::abs(endpoint), sigma);
}

}  // namespace detail

/// Full pipeline: contour -> (ell-1) refinements -> moment blocks ->
/// low-rank basis -> extraction -> spurious detection -> residuals.
template <typename Scalar>
RunResult<Scalar> run_solve(const ProblemMatrix<Scalar>& a, const RunConfig<Scalar>& config) {
  using Clock = std::chrono::steady_clock;
  config.params.validate(a.cols());
  const auto transform = config.transform();
  const ContourRule<Scalar> rule(config.interval_a, config.interval_b,
                                 config.params.quadrature_count, config.aspect, transform);

  RunResult<Scalar> result;
  result.input_transposed = a.transposed();

  // steps 1-2: Gram, factorizations, refinement + moment solves
  auto t0 = Clock::now();
  const Matrix<Scalar> gram = form_gram(a);
  const DenseShiftedSolver<Scalar> backend(gram);
  const MomentAccumulator<Scalar> accumulator(backend, rule, config.threads);
  Matrix<Scalar> block =
      random_start<Scalar>(a.cols(), config.params.block_size, config.params.seed);
  const Scalar starting_norm = block.norm();
  for (Index nu = 1; nu < config.params.refinement_steps; ++nu)
    block = accumulator.refine(block);
  result.blocks = accumulator.accumulate(block, config.params.moment_degree);
  result.timings.steps_1_2 = detail::seconds_since(t0);

  // step 3: thresholded low-rank basis. The quadrature never returns an
  // exactly zero block, so a filter-annihilated run is recognized by its
  // norm: in-interval spectrum keeps ||S|| on the order of the starting
  // block (plateau gain ~1), while an empty interval leaves only the
  // exterior decay, many orders below.
  t0 = Clock::now();
  const Matrix<Scalar> stacked = result.blocks.stacked();
  if (stacked.norm() <= Scalar(1e-12) * starting_norm) {
    result.empty = true;
    result.note = "filter annihilated the starting block: no singular values inside the interval";
    result.timings.step_3 = detail::seconds_since(t0);
    return result;
  }
  try {
    result.basis = low_rank<Scalar>(stacked, config.params.lowrank_threshold);
  } catch (const EmptySubspaceError&) {
    result.empty = true;
    result.note = "filter annihilated the starting block: no singular values inside the interval";
    result.timings.step_3 = detail::seconds_since(t0);
    return result;
  }
  result.timings.step_3 = detail::seconds_since(t0);

  // steps 4-5: extraction
  if (!uses_naive_route(config.mode)) {
    t0 = Clock::now();
    const ProjectedFactor<Scalar> projected = project_qr(a, result.basis);
    result.timings.step_4 = detail::seconds_since(t0);

    t0 = Clock::now();
    const SmallSvd<Scalar> small = svd_small<Scalar>(projected.triangular);
    result.triplets = assemble_triplets(projected, result.basis, small, config.interval_a,
                                        config.interval_b);
    result.timings.step_5 = detail::seconds_since(t0);
    result.rank_deficient_qr = projected.rank_deficient;
    result.left_projection_basis = projected.orthonormal;
  } else {
    t0 = Clock::now();
    result.triplets =
        naive_eigen_route(a, gram, result.basis, config.interval_a, config.interval_b);
    result.timings.step_5 = detail::seconds_since(t0);
  }

  // postprocess: spurious detection + residual estimates (+ exact, for the report)
  t0 = Clock::now();
  result.verdict =
      detect_spurious(result.triplets, result.basis.singular_values, config.params.spurious_threshold);
  if (uses_exp_transform(config.mode)) {
    try {
      result.residuals = estimate_residual_nonlinear(result.blocks, result.basis, result.triplets,
                                                     a, transform, result.verdict,
                                                     config.estimator_rcond_exp);
    } catch (const NumericalError&) {
      result.residuals.estimated = Vector<Scalar>::Constant(
          result.triplets.count(), std::numeric_limits<Scalar>::quiet_NaN());
      result.note = "nonlinear residual calibration impossible: all candidates spurious";
    }
  } else {
    result.residuals.estimated = estimate_residual_linear(
        result.blocks, result.basis, result.triplets, config.estimator_rcond_identity);
  }
  result.residuals.exact = exact_residual(a, result.triplets);
  // keep the report self-consistent: at the calibration triplet the
  // estimate IS the exact residual (mu cancels)
  if (result.residuals.calibration_index)
    result.residuals.estimated(*result.residuals.calibration_index) =
        (*result.residuals.exact)(*result.residuals.calibration_index);
  result.galerkin.resize(result.triplets.count());
  {
    const Matrix<Scalar> av = a.apply(result.triplets.right);
    for (Index i = 0; i < result.triplets.count(); ++i)
      result.galerkin(i) = (av.col(i) - result.triplets.sigma(i) * result.triplets.left.col(i)).norm();
  }
  result.timings.postprocess = detail::seconds_since(t0);

  // user orientation: internally the operator is stored rows >= cols;
  // undo the transposition by swapping the vector blocks. The reported
  // residual/Galerkin columns swap roles with it.
  if (a.transposed()) {
    std::swap(result.triplets.left, result.triplets.right);
    if (result.residuals.exact) std::swap(*result.residuals.exact, result.galerkin);
  }

  for (Index i = 0; i < result.triplets.count(); ++i) {
    if (!result.triplets.in_interval[i]) continue;
    ++result.count_in_interval;
    if (!result.verdict.spurious[i]) ++result.count_nonspurious_in_interval;
    const bool boundary = detail::near_endpoint(result.triplets.sigma(i), config.interval_a) ||
                          detail::near_endpoint(result.triplets.sigma(i), config.interval_b);
    if (boundary)
      ++result.count_boundary;
    else
      ++result.count_interior;
  }
  return result;
}

/// Accuracy of a triplet set against known singular values: each
/// candidate is matched to the nearest truth value.
template <typename Scalar = double>
struct AccuracyStats {
  Scalar max_rel_error_nonspurious = 0;
  Scalar median_rel_error_nonspurious = 0;
  Scalar max_rel_error_all = 0;
  Scalar median_rel_error_all = 0;  // over all in-interval candidates
  Index matched_nonspurious = 0;
  Index matched_all = 0;
};

template <typename Scalar>
AccuracyStats<Scalar> accuracy_vs_truth(const Vector<Scalar>& truth_sigma,
                                        const RunResult<Scalar>& result) {
  std::vector<Scalar> rel_all, rel_ns;
  for (Index i = 0; i < result.triplets.count(); ++i) {
    if (!result.triplets.in_interval[i]) continue;
    const Scalar s = result.triplets.sigma(i);
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (Index j = 0; j < truth_sigma.size(); ++j)
      best = std::min(best, std::abs(truth_sigma(j) - s) / truth_sigma(j));
    rel_all.push_back(best);
    if (!result.verdict.spurious[i]) rel_ns.push_back(best);
  }
  auto median = [](std::vector<Scalar> v) -> Scalar {
    if (v.empty()) return Scalar(0);
    std::sort(v.begin(), v.end());
    const size_t mid = v.size() / 2;
    return v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / Scalar(2);
  };
  AccuracyStats<Scalar> stats;
  stats.matched_all = static_cast<Index>(rel_all.size());
  stats.matched_nonspurious = static_cast<Index>(rel_ns.size());
  stats.max_rel_error_all = rel_all.empty() ? Scalar(0) : *std::max_element(rel_all.begin(), rel_all.end());
  stats.max_rel_error_nonspurious =
      rel_ns.empty() ? Scalar(0) : *std::max_element(rel_ns.begin(), rel_ns.end());
  stats.median_rel_error_all = median(rel_all);
  stats.median_rel_error_nonspurious = median(rel_ns);
  return stats;
}

}  // namespace sssvd
