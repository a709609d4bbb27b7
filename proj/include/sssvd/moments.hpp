#pragma once

#include <Eigen/QR>
#include <Eigen/SVD>

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "sssvd/contour.hpp"
#include "sssvd/core.hpp"
#include "sssvd/parallel.hpp"
#include "sssvd/shifted_solver.hpp"

namespace sssvd {

/// Method parameters (block size L, moment degree M, quadrature count N,
/// refinement steps ell, low-rank threshold delta, spurious threshold
/// epsilon, PRNG seed for the starting block).
template <typename Scalar = double>
struct SsParams {
  Index block_size = 20;        // L
  Index moment_degree = 4;      // M
  Index quadrature_count = 32;  // N
  Index refinement_steps = 1;   // ell
  Scalar lowrank_threshold = Scalar(1e-20);   // delta, relative to sigma_max(S)
  Scalar spurious_threshold = Scalar(1e-8);   // epsilon, relative to max Sigma_S1
  std::uint64_t seed = 42;

  Index subspace_dim() const { return block_size * moment_degree; }

  void validate(Index n) const {
    if (block_size < 1 || moment_degree < 1 || quadrature_count < 4 || refinement_steps < 1)
      throw std::invalid_argument("SsParams: counts must be positive (N >= 4)");
    if (quadrature_count % 2 != 0)
      throw std::invalid_argument("SsParams: quadrature count must be even");
    if (subspace_dim() > n)
      throw std::invalid_argument("SsParams: L*M must not exceed the column count");
    if (!(lowrank_threshold > Scalar(0)) || !(lowrank_threshold < Scalar(1)))
      throw std::invalid_argument("SsParams: delta must lie in (0,1)");
    if (!(spurious_threshold > Scalar(0)))
      throw std::invalid_argument("SsParams: epsilon must be positive");
  }
};

/// Moment blocks S_k for k = 0..M. The extra k = M block feeds the
/// residual estimate; it reuses the factorizations of the same pass.
template <typename Scalar = double>
struct MomentBlocks {
  std::vector<Matrix<Scalar>> blocks;  // k = 0..M, each n x L

  Index degree() const { return static_cast<Index>(blocks.size()) - 1; }
  Index rows() const { return blocks.empty() ? 0 : blocks.front().rows(); }
  Index block_size() const { return blocks.empty() ? 0 : blocks.front().cols(); }

  /// [S_0, ..., S_{M-1}], n x (L*M)
  Matrix<Scalar> stacked() const { return stack(0, degree()); }
  /// [S_1, ..., S_M], n x (L*M)
  Matrix<Scalar> stacked_plus() const { return stack(1, degree() + 1); }

 private:
  Matrix<Scalar> stack(Index from, Index to) const {
    const Index n = rows(), L = block_size();
    Matrix<Scalar> out(n, (to - from) * L);
    for (Index k = from; k < to; ++k) out.middleCols((k - from) * L, L) = blocks[k];
    return out;
  }
};

/// Thresholded SVD factors of the stacked moment matrix.
template <typename Scalar = double>
struct ReducedBasis {
  Matrix<Scalar> left;             // U_S1, n x r, orthonormal columns
  Vector<Scalar> singular_values;  // Sigma_S1, positive nonincreasing
  Matrix<Scalar> right;            // W_S1, (L*M) x r, orthonormal columns
  Index rank() const { return singular_values.size(); }
};

/// Starting block V_in with i.i.d. uniform(-1,1) entries, reproducible
/// from the seed.
template <typename Scalar = double>
Matrix<Scalar> random_start(Index n, Index block_size, std::uint64_t seed) {
  if (n < block_size)
    throw std::invalid_argument("random_start: block size exceeds dimension");
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<Scalar> dist(Scalar(-1), Scalar(1));
  Matrix<Scalar> v(n, block_size);
  for (Index j = 0; j < block_size; ++j)
    for (Index i = 0; i < n; ++i) v(i, j) = dist(gen);
  return v;
}

/// Runs the per-node shifted solves behind the refinement and moment
/// passes. Factorizations are computed once per node and cached across
/// passes while they fit the memory budget; solves fan out to the worker
/// pool and contributions are reduced in ascending node order, so results
/// do not depend on the worker count.
template <typename Scalar = double, typename Backend = DenseShiftedSolver<Scalar>>
class MomentAccumulator {
 public:
  using Complex = std::complex<Scalar>;

  MomentAccumulator(const Backend& backend, const ContourRule<Scalar>& rule, int threads = 0,
                    std::size_t cache_budget_bytes = std::size_t(4) << 30)
      : backend_(backend), rule_(rule), threads_(resolve_thread_count(threads)) {
    const Index half = rule.count() / 2;
    cache_factors_ = half * backend.factor_bytes() <= cache_budget_bytes;
    if (cache_factors_) {
      cache_.resize(half);
      parallel_for(static_cast<int>(half), threads_,
                   [&](int j) { cache_[j].emplace(backend_.factor(rule_.shift(j))); });
    }
  }

  const ContourRule<Scalar>& rule() const { return rule_; }

  /// One refinement pass: 2 sum_j Re(w_j (g(t_j) I - G)^{-1} S0).
  Matrix<Scalar> refine(const Matrix<Scalar>& s0) const {
    auto solutions = solve_all(s0);
    const Index half = rule_.count() / 2;
    Matrix<Scalar> acc = Matrix<Scalar>::Zero(s0.rows(), s0.cols());
    for (Index j = 0; j < half; ++j)
      acc.noalias() += Scalar(2) * (rule_.weights()[j] * solutions[j].array()).real().matrix();
    return acc;
  }

  /// Moment pass: S_k = 2 sum_j Re(w_j t_j^k X_j) for k = 0..degree,
  /// with one solve per node shared by all k.
  MomentBlocks<Scalar> accumulate(const Matrix<Scalar>& s0,
                                  Index degree) const {
    auto solutions = solve_all(s0);
    const Index half = rule_.count() / 2;
    MomentBlocks<Scalar> out;
    out.blocks.assign(degree + 1, Matrix<Scalar>::Zero(s0.rows(), s0.cols()));
    std::vector<Complex> power(half, Complex(1));
    for (Index k = 0; k <= degree; ++k) {
      for (Index j = 0; j < half; ++j) {
        const Complex w = rule_.weights()[j] * power[j];
        out.blocks[k].noalias() += Scalar(2) * (w * solutions[j].array()).real().matrix();
        power[j] *= rule_.nodes()[j];
      }
    }
    return out;
  }

 private:
  std::vector<ComplexMatrix<Scalar>> solve_all(const Matrix<Scalar>& s0) const {
    const Index half = rule_.count() / 2;
    std::vector<ComplexMatrix<Scalar>> solutions(half);
    const ComplexMatrix<Scalar> rhs = s0.template cast<Complex>();
    parallel_for(static_cast<int>(half), threads_, [&](int j) {
      if (cache_factors_) {
        solutions[j] = cache_[j]->solve(rhs);
      } else {
        solutions[j] = backend_.factor(rule_.shift(j)).solve(rhs);
      }
    });
    return solutions;
  }

  const Backend& backend_;
  const ContourRule<Scalar>& rule_;
  int threads_;
  bool cache_factors_ = false;
  std::vector<std::optional<ShiftedFactorization<Scalar>>> cache_;
};

template <typename Scalar, typename Backend>
Matrix<Scalar> refine_s0(const Backend& backend, const ContourRule<Scalar>& rule,
                         const Matrix<Scalar>& s0, int threads = 0) {
  return MomentAccumulator<Scalar, Backend>(backend, rule, threads).refine(s0);
}

template <typename Scalar, typename Backend>
MomentBlocks<Scalar> build_moments(const Backend& backend, const ContourRule<Scalar>& rule,
                                   const Matrix<Scalar>& s0, Index degree,
                                   int threads = 0) {
  return MomentAccumulator<Scalar, Backend>(backend, rule, threads).accumulate(s0, degree);
}

/// Thresholded low-rank factors of the stacked moment matrix: keeps the
/// singular values >= delta * sigma_max(S). Computed as a thin QR
/// followed by a Jacobi SVD of the triangular factor: Jacobi does not
/// deflate roundoff-level singular values to zero, so a tiny delta
/// (1e-20 in the reference setup) retains the full direction set the
/// way the LAPACK-backed runs it reproduces do.
template <typename Scalar>
ReducedBasis<Scalar> low_rank(const Matrix<Scalar>& stacked, Scalar delta) {
  const Index cols = stacked.cols();
  Eigen::HouseholderQR<Matrix<Scalar>> qr(stacked);
  const Matrix<Scalar> thin_q =
      qr.householderQ() * Matrix<Scalar>::Identity(stacked.rows(), std::min(stacked.rows(), cols));
  const Matrix<Scalar> r_factor = qr.matrixQR()
                                      .topRows(std::min(stacked.rows(), cols))
                                      .template triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(r_factor, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv(0) > Scalar(0)))
    throw EmptySubspaceError(
        "low_rank: stacked moment matrix vanished (no spectrum inside the interval)");
  Index rank = 0;
  while (rank < sv.size() && sv(rank) >= delta * sv(0)) ++rank;
  ReducedBasis<Scalar> basis;
  basis.left = thin_q * svd.matrixU().leftCols(rank);
  basis.singular_values = sv.head(rank);
  basis.right = svd.matrixV().leftCols(rank);
  return basis;
}

}  // namespace sssvd
