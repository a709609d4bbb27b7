// Command-line front end: partial SVD on a user interval via contour
// integration, plus filter profiling, model-problem generation, a timing
// benchmark and a verification harness.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <string>

#include "sssvd/bench.hpp"
#include "sssvd/matrix_market.hpp"
#include "sssvd/oracle.hpp"
#include "sssvd/pipeline.hpp"
#include "sssvd/problems.hpp"
#include "sssvd/report_io.hpp"

namespace {

using Scalar = double;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct SolveOptions {
  int model = 0;  // 0: read from --input
  std::string input;
  std::uint64_t model_seed = 7;
  Scalar a = 0, b = 0;
  std::string mode = "ss-svd";
  sssvd::SsParams<Scalar> params;
  Scalar aspect = 0.1;
  int threads = 0;
  bool normalize = false;
  long auto_l = 0;
  std::string out = "sssvd";
  Scalar est_rcond_identity = sssvd::kEstimatorRcondIdentity;
  Scalar est_rcond_exp = sssvd::kEstimatorRcondExp;
};

sssvd::SolveMode parse_mode(const std::string& mode) {
  if (mode == "ss-svd") return sssvd::SolveMode::SsSvd;
  if (mode == "ss-svd-nt") return sssvd::SolveMode::SsSvdNT;
  if (mode == "naive") return sssvd::SolveMode::Naive;
  if (mode == "naive-nt") return sssvd::SolveMode::NaiveNT;
  throw CLI::ValidationError("--mode", "unknown mode " + mode);
}

void add_param_flags(CLI::App* cmd, SolveOptions& opt) {
  cmd->add_option("--L", opt.params.block_size, "block size L");
  cmd->add_option("--M", opt.params.moment_degree, "moment degree M");
  cmd->add_option("--N", opt.params.quadrature_count, "quadrature points N (even)");
  cmd->add_option("--ell", opt.params.refinement_steps, "refinement iterations");
  cmd->add_option("--delta", opt.params.lowrank_threshold, "low-rank threshold (relative)");
  cmd->add_option("--eps", opt.params.spurious_threshold, "spurious threshold (relative)");
  cmd->add_option("--alpha", opt.aspect, "contour aspect ratio");
  cmd->add_option("--seed", opt.params.seed, "starting-block PRNG seed");
  cmd->add_option("--threads", opt.threads, "worker threads (0: SSSVD_THREADS or cores)");
  cmd->add_option("--est-rcond-identity", opt.est_rcond_identity,
                  "noise cutoff in the identity residual estimator");
  cmd->add_option("--est-rcond-exp", opt.est_rcond_exp,
                  "noise cutoff in the nonlinear residual estimator");
}

void add_input_flags(CLI::App* cmd, SolveOptions& opt) {
  cmd->add_option("--model", opt.model, "model problem (1 or 2)")->check(CLI::Range(1, 2));
  cmd->add_option("--input", opt.input, "Matrix Market file (.mtx)");
  cmd->add_option("--model-seed", opt.model_seed, "model-problem factor seed");
  cmd->add_option("--interval", [&opt](const CLI::results_t& res) {
        opt.a = std::stod(res.at(0));
        opt.b = std::stod(res.at(1));
        return true;
      },
      "target interval a b")->expected(2);
}

struct LoadedProblem {
  sssvd::ProblemMatrix<Scalar> matrix;
  std::optional<sssvd::Vector<Scalar>> truth;
  std::string source;
  Scalar normalized_scale = 0;  // 0: not normalized
};

LoadedProblem load_problem(SolveOptions& opt) {
  if ((opt.model == 0) == opt.input.empty())
    throw CLI::ValidationError("input", "give exactly one of --model or --input");
  if (opt.model != 0) {
    sssvd::ModelSpec<Scalar> spec;
    spec.which = opt.model == 1 ? sssvd::ModelKind::Model1 : sssvd::ModelKind::Model2;
    spec.seed = opt.model_seed;
    auto problem = sssvd::build_model(spec);
    return {std::move(problem.matrix), std::move(problem.sigma),
            "model" + std::to_string(opt.model), 0};
  }
  LoadedProblem loaded{sssvd::read_matrix_market<Scalar>(opt.input), std::nullopt, opt.input, 0};
  if (opt.normalize) {
    auto normalized = sssvd::normalize_spectrum(std::move(loaded.matrix));
    loaded.matrix = std::move(normalized.matrix);
    loaded.normalized_scale = normalized.scale;
  }
  return loaded;
}

sssvd::RunConfig<Scalar> make_config(const SolveOptions& opt) {
  sssvd::RunConfig<Scalar> config;
  config.interval_a = opt.a;
  config.interval_b = opt.b;
  config.mode = parse_mode(opt.mode);
  config.aspect = opt.aspect;
  config.params = opt.params;
  config.threads = opt.threads;
  config.estimator_rcond_identity = opt.est_rcond_identity;
  config.estimator_rcond_exp = opt.est_rcond_exp;
  return config;
}

int cmd_solve(SolveOptions& opt) {
  if (opt.auto_l > 0) {
    // LM ~ 3t heuristic at fixed M = 4
    opt.params.moment_degree = 4;
    opt.params.block_size = std::max<sssvd::Index>(
        1, static_cast<sssvd::Index>(std::lround(3.0 * opt.auto_l / 4.0)));
  }
  LoadedProblem loaded = load_problem(opt);
  sssvd::RunConfig<Scalar> config = make_config(opt);
  const auto result = sssvd::run_solve(loaded.matrix, config);

  std::optional<sssvd::AccuracyStats<Scalar>> accuracy;
  if (loaded.truth) accuracy = sssvd::accuracy_vs_truth(*loaded.truth, result);

  auto j = sssvd::result_to_json(config, result, accuracy);
  j["matrix"] = {{"rows", loaded.matrix.transposed() ? loaded.matrix.cols() : loaded.matrix.rows()},
                 {"cols", loaded.matrix.transposed() ? loaded.matrix.rows() : loaded.matrix.cols()},
                 {"source", loaded.source}};
  if (loaded.normalized_scale != 0) j["matrix"]["normalized_scale"] = loaded.normalized_scale;
  {
    std::ofstream out(opt.out + ".report.json");
    if (!out) throw std::runtime_error("cannot open " + opt.out + ".report.json");
    out << j.dump(2) << "\n";
  }
  sssvd::write_triplets_csv(opt.out + ".triplets.csv", result);

  std::cout << "candidates " << result.triplets.count() << ", in-interval "
            << result.count_in_interval << ", non-spurious in-interval "
            << result.count_nonspurious_in_interval << " (interior " << result.count_interior
            << ", boundary " << result.count_boundary << ")\n";
  if (accuracy)
    std::cout << "max relative error (non-spurious, vs exact spectrum) "
              << accuracy->max_rel_error_nonspurious << "\n";
  if (!result.note.empty()) std::cout << "note: " << result.note << "\n";
  std::cout << "timings [s]: steps 1-2 " << result.timings.steps_1_2 << ", step 3 "
            << result.timings.step_3 << ", step 4 " << result.timings.step_4 << ", step 5 "
            << result.timings.step_5 << ", total " << result.timings.total() << "\n";
  std::cout << "report written to " << opt.out << ".report.json\n";
  return 0;
}

int cmd_model(int which, sssvd::Index rows, sssvd::Index cols, std::uint64_t seed,
              const std::string& out) {
  sssvd::ModelSpec<Scalar> spec;
  spec.which = which == 1 ? sssvd::ModelKind::Model1 : sssvd::ModelKind::Model2;
  spec.rows = rows;
  spec.cols = cols;
  spec.seed = seed;
  const auto problem = sssvd::build_model(spec);
  sssvd::write_matrix_market(out + ".mtx", problem.matrix,
                             "model " + std::to_string(which) + " seed " + std::to_string(seed));
  std::ofstream truth(out + ".truth.csv");
  truth << std::setprecision(17) << "index,sigma\n";
  for (sssvd::Index i = 0; i < problem.sigma.size(); ++i)
    truth << i << "," << problem.sigma(i) << "\n";
  std::cout << "wrote " << out << ".mtx and " << out << ".truth.csv\n";
  return 0;
}

int cmd_filter_plot(Scalar a, Scalar b, const std::string& transform, sssvd::Index n,
                    Scalar aspect, Scalar sigma_min, Scalar sigma_max, sssvd::Index points,
                    bool log_spacing, const std::string& out) {
  const auto tf = transform == "exp" ? sssvd::SpectralTransform<Scalar>::exponential()
                                     : sssvd::SpectralTransform<Scalar>::identity();
  const sssvd::ContourRule<Scalar> rule(a, b, n, aspect, tf);
  if (sigma_min <= 0) sigma_min = a > 0 ? a / 100 : b / 1000;
  if (sigma_max <= 0) sigma_max = b * 10;
  const auto profile = sssvd::filter_profile(rule, sigma_min, sigma_max, points, log_spacing);
  sssvd::write_filter_csv(out + ".filter.csv", rule, profile);
  std::cout << "wrote " << out << ".filter.csv (" << profile.grid.size() << " points)\n";
  return 0;
}

int cmd_bench(int threads, bool skip_scaling, std::uint64_t model_seed, std::uint64_t vin_seed,
              const std::string& out) {
  const auto rows = sssvd::run_default_bench<Scalar>(threads, !skip_scaling, model_seed, vin_seed);
  sssvd::write_bench_csv(out + ".bench.csv", rows);
  std::ofstream js(out + ".bench.json");
  js << sssvd::bench_to_json(rows).dump(2) << "\n";
  std::cout << std::left << std::setw(22) << "label" << std::right << std::setw(11) << "steps 1-2"
            << std::setw(9) << "3" << std::setw(9) << "4" << std::setw(9) << "5" << std::setw(10)
            << "total" << std::setw(6) << "t" << std::setw(12) << "error" << std::setw(12)
            << "residual" << "\n";
  for (const auto& r : rows) {
    if (!r.ok()) {
      std::cout << std::left << std::setw(22) << r.label << "FAILED: " << r.error << "\n";
      continue;
    }
    std::cout << std::left << std::setw(22) << r.label << std::right << std::fixed
              << std::setprecision(3) << std::setw(11) << r.timings.steps_1_2 << std::setw(9)
              << r.timings.step_3 << std::setw(9) << r.timings.step_4 << std::setw(9)
              << r.timings.step_5 << std::setw(10) << r.timings.total() << std::setw(6) << r.t_hat
              << std::scientific << std::setprecision(2) << std::setw(12) << r.max_rel_error
              << std::setw(12) << r.max_residual << "\n"
              << std::defaultfloat;
  }
  std::cout << "wrote " << out << ".bench.csv and " << out << ".bench.json\n";
  return 0;
}

int cmd_verify(SolveOptions& opt, Scalar inject_noise) {
  LoadedProblem loaded = load_problem(opt);
  if (loaded.matrix.cols() > 2000) {
    std::cout << "verify: oracle cap exceeded (n > 2000), skipped\n";
    return 0;
  }
  sssvd::RunConfig<Scalar> config = make_config(opt);
  auto result = sssvd::run_solve(loaded.matrix, config);
  const auto oracle = sssvd::jacobi_svd(loaded.matrix);

  int failures = 0;
  auto check = [&](const std::string& name, bool ok, Scalar measured, Scalar bound) {
    std::cout << (ok ? "PASS" : "FAIL") << "  " << name << "  (measured " << std::scientific
              << std::setprecision(3) << measured << ", bound " << bound << ")\n"
              << std::defaultfloat;
    if (!ok) ++failures;
  };

  const auto dense = loaded.matrix.to_dense();
  const Scalar norm_a = oracle.sigma(0);
  const Scalar recon =
      (dense - oracle.left * oracle.sigma.asDiagonal() * oracle.right.transpose()).norm() /
      dense.norm();
  check("oracle reconstruction", recon <= 1e-12, recon, 1e-12);
  const Scalar orth_u =
      (oracle.left.transpose() * oracle.left - sssvd::Matrix<Scalar>::Identity(oracle.left.cols(), oracle.left.cols()))
          .norm();
  check("oracle left orthonormality", orth_u <= 1e-12, orth_u, 1e-12);

  if (inject_noise > 0) {
    std::mt19937_64 gen(12345);
    std::normal_distribution<Scalar> dist;
    for (sssvd::Index j = 0; j < result.triplets.left.cols(); ++j) {
      for (sssvd::Index i = 0; i < result.triplets.left.rows(); ++i)
        result.triplets.left(i, j) += inject_noise * dist(gen);
    }
  }
  Scalar worst_galerkin = 0;
  {
    const auto av = loaded.matrix.apply(result.triplets.right);
    for (sssvd::Index i = 0; i < result.triplets.count(); ++i)
      worst_galerkin = std::max(
          worst_galerkin, (av.col(i) - result.triplets.sigma(i) * result.triplets.left.col(i)).norm());
  }
  check("Galerkin identity", worst_galerkin <= 1e-10 * norm_a, worst_galerkin, 1e-10 * norm_a);

  if (!sssvd::uses_exp_transform(config.mode) && !result.empty) {
    const auto gram = sssvd::form_gram(loaded.matrix);
    sssvd::Matrix<Scalar> power = result.blocks.blocks[0];
    Scalar worst = 0;
    for (sssvd::Index k = 1; k < config.params.moment_degree; ++k) {
      power = (gram * power).eval();
      worst = std::max(worst, (result.blocks.blocks[k] - power).norm() / power.norm());
    }
    check("moment identity S_k = G^k S_0", worst <= 1e-8, worst, 1e-8);

    const auto v_in = sssvd::random_start<Scalar>(loaded.matrix.cols(), config.params.block_size,
                                                  config.params.seed);
    const sssvd::ContourRule<Scalar> rule(config.interval_a, config.interval_b,
                                          config.params.quadrature_count, config.aspect,
                                          config.transform());
    if (result.left_projection_basis && config.params.subspace_dim() < loaded.matrix.cols()) {
      const auto report = sssvd::error_bound_report(
          loaded.matrix, rule, config.params.block_size, config.params.moment_degree,
          config.params.refinement_steps, v_in, oracle, result.basis.left,
          *result.left_projection_basis);
      if (!report.conclusive) {
        std::cout << "SKIP  subspace error bound (P_LM K rank-deficient, theorem precondition "
                     "fails)\n";
      } else {
        Scalar worst_excess = 0;
        for (const auto& row : report.rows) {
          if (!row.in_interval) continue;
          const Scalar bound_v = row.beta * row.ratio * (1 + 1e-6) + 1e-12;
          const Scalar bound_u = row.alpha * row.beta * row.ratio * (1 + 1e-6) + 1e-12;
          worst_excess = std::max({worst_excess, row.lhs_v - bound_v, row.lhs_u - bound_u});
        }
        check("subspace error bound", worst_excess <= 0, worst_excess, 0);
      }
    }
  }
  std::cout << (failures == 0 ? "verify: all checks passed\n"
                              : "verify: " + std::to_string(failures) + " check(s) failed\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partial SVD of a real rectangular matrix on a target interval [a,b]\n"
               "via complex-moment contour integration"};
  app.require_subcommand(1);

  SolveOptions solve_opt;
  auto* solve = app.add_subcommand("solve", "compute singular triplets with sigma in [a,b]");
  add_input_flags(solve, solve_opt);
  add_param_flags(solve, solve_opt);
  solve->add_option("--mode", solve_opt.mode, "ss-svd | ss-svd-nt | naive | naive-nt");
  solve->add_flag("--normalize", solve_opt.normalize, "rescale so sigma_max ~ 1");
  solve->add_option("--auto-L", solve_opt.auto_l,
                    "choose L from a target triplet count (LM ~ 3t, M fixed at 4)");
  solve->add_option("--out", solve_opt.out, "output prefix");

  int model_which = 1;
  sssvd::Index model_rows = 1000, model_cols = 200;
  std::uint64_t model_seed = 7;
  std::string model_out = "model";
  auto* model = app.add_subcommand("model", "generate a model problem as .mtx + truth csv");
  model->add_option("--which", model_which, "model 1 or 2")->check(CLI::Range(1, 2));
  model->add_option("--rows", model_rows, "rows (default 1000)");
  model->add_option("--cols", model_cols, "cols (default 200)");
  model->add_option("--model-seed", model_seed, "factor seed");
  model->add_option("--out", model_out, "output prefix");

  Scalar fp_a = 0.8, fp_b = 1.2, fp_aspect = 0.1, fp_smin = 0, fp_smax = 0;
  sssvd::Index fp_n = 32, fp_points = 200;
  bool fp_log = false;
  std::string fp_transform = "identity", fp_out = "filter";
  auto* fplot = app.add_subcommand("filter-plot", "tabulate |f(sigma)| over a sigma grid");
  fplot->add_option("--interval", [&](const CLI::results_t& res) {
           fp_a = std::stod(res.at(0));
           fp_b = std::stod(res.at(1));
           return true;
         },
         "target interval a b")->expected(2);
  fplot->add_option("--transform", fp_transform, "identity | exp");
  fplot->add_option("--N", fp_n, "quadrature points");
  fplot->add_option("--alpha", fp_aspect, "contour aspect ratio");
  fplot->add_option("--sigma-min", fp_smin, "grid start (default a/100)");
  fplot->add_option("--sigma-max", fp_smax, "grid end (default 10b)");
  fplot->add_option("--points", fp_points, "grid size");
  fplot->add_flag("--log", fp_log, "log-spaced grid");
  fplot->add_option("--out", fp_out, "output prefix");

  int bench_threads = 0;
  bool bench_no_scaling = false;
  std::uint64_t bench_mseed = 7, bench_vseed = 42;
  std::string bench_out = "sssvd";
  auto* bench = app.add_subcommand("bench", "timing table over models and modes");
  bench->add_option("--threads", bench_threads, "worker threads");
  bench->add_flag("--no-scaling", bench_no_scaling, "skip the L-scaling sweep");
  bench->add_option("--model-seed", bench_mseed, "model factor seed");
  bench->add_option("--seed", bench_vseed, "starting-block seed");
  bench->add_option("--out", bench_out, "output prefix");

  SolveOptions verify_opt;
  Scalar inject_noise = 0;
  auto* verify = app.add_subcommand("verify", "oracle-based invariant checks, nonzero exit on failure");
  add_input_flags(verify, verify_opt);
  add_param_flags(verify, verify_opt);
  verify->add_option("--mode", verify_opt.mode, "extraction mode");
  verify->add_option("--inject-noise", inject_noise,
                     "test hook: corrupt the computed left vectors before checking");

  // model-problem default intervals when none given
  solve_opt.a = verify_opt.a = 0.8;
  solve_opt.b = verify_opt.b = 1.2;

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) return cmd_solve(solve_opt);
    if (*model) return cmd_model(model_which, model_rows, model_cols, model_seed, model_out);
    if (*fplot)
      return cmd_filter_plot(fp_a, fp_b, fp_transform, fp_n, fp_aspect, fp_smin, fp_smax,
                             fp_points, fp_log, fp_out);
    if (*bench)
      return cmd_bench(bench_threads, bench_no_scaling, bench_mseed, bench_vseed, bench_out);
    if (*verify) return cmd_verify(verify_opt, inject_noise);
  } catch (const sssvd::NumericalError& ex) {
    std::cerr << "numerical failure: " << ex.what() << "\n";
    return kExitNumerical;
  } catch (const sssvd::MatrixMarketError& ex) {
    std::cerr << "input error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& ex) {
    std::cerr << "configuration error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& ex) {
    std::cerr << "configuration error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const std::length_error& ex) {
    std::cerr << "configuration error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
