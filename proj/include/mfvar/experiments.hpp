#ifndef MFVAR_EXPERIMENTS_HPP
#define MFVAR_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mfvar/core.hpp"
#include "mfvar/meanfield.hpp"

namespace mfvar {

struct ConvergenceRow {
  int num_agents = 0;
  double w1_initial = 0.0;  // W1(mu_N^0, mu^0)
  double cost_n = 0.0;
  double cost_limit = 0.0;
  double abs_error = 0.0;
};

struct ConvergenceOptions {
  std::size_t limit_particles = 100000;
  double step_dt = 1e-3;
};

/// Finite-agent cost of the closed-loop controls u_i(t) = u(t, x_i(t)) on the
/// initial grid, with trajectories from RK4 and trapezoidal running cost.
CostBreakdown closed_loop_discrete_cost(const ProblemParams& params,
                                        const FeedbackField& field, double step_dt);

/// Rows sorted by N. Rejects fields that are not Lipschitz in space.
std::vector<ConvergenceRow> convergence_study(const ProblemParams& base,
                                              std::span<const int> n_list,
                                              const FeedbackField& field,
                                              const ConvergenceOptions& options = {});

/// Least-squares slope p of log(error) = c - p log(N).
double fitted_order(std::span<const ConvergenceRow> rows);

struct GronwallSample {
  int pair = 0;
  double t = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;  // lhs / rhs, 0 when both vanish
};

struct GronwallReport {
  double lipschitz = 0.0;
  double max_ratio = 0.0;
  std::vector<GronwallSample> samples;
};

/// Random empirical pairs (2..64 atoms uniform on [-1, 1]) from a seeded
/// mt19937_64, each checked at t = jT/5, j = 1..5.
GronwallReport gronwall_sweep(const FeedbackField& field, int num_pairs,
                              std::uint64_t rng_seed, double horizon,
                              double step_dt = 1e-3);

struct GapRow {
  double slope = 0.0;
  double cost_of_mollified = 0.0;
  double limit_cost = 0.0;
  double gap = 0.0;
};

struct GapScan {
  std::vector<GapRow> rows;
  /// p in gap ~ L^{-p}, fitted on the two largest slopes.
  double decay_exponent = 0.0;
  /// lim_{L -> inf} of the mollified cost from the last three slopes
  /// (Aitken extrapolation); nullopt with fewer than three slopes or a
  /// non-geometric tail.
  std::optional<double> extrapolated_limit;
};

/// T/2 - ((1 + T)^3 - T^3) / (6 lambda): cost of exact sign motion from
/// the uniform measure on [-1, 1].
double sign_motion_limit_cost(const ProblemParams& params);

/// Requires lambda in (0, T]. Rows sorted by slope.
GapScan lipschitz_gap_scan(const ProblemParams& params, std::span<const double> slopes,
                           std::size_t num_particles, double step_dt);

enum class Verdict { LipschitzMinimizerExists, NoLipschitzMinimizer };

struct DichotomyCell {
  double lambda = 0.0;
  double horizon = 0.0;
  Verdict verdict = Verdict::LipschitzMinimizerExists;
  /// Uniform-in-N bound on L(t); nullopt marks the N-divergent case where
  /// L(0) = N - 1.
  std::optional<double> witness_bound;
};

std::vector<DichotomyCell> dichotomy_map(std::span<const double> lambdas, double horizon);

}  // namespace mfvar

#endif  // MFVAR_EXPERIMENTS_HPP
