#include "mfvar/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace mfvar {

CostBreakdown closed_loop_discrete_cost(const ProblemParams& params,
                                        const FeedbackField& field, double step_dt) {
  const auto x0 = initial_grid(params);
  const auto n = static_cast<double>(x0.size());
  std::vector<double> xT(x0.size());
  double energy = 0.0;
  for (std::size_t i = 0; i < x0.size(); ++i) {
    const Path path = integrate_flow(field, x0[i], step_dt, params.horizon());
    double prev = eval_field(field, path.times[0], path.positions[0]);
    for (std::size_t k = 1; k < path.times.size(); ++k) {
      const double u = eval_field(field, path.times[k], path.positions[k]);
      energy += 0.5 * (path.times[k] - path.times[k - 1]) * (prev * prev + u * u);
      prev = u;
    }
    xT[i] = path.positions.back();
  }
  const double running = energy / (2.0 * n);
  const double terminal = -variance(std::span<const double>(xT)) / (2.0 * params.lambda());
  return make_cost(running, terminal);
}

std::vector<ConvergenceRow> convergence_study(const ProblemParams& base,
                                              std::span<const int> n_list,
                                              const FeedbackField& field,
                                              const ConvergenceOptions& options) {
  if (!space_lipschitz(field, base.horizon())) {
    throw InvalidParameter("convergence study needs a field that is Lipschitz in space");
  }
  std::vector<int> ns(n_list.begin(), n_list.end());
  std::sort(ns.begin(), ns.end());
  ns.erase(std::unique(ns.begin(), ns.end()), ns.end());

  const Measure1D mu0 = UniformMeasure1D(-1.0, 1.0);
  FlowOptions flow;
  flow.num_particles = options.limit_particles;
  flow.step_dt = options.step_dt;
  const double limit = continuous_cost(base, field, mu0, flow).total;

  std::vector<ConvergenceRow> rows;
  for (int n : ns) {
    const ProblemParams params = base.with_agents(n);
    ConvergenceRow row;
    row.num_agents = n;
    row.w1_initial = wasserstein1(EmpiricalMeasure1D(initial_grid(params)), mu0);
    row.cost_n = closed_loop_discrete_cost(params, field, options.step_dt).total;
    row.cost_limit = limit;
    row.abs_error = std::abs(row.cost_n - limit);
    rows.push_back(row);
  }
  return rows;
}

double fitted_order(std::span<const ConvergenceRow> rows) {
  if (rows.size() < 2) throw InvalidParameter("need at least two rows to fit an order");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& r : rows) {
    if (!(r.abs_error > 0.0)) throw InvalidParameter("cannot fit a zero error");
    const double x = std::log(static_cast<double>(r.num_agents));
    const double y = std::log(r.abs_error);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(rows.size());
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

GronwallReport gronwall_sweep(const FeedbackField& field, int num_pairs,
                              std::uint64_t rng_seed, double horizon, double step_dt) {
  if (num_pairs < 1) throw InvalidParameter("need at least one pair");
  if (!(horizon > 0.0)) throw InvalidParameter("horizon must be positive");
  const auto lip = space_lipschitz(field, horizon);
  if (!lip) throw InvalidParameter("Gronwall sweep needs a Lipschitz field");

  GronwallReport report;
  report.lipschitz = *lip;
  std::mt19937_64 rng(rng_seed);
  std::uniform_int_distribution<int> atoms(2, 64);
  std::uniform_real_distribution<double> position(-1.0, 1.0);
  const auto draw = [&] {
    std::vector<double> xs(static_cast<std::size_t>(atoms(rng)));
    for (double& x : xs) x = position(rng);
    return Measure1D(EmpiricalMeasure1D(std::move(xs)));
  };

  FlowOptions opts;
  opts.horizon = horizon;
  opts.step_dt = step_dt;
  for (int j = 1; j <= 5; ++j) opts.snapshot_times.push_back(horizon * j / 5.0);

  for (int pair = 0; pair < num_pairs; ++pair) {
    const Measure1D mu = draw();
    const Measure1D nu = draw();
    const double w0 = wasserstein1(mu, nu);
    const FlowResult a = solve_continuity(field, mu, opts);
    const FlowResult b = solve_continuity(field, nu, opts);
    for (std::size_t s = 0; s < a.snapshot_times.size(); ++s) {
      GronwallSample sample;
      sample.pair = pair;
      sample.t = a.snapshot_times[s];
      sample.lhs = wasserstein1(Measure1D(a.snapshots[s]), Measure1D(b.snapshots[s]));
      sample.rhs = std::exp(report.lipschitz * sample.t) * w0;
      if (sample.rhs > 0.0) {
        sample.ratio = sample.lhs / sample.rhs;
      } else {
        sample.ratio = sample.lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
      }
      report.max_ratio = std::max(report.max_ratio, sample.ratio);
      report.samples.push_back(sample);
    }
  }
  return report;
}

double sign_motion_limit_cost(const ProblemParams& params) {
  const double T = params.horizon();
  return 0.5 * T - (std::pow(1.0 + T, 3) - std::pow(T, 3)) / (6.0 * params.lambda());
}

GapScan lipschitz_gap_scan(const ProblemParams& params, std::span<const double> slopes,
                           std::size_t num_particles, double step_dt) {
  const Regime regime = classify_regime(params);
  if (regime != Regime::SubcriticalMax && regime != Regime::CriticalMax) {
    throw InvalidParameter("gap scan requires lambda in (0, T]");
  }
  std::vector<double> ls(slopes.begin(), slopes.end());
  std::sort(ls.begin(), ls.end());
  ls.erase(std::unique(ls.begin(), ls.end()), ls.end());

  const Measure1D mu0 = UniformMeasure1D(-1.0, 1.0);
  FlowOptions opts;
  opts.num_particles = num_particles;
  opts.step_dt = step_dt;
  const double limit = sign_motion_limit_cost(params);

  GapScan scan;
  for (double slope : ls) {
    GapRow row;
    row.slope = slope;
    row.cost_of_mollified =
        continuous_cost(params, mollify_sign_field(slope), mu0, opts).total;
    row.limit_cost = limit;
    row.gap = row.cost_of_mollified - limit;
    scan.rows.push_back(row);
  }

  const std::size_t n = scan.rows.size();
  if (n >= 2) {
    const GapRow& a = scan.rows[n - 2];
    const GapRow& b = scan.rows[n - 1];
    if (a.gap > 0.0 && b.gap > 0.0) {
      scan.decay_exponent = std::log(a.gap / b.gap) / std::log(b.slope / a.slope);
    }
  }
  if (n >= 3) {
    const GapRow& r1 = scan.rows[n - 3];
    const GapRow& r2 = scan.rows[n - 2];
    const GapRow& r3 = scan.rows[n - 1];
    const bool geometric =
        std::abs(r2.slope / r1.slope - r3.slope / r2.slope) <= 1e-9 * (r3.slope / r2.slope);
    const double d1 = r2.cost_of_mollified - r1.cost_of_mollified;
    const double d2 = r3.cost_of_mollified - r2.cost_of_mollified;
    if (geometric && d1 != d2 && d2 / d1 > 0.0 && d2 / d1 < 1.0) {
      scan.extrapolated_limit = r3.cost_of_mollified - d2 * d2 / (d2 - d1);
    }
  }
  return scan;
}

std::vector<DichotomyCell> dichotomy_map(std::span<const double> lambdas, double horizon) {
  std::vector<DichotomyCell> cells;
  for (double lambda : lambdas) {
    DichotomyCell cell;
    cell.lambda = lambda;
    cell.horizon = horizon;
    switch (classify_regime(lambda, horizon)) {
      case Regime::SupercriticalMax:
        cell.verdict = Verdict::LipschitzMinimizerExists;
        cell.witness_bound = 1.0 / (lambda - horizon);
        break;
      case Regime::Minimization:
        cell.verdict = Verdict::LipschitzMinimizerExists;
        cell.witness_bound = 1.0 / std::abs(lambda);
        break;
      case Regime::CriticalMax:
      case Regime::SubcriticalMax:
        cell.verdict = Verdict::NoLipschitzMinimizer;
        break;
    }
    cells.push_back(cell);
  }
  return cells;
}

}  // namespace mfvar
