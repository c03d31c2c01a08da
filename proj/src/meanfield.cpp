#include "mfvar/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace mfvar {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void require_step(double step_dt) {
  if (!(step_dt > 0.0) || !std::isfinite(step_dt)) {
    throw InvalidParameter("integration step must be positive");
  }
}

// Nodes 0 = t_0 < ... < t_n = horizon, hitting every breakpoint, with
// uniform sub-steps no larger than step_dt between breakpoints.
std::vector<double> build_grid(double horizon, double step_dt,
                               std::vector<double> breakpoints) {
  breakpoints.push_back(0.0);
  breakpoints.push_back(horizon);
  std::sort(breakpoints.begin(), breakpoints.end());
  breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()),
                    breakpoints.end());
  std::vector<double> grid{0.0};
  for (std::size_t b = 1; b < breakpoints.size(); ++b) {
    const double a = breakpoints[b - 1];
    const double c = breakpoints[b];
    const auto steps = std::max<long long>(
        1, static_cast<long long>(std::ceil((c - a) / step_dt - 1e-9)));
    for (long long k = 1; k < steps; ++k) {
      grid.push_back(a + (c - a) * static_cast<double>(k) / static_cast<double>(steps));
    }
    grid.push_back(c);
  }
  return grid;
}

// One classical RK4 step; k1 is supplied by the caller (it is u at the node).
double rk4_step(const FeedbackField& field, double t, double y, double h, double k1) {
  const double k2 = eval_field(field, t + 0.5 * h, y + 0.5 * h * k1);
  const double k3 = eval_field(field, t + 0.5 * h, y + 0.5 * h * k2);
  const double k4 = eval_field(field, t + h, y + h * k3);
  return y + h * (k1 + 2.0 * (k2 + k3) + k4) / 6.0;
}

}  // namespace

TabulatedField::TabulatedField(std::vector<double> times, std::vector<double> xs,
                               std::vector<double> values)
    : times_(std::move(times)), xs_(std::move(xs)), values_(std::move(values)) {
  if (times_.empty() || xs_.size() < 2 || values_.size() != times_.size() * xs_.size()) {
    throw InvalidParameter("tabulated field shape mismatch");
  }
  if (!std::is_sorted(times_.begin(), times_.end()) ||
      std::adjacent_find(times_.begin(), times_.end()) != times_.end() ||
      !std::is_sorted(xs_.begin(), xs_.end()) ||
      std::adjacent_find(xs_.begin(), xs_.end()) != xs_.end()) {
    throw InvalidParameter("tabulated field grids must be strictly increasing");
  }
  for (double v : values_) {
    if (!(v >= -1.0 && v <= 1.0)) {
      throw InvalidParameter("tabulated field values must lie in [-1, 1]");
    }
  }
}

double TabulatedField::operator()(double t, double y) const {
  const auto locate = [](const std::vector<double>& grid, double v) {
    if (grid.size() == 1 || v <= grid.front()) return std::pair<std::size_t, double>{0, 0.0};
    if (v >= grid.back()) return std::pair<std::size_t, double>{grid.size() - 2, 1.0};
    const auto it = std::upper_bound(grid.begin(), grid.end(), v);
    const auto j = static_cast<std::size_t>(it - grid.begin()) - 1;
    return std::pair<std::size_t, double>{j, (v - grid[j]) / (grid[j + 1] - grid[j])};
  };
  const auto [j, wx] = locate(xs_, y);
  const std::size_t nx = xs_.size();
  const auto row = [&](std::size_t k) {
    return (1.0 - wx) * values_[k * nx + j] + wx * values_[k * nx + j + 1];
  };
  if (times_.size() == 1) return row(0);
  const auto [k, wt] = locate(times_, t);
  return (1.0 - wt) * row(k) + wt * row(k + 1);
}

double TabulatedField::space_lipschitz() const {
  const std::size_t nx = xs_.size();
  double best = 0.0;
  for (std::size_t k = 0; k < times_.size(); ++k) {
    for (std::size_t j = 0; j + 1 < nx; ++j) {
      const double slope =
          std::abs(values_[k * nx + j + 1] - values_[k * nx + j]) / (xs_[j + 1] - xs_[j]);
      best = std::max(best, slope);
    }
  }
  return best;
}

std::string field_name(const FeedbackField& field) {
  return std::visit(Overloaded{
                        [](const SaturatedLinear&) { return std::string("saturated-linear"); },
                        [](const SignWithGap&) { return std::string("sign-with-gap"); },
                        [](const MollifiedSign&) { return std::string("mollified-sign"); },
                        [](const ConstantField&) { return std::string("constant"); },
                        [](const TabulatedField&) { return std::string("tabulated"); },
                    },
                    field);
}

FeedbackField optimal_feedback(double lambda, double horizon) {
  if (has_lipschitz_controls(classify_regime(lambda, horizon))) {
    return SaturatedLinear{lambda, horizon};
  }
  return SignWithGap{};
}

FeedbackField optimal_feedback(const ProblemParams& params) {
  return optimal_feedback(params.lambda(), params.horizon());
}

FeedbackField mollify_sign_field(double slope) {
  if (!(slope > 0.0) || !std::isfinite(slope)) {
    throw InvalidParameter("mollifier slope must be positive");
  }
  return MollifiedSign{slope};
}

bool is_defined(const FeedbackField& field, double t, double y) {
  return std::visit(Overloaded{
                        [&](const SaturatedLinear& f) { return f.lambda - f.horizon + t != 0.0; },
                        [&](const SignWithGap& f) {
                          return std::abs(y) > t || (y == 0.0 && f.tie_value_at_0.has_value());
                        },
                        [](const auto&) { return true; },
                    },
                    field);
}

double eval_field(const FeedbackField& field, double t, double y) {
  return std::visit(
      Overloaded{
          [&](const SaturatedLinear& f) {
            const double denom = f.lambda - f.horizon + t;
            if (denom == 0.0) throw DomainError("saturated-linear field singular at this time");
            return project_control(y / denom);
          },
          [&](const SignWithGap& f) {
            if (std::abs(y) > t) return sign_of(y);
            if (y == 0.0 && f.tie_value_at_0) return *f.tie_value_at_0;
            throw DomainError("feedback undefined on the band |y| <= t");
          },
          [&](const MollifiedSign& f) { return project_control(f.slope * y); },
          [](const ConstantField& f) { return f.value; },
          [&](const TabulatedField& f) { return f(t, y); },
      },
      field);
}

std::optional<double> space_lipschitz(const FeedbackField& field, double horizon) {
  return std::visit(
      Overloaded{
          [&](const SaturatedLinear& f) -> std::optional<double> {
            const double c = f.lambda - f.horizon;
            // |c + t| over [0, horizon]
            if (c > 0.0) return 1.0 / c;
            if (c + horizon >= 0.0) return std::nullopt;
            return 1.0 / std::abs(c + horizon);
          },
          [](const SignWithGap&) -> std::optional<double> { return std::nullopt; },
          [](const MollifiedSign& f) -> std::optional<double> { return f.slope; },
          [](const ConstantField&) -> std::optional<double> { return 0.0; },
          [](const TabulatedField& f) -> std::optional<double> { return f.space_lipschitz(); },
      },
      field);
}

double analytic_flow(const ProblemParams& params, double t, double x0) {
  if (!has_lipschitz_controls(classify_regime(params))) {
    throw InvalidParameter("analytic_flow supports lambda > T or lambda < 0 only");
  }
  if (!(t >= 0.0 && t <= params.horizon())) {
    throw InvalidParameter("time outside [0, T]");
  }
  const double c = params.lambda() - params.horizon();
  if (std::abs(x0) <= std::abs(c)) return x0 * (c + t) / c;
  return x0 + t * sign_of(x0 * c);
}

Path integrate_flow(const FeedbackField& field, double x0, double step_dt,
                    double horizon) {
  require_step(step_dt);
  if (!(horizon >= 0.0)) throw InvalidParameter("horizon must be non-negative");
  Path path;
  path.times = horizon == 0.0 ? std::vector<double>{0.0} : build_grid(horizon, step_dt, {});
  path.positions.reserve(path.times.size());
  double y = x0;
  path.positions.push_back(y);
  for (std::size_t k = 0; k + 1 < path.times.size(); ++k) {
    const double t = path.times[k];
    const double h = path.times[k + 1] - t;
    y = rk4_step(field, t, y, h, eval_field(field, t, y));
    path.positions.push_back(y);
  }
  return path;
}

std::span<const double> FlowResult::path_row(std::size_t k) const {
  const std::size_t m = initial_particles.size();
  return std::span<const double>(paths).subspan(k * m, m);
}

FlowResult solve_continuity(const FeedbackField& field, const Measure1D& mu0,
                            const FlowOptions& options) {
  require_step(options.step_dt);
  if (!(options.horizon > 0.0)) throw InvalidParameter("horizon must be positive");
  for (double s : options.snapshot_times) {
    if (!(s > 0.0 && s <= options.horizon)) {
      throw InvalidParameter("snapshot times must lie in (0, horizon]");
    }
  }

  FlowResult result;
  result.initial_particles = sample_particles(mu0, options.num_particles);
  result.grid = build_grid(options.horizon, options.step_dt, options.snapshot_times);
  result.step_dt = options.step_dt;

  std::vector<double> snaps = options.snapshot_times;
  snaps.push_back(options.horizon);
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
  result.snapshot_times = snaps;

  const std::vector<double>& grid = result.grid;
  const std::size_t m = result.initial_particles.size();
  const std::size_t nodes = grid.size();
  const bool exact_sign = std::holds_alternative<SignWithGap>(field);
  result.method = exact_sign ? "exact-sign-motion" : "rk4";

  if (exact_sign) {
    for (double y0 : result.initial_particles) {
      if (y0 == 0.0) {
        throw DomainError("sign feedback cannot transport mass located at the origin");
      }
    }
  }

  // snapshot index -> grid node index
  std::vector<std::size_t> snap_nodes;
  for (double s : snaps) {
    snap_nodes.push_back(static_cast<std::size_t>(
        std::lower_bound(grid.begin(), grid.end(), s) - grid.begin()));
  }
  std::vector<std::vector<double>> snap_positions(snaps.size(), std::vector<double>(m));
  if (options.record_paths) result.paths.assign(nodes * m, 0.0);

  double energy = 0.0;
  for (std::size_t p = 0; p < m; ++p) {
    const double y0 = result.initial_particles[p];
    double y = y0;
    double u = eval_field(field, 0.0, y);
    double particle_energy = 0.0;
    std::size_t next_snap = 0;
    for (std::size_t k = 0;; ++k) {
      if (options.record_paths) result.paths[k * m + p] = y;
      while (next_snap < snap_nodes.size() && snap_nodes[next_snap] == k) {
        snap_positions[next_snap++][p] = y;
      }
      if (k + 1 == nodes) break;
      const double h = grid[k + 1] - grid[k];
      const double y_next = exact_sign ? y0 + grid[k + 1] * sign_of(y0)
                                       : rk4_step(field, grid[k], y, h, u);
      const double u_next = eval_field(field, grid[k + 1], y_next);
      particle_energy += 0.5 * h * (u * u + u_next * u_next);
      y = y_next;
      u = u_next;
    }
    energy += particle_energy;
  }
  result.control_energy = energy / static_cast<double>(m);
  for (auto& pos : snap_positions) result.snapshots.emplace_back(std::move(pos));
  return result;
}

CostBreakdown continuous_cost(const ProblemParams& params, const FeedbackField& field,
                              const Measure1D& mu0, const FlowOptions& options) {
  FlowOptions opts = options;
  opts.horizon = params.horizon();
  const FlowResult flow = solve_continuity(field, mu0, opts);
  const double running = 0.5 * flow.control_energy;
  const double terminal = -variance(Measure1D(flow.final_measure())) / (2.0 * params.lambda());
  return make_cost(running, terminal);
}

TestFunction raised_cosine_bump(double t0, double t1, double center, double radius) {
  if (!(t0 < t1) || !(radius > 0.0)) {
    throw InvalidParameter("bump needs t0 < t1 and a positive radius");
  }
  constexpr double pi = std::numbers::pi;
  const double wt = pi / (t1 - t0);
  const double wx = pi / (2.0 * radius);
  const auto in_support = [=](double t, double x) {
    return t > t0 && t < t1 && std::abs(x - center) < radius;
  };
  const auto phi = [=](double t) { return std::pow(std::sin(wt * (t - t0)), 2); };
  const auto dphi = [=](double t) { return wt * std::sin(2.0 * wt * (t - t0)); };
  const auto psi = [=](double x) { return std::pow(std::cos(wx * (x - center)), 2); };
  const auto dpsi = [=](double x) { return -wx * std::sin(2.0 * wx * (x - center)); };
  TestFunction f;
  f.value = [=](double t, double x) { return in_support(t, x) ? phi(t) * psi(x) : 0.0; };
  f.d_t = [=](double t, double x) { return in_support(t, x) ? dphi(t) * psi(x) : 0.0; };
  f.d_x = [=](double t, double x) { return in_support(t, x) ? phi(t) * dpsi(x) : 0.0; };
  return f;
}

TestFunction linear_combination(double a, const TestFunction& f, double b,
                                const TestFunction& g) {
  const auto combine = [a, b](std::function<double(double, double)> p,
                              std::function<double(double, double)> q) {
    return [a, b, p = std::move(p), q = std::move(q)](double t, double x) {
      return a * p(t, x) + b * q(t, x);
    };
  };
  return {combine(f.value, g.value), combine(f.d_t, g.d_t), combine(f.d_x, g.d_x)};
}

double weak_form_residual(const FlowResult& flow, const FeedbackField& field,
                          const TestFunction& test_fn, double quadrature_dt) {
  require_step(quadrature_dt);
  if (!flow.has_paths()) {
    throw InvalidParameter("weak_form_residual needs a flow with recorded paths");
  }
  const std::vector<double>& grid = flow.grid;
  const std::vector<double> nodes = build_grid(grid.back(), quadrature_dt, {});
  const std::size_t m = flow.num_particles();

  std::vector<double> integrand(nodes.size(), 0.0);
  for (std::size_t q = 0; q < nodes.size(); ++q) {
    const double t = nodes[q];
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    std::size_t k = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
    k = std::min(k, grid.size() - 2);
    const double w = (t - grid[k]) / (grid[k + 1] - grid[k]);
    const auto lo = flow.path_row(k);
    const auto hi = flow.path_row(k + 1);
    double acc = 0.0;
    for (std::size_t p = 0; p < m; ++p) {
      const double y = w == 0.0 ? lo[p] : (w == 1.0 ? hi[p] : (1.0 - w) * lo[p] + w * hi[p]);
      const double dx = test_fn.d_x(t, y);
      acc += test_fn.d_t(t, y) + (dx == 0.0 ? 0.0 : dx * eval_field(field, t, y));
    }
    integrand[q] = acc / static_cast<double>(m);
  }
  double total = 0.0;
  for (std::size_t q = 0; q + 1 < nodes.size(); ++q) {
    total += 0.5 * (nodes[q + 1] - nodes[q]) * (integrand[q] + integrand[q + 1]);
  }
  return total;
}

GronwallCheck gronwall_bound_check(const FeedbackField& field, const Measure1D& mu,
                                   const Measure1D& nu, double t, double lipschitz,
                                   double step_dt, std::size_t sample_count) {
  if (!(t >= 0.0)) throw InvalidParameter("time must be non-negative");
  const auto known = space_lipschitz(field, std::max(t, 0.0));
  if (!known) throw InvalidParameter("Gronwall estimate needs a Lipschitz field");
  if (*known > lipschitz * (1.0 + 1e-12)) {
    throw InvalidParameter("supplied Lipschitz constant is below the field's");
  }
  const Measure1D mu_d = EmpiricalMeasure1D(sample_particles(mu, sample_count));
  const Measure1D nu_d = EmpiricalMeasure1D(sample_particles(nu, sample_count));
  GronwallCheck out;
  out.rhs = std::exp(lipschitz * t) * wasserstein1(mu_d, nu_d);
  if (t == 0.0) {
    out.lhs = wasserstein1(mu_d, nu_d);
    return out;
  }
  FlowOptions opts;
  opts.horizon = t;
  opts.step_dt = step_dt;
  const FlowResult a = solve_continuity(field, mu_d, opts);
  const FlowResult b = solve_continuity(field, nu_d, opts);
  out.lhs = wasserstein1(Measure1D(a.final_measure()), Measure1D(b.final_measure()));
  return out;
}

}  // namespace mfvar
