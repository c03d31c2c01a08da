#include "mfvar/discrete_pmp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mfvar {

namespace {

constexpr double kTieTolerance = 1e-12;
constexpr double kMergeTolerance = 1e-12;
constexpr double kMeanZeroTolerance = 1e-12;
constexpr std::size_t kFullScanLimit = 1000;

double sign_of(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::SupercriticalMax: return "supercritical-max";
    case Regime::CriticalMax: return "critical-max";
    case Regime::SubcriticalMax: return "subcritical-max";
    case Regime::Minimization: return "minimization";
  }
  return "unknown";
}

Regime classify_regime(double lambda, double horizon) {
  if (!std::isfinite(lambda) || lambda == 0.0) {
    throw InvalidParameter("lambda must be nonzero");
  }
  if (!std::isfinite(horizon) || horizon <= 0.0) {
    throw InvalidParameter("T must be positive");
  }
  if (lambda < 0.0) return Regime::Minimization;
  if (lambda > horizon) return Regime::SupercriticalMax;
  if (lambda == horizon) return Regime::CriticalMax;
  return Regime::SubcriticalMax;
}

Regime classify_regime(const ProblemParams& params) {
  return classify_regime(params.lambda(), params.horizon());
}

ControlVector::ControlVector(std::vector<double> values) : values_(std::move(values)) {
  for (double u : values_) {
    if (!(u >= -1.0 && u <= 1.0)) {
      throw InvalidParameter("controls must lie in [-1, 1]");
    }
  }
}

Trajectory::Trajectory(std::vector<double> times, std::vector<double> initial,
                       std::vector<double> positions)
    : times_(std::move(times)),
      initial_(std::move(initial)),
      positions_(std::move(positions)) {
  if (times_.size() < 2 || positions_.size() != times_.size() * initial_.size()) {
    throw InvalidParameter("trajectory shape mismatch");
  }
}

std::span<const double> Trajectory::row(std::size_t k) const {
  return std::span<const double>(positions_).subspan(k * initial_.size(),
                                                     initial_.size());
}

ControlVector closed_form_controls(const ProblemParams& params) {
  const auto x0 = initial_grid(params);
  const double gap = params.lambda() - params.horizon();
  std::vector<double> u(x0.size());
  switch (classify_regime(params)) {
    case Regime::SupercriticalMax:
      for (std::size_t i = 0; i < x0.size(); ++i) {
        if (x0[i] > gap) {
          u[i] = 1.0;
        } else if (x0[i] < -gap) {
          u[i] = -1.0;
        } else {
          u[i] = x0[i] / gap;
        }
      }
      break;
    case Regime::CriticalMax:
    case Regime::SubcriticalMax:
      for (std::size_t i = 0; i < x0.size(); ++i) u[i] = sign_of(x0[i]);
      break;
    case Regime::Minimization:
      // gap < 0 here: saturation pushes agents toward the origin.
      for (std::size_t i = 0; i < x0.size(); ++i) {
        if (x0[i] > -gap) {
          u[i] = -1.0;
        } else if (x0[i] < gap) {
          u[i] = 1.0;
        } else {
          u[i] = x0[i] / gap;
        }
      }
      break;
  }
  return ControlVector(std::move(u));
}

std::vector<double> fixed_point_candidates(const ProblemParams& params, double x0) {
  const double lambda = params.lambda();
  const double T = params.horizon();
  if (lambda == T && x0 == 0.0) {
    throw InvalidParameter("every u in [-1,1] is a fixed point when lambda == T and x0 == 0");
  }
  std::vector<double> found;
  if (lambda != T) {
    const double u = x0 / (lambda - T);
    if (std::abs(u) <= 1.0) found.push_back(u);
  }
  if ((x0 + T) / lambda >= 1.0) found.push_back(1.0);
  if ((x0 - T) / lambda <= -1.0) found.push_back(-1.0);
  if (found.empty()) {
    throw InternalConsistencyError("no fixed point found for x0 = " + std::to_string(x0));
  }
  std::sort(found.begin(), found.end());
  // An interior root that lands on a saturation value is the same point.
  std::vector<double> unique;
  for (double u : found) {
    if (!unique.empty() && std::abs(u - unique.back()) <= kMergeTolerance) {
      if (std::abs(u) == 1.0) unique.back() = u;
      continue;
    }
    unique.push_back(u);
  }
  return unique;
}

double agent_cost(const ProblemParams& params, double x0, double u) {
  const double T = params.horizon();
  const double xT = x0 + T * u;
  return 0.5 * T * u * u - xT * xT / (2.0 * params.lambda());
}

double select_optimal_branch(const ProblemParams& params, double x0,
                             std::span<const double> candidates) {
  if (candidates.empty()) throw InvalidParameter("no candidate controls");
  double best = candidates.front();
  double best_cost = agent_cost(params, x0, best);
  for (double u : candidates.subspan(1)) {
    const double c = agent_cost(params, x0, u);
    if (c < best_cost - kTieTolerance ||
        (std::abs(c - best_cost) <= kTieTolerance && std::abs(u) > std::abs(best))) {
      best = u;
      best_cost = c;
    }
  }
  return best;
}

ControlVector enumerated_controls(const ProblemParams& params) {
  const auto x0 = initial_grid(params);
  std::vector<double> u(x0.size());
  for (std::size_t i = 0; i < x0.size(); ++i) {
    const auto candidates = fixed_point_candidates(params, x0[i]);
    u[i] = select_optimal_branch(params, x0[i], candidates);
  }
  if (std::abs(mean(std::span<const double>(u))) > kMeanZeroTolerance) {
    throw InternalConsistencyError("selected controls are not mean-zero");
  }
  return ControlVector(std::move(u));
}

double hamiltonian(const ProblemParams& params, std::span<const double> p,
                   std::span<const double> u) {
  const auto n = static_cast<std::size_t>(params.num_agents());
  if (p.size() != n || u.size() != n) {
    throw InvalidParameter("hamiltonian: vectors must have length N");
  }
  double h = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    h += p[i] * u[i] - u[i] * u[i] / (2.0 * static_cast<double>(n));
  }
  return h;
}

std::vector<double> costates(const ProblemParams& params,
                             std::span<const double> final_positions) {
  const double m = mean(final_positions);
  const double scale = 1.0 / (static_cast<double>(final_positions.size()) * params.lambda());
  std::vector<double> p(final_positions.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = (final_positions[i] - m) * scale;
  return p;
}

std::vector<double> final_positions(const ProblemParams& params,
                                    std::span<const double> x0,
                                    const ControlVector& controls) {
  if (x0.size() != controls.size()) {
    throw InvalidParameter("positions and controls differ in length");
  }
  std::vector<double> xT(x0.size());
  for (std::size_t i = 0; i < xT.size(); ++i) {
    xT[i] = x0[i] + params.horizon() * controls[i];
  }
  return xT;
}

CostBreakdown discrete_cost(const ProblemParams& params, std::span<const double> x0,
                            const ControlVector& controls) {
  const auto xT = final_positions(params, x0, controls);
  double energy = 0.0;
  for (double u : controls.values()) energy += u * u;
  const double running =
      params.horizon() * energy / (2.0 * static_cast<double>(controls.size()));
  const double terminal = -variance(std::span<const double>(xT)) / (2.0 * params.lambda());
  return make_cost(running, terminal);
}

PMPSolution solve_pmp(const ProblemParams& params) {
  PMPSolution sol;
  sol.initial_positions = initial_grid(params);
  sol.controls = closed_form_controls(params);
  sol.final_positions = final_positions(params, sol.initial_positions, sol.controls);
  sol.costates = costates(params, sol.final_positions);
  sol.cost = discrete_cost(params, sol.initial_positions, sol.controls);
  return sol;
}

Trajectory trajectories(const ProblemParams& params, std::span<const double> x0,
                        const ControlVector& controls, int num_steps) {
  if (num_steps < 1) throw InvalidParameter("num_steps must be >= 1");
  if (x0.size() != controls.size()) {
    throw InvalidParameter("positions and controls differ in length");
  }
  const auto steps = static_cast<std::size_t>(num_steps);
  std::vector<double> times(steps + 1);
  std::vector<double> positions((steps + 1) * x0.size());
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = k == steps ? params.horizon()
                                : params.horizon() * static_cast<double>(k) /
                                      static_cast<double>(steps);
    times[k] = t;
    for (std::size_t i = 0; i < x0.size(); ++i) {
      positions[k * x0.size() + i] = x0[i] + t * controls[i];
    }
  }
  return Trajectory(std::move(times), {x0.begin(), x0.end()}, std::move(positions));
}

double lipschitz_constant(const Trajectory& traj, const ControlVector& controls,
                          double t) {
  const auto x0 = traj.initial_positions();
  if (x0.size() != controls.size()) {
    throw InvalidParameter("trajectory and controls differ in length");
  }
  const std::size_t n = x0.size();
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = x0[i] + t * controls[i];

  const auto ratio = [&](std::size_t i, std::size_t j) {
    const double du = std::abs(controls[i] - controls[j]);
    const double dx = std::abs(x[i] - x[j]);
    if (du == 0.0) return 0.0;
    if (dx == 0.0) return std::numeric_limits<double>::infinity();
    return du / dx;
  };

  double best = 0.0;
  if (n <= kFullScanLimit) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) best = std::max(best, ratio(i, j));
    }
    return best;
  }
  // In 1-D the steepest chord joins neighbouring positions, so group
  // coincident agents and compare consecutive groups only.
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  struct Group {
    double x, u_min, u_max;
  };
  std::vector<Group> groups;
  for (std::size_t k : order) {
    if (groups.empty() || x[k] != groups.back().x) {
      groups.push_back({x[k], controls[k], controls[k]});
    } else {
      groups.back().u_min = std::min(groups.back().u_min, controls[k]);
      groups.back().u_max = std::max(groups.back().u_max, controls[k]);
    }
  }
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].u_max > groups[g].u_min) return std::numeric_limits<double>::infinity();
    if (g == 0) continue;
    const Group& a = groups[g - 1];
    const Group& b = groups[g];
    const double du = std::max(b.u_max - a.u_min, a.u_max - b.u_min);
    best = std::max(best, du / (b.x - a.x));
  }
  return best;
}

}  // namespace mfvar
