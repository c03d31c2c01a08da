#ifndef MFVAR_DISCRETE_PMP_HPP
#define MFVAR_DISCRETE_PMP_HPP

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "mfvar/core.hpp"

namespace mfvar {

enum class Regime {
  SupercriticalMax,  // lambda > T
  CriticalMax,       // lambda == T
  SubcriticalMax,    // 0 < lambda < T
  Minimization,      // lambda < 0
};

std::string_view to_string(Regime regime);

Regime classify_regime(double lambda, double horizon);
Regime classify_regime(const ProblemParams& params);

/// True for the regimes where the optimal controls are a Lipschitz
/// function of position uniformly in N (lambda > T or lambda < 0).
inline bool has_lipschitz_controls(Regime r) {
  return r == Regime::SupercriticalMax || r == Regime::Minimization;
}

/// Per-agent controls, constant in time, each in [-1, 1].
class ControlVector {
 public:
  ControlVector() = default;
  explicit ControlVector(std::vector<double> values);

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }

 private:
  std::vector<double> values_;
};

struct CostBreakdown {
  double running = 0.0;   // control energy
  double terminal = 0.0;  // -Var / (2 lambda)
  double total = 0.0;
};

inline CostBreakdown make_cost(double running, double terminal) {
  return {running, terminal, running + terminal};
}

/// Samples x_i(t_k) on a uniform time grid; positions stored row-major by
/// time step.
class Trajectory {
 public:
  Trajectory(std::vector<double> times, std::vector<double> initial,
             std::vector<double> positions);

  std::span<const double> times() const { return times_; }
  std::size_t num_agents() const { return initial_.size(); }
  std::size_t num_steps() const { return times_.size() - 1; }
  std::span<const double> initial_positions() const { return initial_; }
  std::span<const double> row(std::size_t k) const;
  double at(std::size_t k, std::size_t i) const { return row(k)[i]; }

 private:
  std::vector<double> times_;
  std::vector<double> initial_;
  std::vector<double> positions_;
};

struct PMPSolution {
  ControlVector controls;
  std::vector<double> initial_positions;
  std::vector<double> costates;
  std::vector<double> final_positions;
  CostBreakdown cost;
};

/// Optimal controls from the analytic case split on (lambda, T).
ControlVector closed_form_controls(const ProblemParams& params);

/// Every u in [-1, 1] with u = pi((x0 + T u) / lambda), ascending.
/// Throws InvalidParameter for the degenerate lambda == T, x0 == 0 case
/// (a whole interval of fixed points) and InternalConsistencyError if no
/// branch validates.
std::vector<double> fixed_point_candidates(const ProblemParams& params, double x0);

/// Per-agent cost contribution (T/2) u^2 - (x0 + T u)^2 / (2 lambda) under a
/// mean-zero control vector.
double agent_cost(const ProblemParams& params, double x0, double u);

/// Cheapest candidate by agent_cost; ties within 1e-12 go to larger |u|.
double select_optimal_branch(const ProblemParams& params, double x0,
                             std::span<const double> candidates);

/// Branch enumeration plus cost selection for every agent of the grid.
/// Fails with InternalConsistencyError if the result is not mean-zero.
ControlVector enumerated_controls(const ProblemParams& params);

double hamiltonian(const ProblemParams& params, std::span<const double> p,
                   std::span<const double> u);

/// p_i = (x_i(T) - mean x(T)) / (N lambda); constant in time.
std::vector<double> costates(const ProblemParams& params,
                             std::span<const double> final_positions);

std::vector<double> final_positions(const ProblemParams& params,
                                    std::span<const double> x0,
                                    const ControlVector& controls);

/// Cost of constant-in-time controls.
CostBreakdown discrete_cost(const ProblemParams& params, std::span<const double> x0,
                            const ControlVector& controls);

PMPSolution solve_pmp(const ProblemParams& params);

Trajectory trajectories(const ProblemParams& params, std::span<const double> x0,
                        const ControlVector& controls, int num_steps);

/// max_{i != j} |u_i - u_j| / |x_i(t) - x_j(t)| with x_i(t) = x_i(0) + t u_i.
/// Coincident agents with distinct controls yield +infinity.
double lipschitz_constant(const Trajectory& traj, const ControlVector& controls,
                          double t);

}  // namespace mfvar

#endif  // MFVAR_DISCRETE_PMP_HPP
