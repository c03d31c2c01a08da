#ifndef MFVAR_MEANFIELD_HPP
#define MFVAR_MEANFIELD_HPP

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mfvar/core.hpp"
#include "mfvar/discrete_pmp.hpp"

namespace mfvar {

/// u(t, y) = pi(y / (lambda - T + t)); requires lambda > T or lambda < 0.
struct SaturatedLinear {
  double lambda;
  double horizon;
};

/// u(t, y) = sign(y) for |y| > t, undefined on the band [-t, t]. The tie
/// value is a plotting convention for y == 0 only; it is not part of the
/// optimal control.
struct SignWithGap {
  std::optional<double> tie_value_at_0 = 0.0;
};

/// u(t, y) = pi(L y), globally L-Lipschitz in space.
struct MollifiedSign {
  double slope;
};

struct ConstantField {
  double value = 0.0;
};

/// Bilinear interpolation of samples on a time x space grid, constant
/// extension outside the grid.
class TabulatedField {
 public:
  /// `values` is row-major: values[k * xs.size() + j] = u(times[k], xs[j]).
  TabulatedField(std::vector<double> times, std::vector<double> xs,
                 std::vector<double> values);

  double operator()(double t, double y) const;
  /// Exact spatial Lipschitz constant of the bilinear interpolant.
  double space_lipschitz() const;

 private:
  std::vector<double> times_;
  std::vector<double> xs_;
  std::vector<double> values_;
};

using FeedbackField =
    std::variant<SaturatedLinear, SignWithGap, MollifiedSign, ConstantField, TabulatedField>;

std::string field_name(const FeedbackField& field);

/// Feedback that reproduces the finite-agent optimal controls along their
/// trajectories: SaturatedLinear for lambda > T or lambda < 0, SignWithGap
/// otherwise.
FeedbackField optimal_feedback(const ProblemParams& params);
FeedbackField optimal_feedback(double lambda, double horizon);

FeedbackField mollify_sign_field(double slope);

/// Throws DomainError inside the undefined band of SignWithGap.
double eval_field(const FeedbackField& field, double t, double y);
bool is_defined(const FeedbackField& field, double t, double y);

/// Uniform-in-time spatial Lipschitz constant over [0, horizon]; nullopt for
/// fields that are not Lipschitz (SignWithGap).
std::optional<double> space_lipschitz(const FeedbackField& field, double horizon);

/// Closed-form characteristic of the optimal feedback from x0.
/// Throws InvalidParameter for lambda in (0, T].
double analytic_flow(const ProblemParams& params, double t, double x0);

struct Path {
  std::vector<double> times;
  std::vector<double> positions;
};

/// Classical fourth-order Runge-Kutta for dy/dt = u(t, y) on [0, horizon]
/// with uniform steps no larger than step_dt.
Path integrate_flow(const FeedbackField& field, double x0, double step_dt,
                    double horizon);

struct FlowOptions {
  double horizon = 1.0;
  std::size_t num_particles = 10000;
  double step_dt = 1e-3;
  /// Times in (0, horizon] at which the evolved measure is reported, in
  /// addition to the horizon itself.
  std::vector<double> snapshot_times;
  /// Keep every particle position on the integration grid (memory
  /// grows as steps x particles).
  bool record_paths = false;
};

struct FlowResult {
  std::vector<double> initial_particles;
  std::vector<double> snapshot_times;
  std::vector<EmpiricalMeasure1D> snapshots;
  std::vector<double> grid;
  /// Row-major [step][particle]; empty unless record_paths was set.
  std::vector<double> paths;
  /// integral over [0, T] of mean_k u(t, y_k(t))^2, trapezoidal on the grid.
  double control_energy = 0.0;
  std::string method;
  double step_dt = 0.0;

  std::size_t num_particles() const { return initial_particles.size(); }
  const EmpiricalMeasure1D& final_measure() const { return snapshots.back(); }
  bool has_paths() const { return !paths.empty(); }
  std::span<const double> path_row(std::size_t k) const;
};

/// Particle solution of the continuity equation by characteristics. Uniform
/// initial measures are sampled at midpoint quantiles; empirical ones are
/// used atom by atom. SignWithGap is advanced exactly (y0 + t sign(y0)).
FlowResult solve_continuity(const FeedbackField& field, const Measure1D& mu0,
                            const FlowOptions& options);

CostBreakdown continuous_cost(const ProblemParams& params, const FeedbackField& field,
                              const Measure1D& mu0, const FlowOptions& options);

struct TestFunction {
  std::function<double(double, double)> value;
  std::function<double(double, double)> d_t;
  std::function<double(double, double)> d_x;
};

/// xi(t, x) = sin^2(pi (t - t0) / (t1 - t0)) cos^2(pi (x - c) / (2 r)) on
/// [t0, t1] x [c - r, c + r], zero elsewhere. C^1 with compact support.
TestFunction raised_cosine_bump(double t0, double t1, double center, double radius);

TestFunction linear_combination(double a, const TestFunction& f, double b,
                                const TestFunction& g);

/// Trapezoidal approximation of
///   int_0^T mean_k (d_t xi + d_x xi * u)(t, y_k(t)) dt
/// on nodes spaced quadrature_dt, with paths linearly interpolated.
double weak_form_residual(const FlowResult& flow, const FeedbackField& field,
                          const TestFunction& test_fn, double quadrature_dt);

struct GronwallCheck {
  double lhs = 0.0;  // W1 of the pushed measures at time t
  double rhs = 0.0;  // e^{L t} W1(mu, nu)
};

/// Uniform inputs are discretized at `sample_count` midpoint quantiles on both
/// sides so that lhs and rhs refer to the same pair of measures.
GronwallCheck gronwall_bound_check(const FeedbackField& field, const Measure1D& mu,
                                   const Measure1D& nu, double t, double lipschitz,
                                   double step_dt = 1e-3,
                                   std::size_t sample_count = 4096);

}  // namespace mfvar

#endif  // MFVAR_MEANFIELD_HPP
