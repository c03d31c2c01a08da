#ifndef MFVAR_CORE_HPP
#define MFVAR_CORE_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace mfvar {

/// Raised when caller-supplied parameters violate a precondition.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a computation leaves the domain where it is defined
/// (undefined feedback band, map not defined at a support point, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when an internal invariant that the mathematics guarantees fails.
class InternalConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Weight lambda, horizon T and agent count N shared by the finite-agent
/// and mean-field problems.
class ProblemParams {
 public:
  /// Throws InvalidParameter unless lambda != 0, T > 0 and N >= 2 is even.
  ProblemParams(double lambda, double horizon, int num_agents = 40);

  double lambda() const { return lambda_; }
  double horizon() const { return horizon_; }
  int num_agents() const { return num_agents_; }

  ProblemParams with_agents(int num_agents) const {
    return ProblemParams(lambda_, horizon_, num_agents);
  }

 private:
  double lambda_;
  double horizon_;
  int num_agents_;
};

/// Uniform atomic measure (1/N) sum delta_{x_i}; atoms kept sorted.
class EmpiricalMeasure1D {
 public:
  /// Sorts the atoms (stable). Throws InvalidParameter on empty or
  /// non-finite input.
  explicit EmpiricalMeasure1D(std::vector<double> atoms);

  std::span<const double> support() const { return support_; }
  std::size_t size() const { return support_.size(); }
  double quantile(double q) const;

 private:
  std::vector<double> support_;
};

/// Normalized Lebesgue measure on [left, right].
class UniformMeasure1D {
 public:
  UniformMeasure1D(double left, double right);

  double left() const { return left_; }
  double right() const { return right_; }
  double density() const { return 1.0 / (right_ - left_); }
  double quantile(double q) const { return left_ + q * (right_ - left_); }

 private:
  double left_;
  double right_;
};

using Measure1D = std::variant<EmpiricalMeasure1D, UniformMeasure1D>;

/// x -> scale * x + shift. Kept distinct from a generic map so that the
/// image of a uniform measure stays uniform.
struct AffineMap {
  double scale = 1.0;
  double shift = 0.0;
  double operator()(double x) const { return scale * x + shift; }
};

using PositionMap = std::function<double(double)>;

/// x_i = (2i - N - 1) / (N - 1), i = 1..N.
std::vector<double> initial_grid(int num_agents);
std::vector<double> initial_grid(const ProblemParams& params);

/// Left-continuous quantile function q in (0,1) -> position.
double quantile(const Measure1D& mu, double q);

double mean(const Measure1D& mu);
double variance(const Measure1D& mu);
double mean(std::span<const double> xs);
double variance(std::span<const double> xs);

/// Exact 1-D W1 via the L1 distance between quantile functions.
double wasserstein1(const Measure1D& mu, const Measure1D& nu);

/// Midpoint quantiles (k - 1/2)/M of a uniform measure, or the atoms of an
/// empirical one (count ignored).
std::vector<double> sample_particles(const Measure1D& mu, std::size_t count);

Measure1D push_forward(const Measure1D& mu, const AffineMap& map);
/// Empirical measures are mapped atom-wise; uniform measures are first
/// sampled at `particle_count` midpoint quantiles. A map returning a
/// non-finite value (or throwing DomainError) is reported as DomainError.
Measure1D push_forward(const Measure1D& mu, const PositionMap& map,
                       std::size_t particle_count = 4096);

/// Projection onto the admissible control set [-1, 1].
inline double project_control(double u) {
  if (u >= 1.0) return 1.0;
  if (u <= -1.0) return -1.0;
  return u;
}

}  // namespace mfvar

#endif  // MFVAR_CORE_HPP
