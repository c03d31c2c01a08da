#include "mfvar/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mfvar {

ProblemParams::ProblemParams(double lambda, double horizon, int num_agents)
    : lambda_(lambda), horizon_(horizon), num_agents_(num_agents) {
  if (!std::isfinite(lambda) || lambda == 0.0) {
    throw InvalidParameter("lambda must be nonzero");
  }
  if (!std::isfinite(horizon) || horizon <= 0.0) {
    throw InvalidParameter("T must be positive");
  }
  if (num_agents < 2 || num_agents % 2 != 0) {
    throw InvalidParameter("N must be an even integer >= 2");
  }
}

EmpiricalMeasure1D::EmpiricalMeasure1D(std::vector<double> atoms)
    : support_(std::move(atoms)) {
  if (support_.empty()) {
    throw InvalidParameter("empirical measure needs at least one atom");
  }
  for (double x : support_) {
    if (!std::isfinite(x)) {
      throw InvalidParameter("empirical measure atoms must be finite");
    }
  }
  std::stable_sort(support_.begin(), support_.end());
}

double EmpiricalMeasure1D::quantile(double q) const {
  const auto n = static_cast<double>(support_.size());
  auto k = static_cast<long long>(std::ceil(q * n)) - 1;
  k = std::clamp<long long>(k, 0, static_cast<long long>(support_.size()) - 1);
  return support_[static_cast<std::size_t>(k)];
}

UniformMeasure1D::UniformMeasure1D(double left, double right)
    : left_(left), right_(right) {
  if (!std::isfinite(left) || !std::isfinite(right) || !(left < right)) {
    throw InvalidParameter("uniform measure needs finite left < right");
  }
}

std::vector<double> initial_grid(int num_agents) {
  if (num_agents < 2 || num_agents % 2 != 0) {
    throw InvalidParameter("N must be an even integer >= 2");
  }
  std::vector<double> x(static_cast<std::size_t>(num_agents));
  const double denom = num_agents - 1;
  for (int i = 1; i <= num_agents; ++i) {
    x[static_cast<std::size_t>(i - 1)] = (2.0 * i - num_agents - 1) / denom;
  }
  return x;
}

std::vector<double> initial_grid(const ProblemParams& params) {
  return initial_grid(params.num_agents());
}

double quantile(const Measure1D& mu, double q) {
  return std::visit([q](const auto& m) { return m.quantile(q); }, mu);
}

double mean(std::span<const double> xs) {
  if (xs.empty()) throw InvalidParameter("mean of an empty sample");
  // Neumaier summation.
  double sum = 0.0, comp = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    comp += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return (sum + comp) / static_cast<double>(xs.size());
}

double variance(std::span<const double> xs) {
  const double m = mean(xs);
  double acc = 0.0;
  for (double x : xs) acc += (x - m) * (x - m);
  return acc / static_cast<double>(xs.size());
}

double mean(const Measure1D& mu) {
  if (const auto* e = std::get_if<EmpiricalMeasure1D>(&mu)) {
    return mean(e->support());
  }
  const auto& u = std::get<UniformMeasure1D>(mu);
  return 0.5 * (u.left() + u.right());
}

double variance(const Measure1D& mu) {
  if (const auto* e = std::get_if<EmpiricalMeasure1D>(&mu)) {
    return variance(e->support());
  }
  const auto& u = std::get<UniformMeasure1D>(mu);
  const double w = u.right() - u.left();
  return w * w / 12.0;
}

namespace {

// Integral of |a + b q| over [q0, q1], split at the root when it lies inside.
double abs_affine_integral(double a, double b, double q0, double q1) {
  const double len = q1 - q0;
  if (len <= 0.0) return 0.0;
  const double f0 = a + b * q0;
  const double f1 = a + b * q1;
  if ((f0 >= 0.0 && f1 >= 0.0) || (f0 <= 0.0 && f1 <= 0.0)) {
    return 0.5 * len * std::abs(f0 + f1);
  }
  const double root = -a / b;
  return 0.5 * (std::abs(f0) * (root - q0) + std::abs(f1) * (q1 - root));
}

double w1_empirical(const EmpiricalMeasure1D& mu, const EmpiricalMeasure1D& nu) {
  const auto xs = mu.support();
  const auto ys = nu.support();
  const auto n = static_cast<long long>(xs.size());
  const auto m = static_cast<long long>(ys.size());
  // Merge the quantile breakpoints k/n and j/m, compared exactly as k*m vs j*n.
  long long k = 1;
  long long j = 1;
  double prev = 0.0;
  double total = 0.0;
  while (k <= n && j <= m) {
    const long long lhs = k * m;
    const long long rhs = j * n;
    const double next = lhs <= rhs ? static_cast<double>(k) / static_cast<double>(n)
                                   : static_cast<double>(j) / static_cast<double>(m);
    total += std::abs(xs[static_cast<std::size_t>(k - 1)] -
                      ys[static_cast<std::size_t>(j - 1)]) *
             (next - prev);
    prev = next;
    if (lhs == rhs) {
      ++k;
      ++j;
    } else if (lhs < rhs) {
      ++k;
    } else {
      ++j;
    }
  }
  return total;
}

double w1_mixed(const EmpiricalMeasure1D& mu, const UniformMeasure1D& nu) {
  const auto xs = mu.support();
  const auto n = static_cast<double>(xs.size());
  const double width = nu.right() - nu.left();
  double total = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double q0 = static_cast<double>(k) / n;
    const double q1 = static_cast<double>(k + 1) / n;
    total += abs_affine_integral(xs[k] - nu.left(), -width, q0, q1);
  }
  return total;
}

double w1_uniform(const UniformMeasure1D& mu, const UniformMeasure1D& nu) {
  const double a = mu.left() - nu.left();
  const double b = (mu.right() - mu.left()) - (nu.right() - nu.left());
  return abs_affine_integral(a, b, 0.0, 1.0);
}

}  // namespace

double wasserstein1(const Measure1D& mu, const Measure1D& nu) {
  struct Visitor {
    double operator()(const EmpiricalMeasure1D& a, const EmpiricalMeasure1D& b) const {
      return w1_empirical(a, b);
    }
    double operator()(const EmpiricalMeasure1D& a, const UniformMeasure1D& b) const {
      return w1_mixed(a, b);
    }
    double operator()(const UniformMeasure1D& a, const EmpiricalMeasure1D& b) const {
      return w1_mixed(b, a);
    }
    double operator()(const UniformMeasure1D& a, const UniformMeasure1D& b) const {
      return w1_uniform(a, b);
    }
  };
  return std::visit(Visitor{}, mu, nu);
}

std::vector<double> sample_particles(const Measure1D& mu, std::size_t count) {
  if (const auto* e = std::get_if<EmpiricalMeasure1D>(&mu)) {
    return {e->support().begin(), e->support().end()};
  }
  if (count == 0) throw InvalidParameter("particle count must be positive");
  const auto& u = std::get<UniformMeasure1D>(mu);
  std::vector<double> xs(count);
  const auto m = static_cast<double>(count);
  for (std::size_t k = 0; k < count; ++k) {
    xs[k] = u.quantile((static_cast<double>(k) + 0.5) / m);
  }
  return xs;
}

Measure1D push_forward(const Measure1D& mu, const AffineMap& map) {
  if (const auto* u = std::get_if<UniformMeasure1D>(&mu)) {
    if (map.scale == 0.0) return EmpiricalMeasure1D({map.shift});
    const double a = map(u->left());
    const double b = map(u->right());
    return UniformMeasure1D(std::min(a, b), std::max(a, b));
  }
  return push_forward(mu, PositionMap(map));
}

Measure1D push_forward(const Measure1D& mu, const PositionMap& map,
                       std::size_t particle_count) {
  std::vector<double> xs = sample_particles(mu, particle_count);
  for (double& x : xs) {
    const double y = map(x);
    if (!std::isfinite(y)) {
      throw DomainError("push-forward map undefined at support point " +
                        std::to_string(x));
    }
    x = y;
  }
  return EmpiricalMeasure1D(std::move(xs));
}

}  // namespace mfvar
