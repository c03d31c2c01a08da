#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mfvar/discrete_pmp.hpp"
#include "mfvar/experiments.hpp"
#include "mfvar/meanfield.hpp"

using namespace mfvar;

namespace {

ConvergenceOptions quick() {
  ConvergenceOptions o;
  o.limit_particles = 20000;
  o.step_dt = 1e-3;
  return o;
}

// Exact cost of y' = pi(L y) from midpoint samples of Uniform(-1, 1).
double mollified_cost_oracle(double lambda, double T, double slope, int m) {
  double energy = 0.0, s2 = 0.0;
  for (int k = 0; k < m; ++k) {
    const double y0 = std::abs(-1.0 + 2.0 * (k + 0.5) / m);
    double e, y;
    if (slope * y0 >= 1.0) {
      e = T;
      y = y0 + T;
    } else {
      const double tau = std::log(1.0 / (slope * y0)) / slope;
      if (tau >= T) {
        e = 0.5 * slope * y0 * y0 * (std::exp(2 * slope * T) - 1.0);
        y = y0 * std::exp(slope * T);
      } else {
        e = 0.5 * slope * (1.0 / (slope * slope) - y0 * y0) + (T - tau);
        y = 1.0 / slope + T - tau;
      }
    }
    energy += e;
    s2 += y * y;
  }
  return 0.5 * energy / m - (s2 / m) / (2.0 * lambda);
}

}  // namespace

TEST_CASE("closed-loop cost reproduces the open-loop optimum") {
  for (double lambda : {2.0, 3.0, -1.0, -0.4}) {
    for (int n : {4, 16, 64}) {
      const ProblemParams p(lambda, 1, n);
      const double open = discrete_cost(p, initial_grid(p), closed_form_controls(p)).total;
      CHECK(closed_loop_discrete_cost(p, optimal_feedback(p), 1e-3).total ==
            doctest::Approx(open).epsilon(1e-10));
    }
  }
}

TEST_CASE("convergence_study examples") {
  const std::vector<int> ns{4, 16, 64};
  const auto rows = convergence_study(ProblemParams(2, 1), ns, SaturatedLinear{2, 1}, quick());
  REQUIRE(rows.size() == 3);
  const double expected[] = {-5.0 / 18, -17.0 / 90, -65.0 / 378};
  for (std::size_t k = 0; k < 3; ++k) {
    const int n = ns[k];
    CHECK(rows[k].num_agents == n);
    CHECK(rows[k].cost_n == doctest::Approx(expected[k]).epsilon(1e-12));
    CHECK(rows[k].cost_n == doctest::Approx(-(n + 1.0) / (6.0 * (n - 1.0))).epsilon(1e-12));
    CHECK(rows[k].cost_limit == doctest::Approx(-1.0 / 6).epsilon(1e-6));
    CHECK(rows[k].abs_error == std::abs(rows[k].cost_n - rows[k].cost_limit));
  }
  CHECK(rows[0].w1_initial > rows[1].w1_initial);
  CHECK(rows[1].w1_initial > rows[2].w1_initial);
}

TEST_CASE("convergence_study for lambda < 0 and the zero field") {
  {
    const std::vector<int> ns{64, 4};
    const auto rows = convergence_study(ProblemParams(-1, 1), ns, SaturatedLinear{-1, 1}, quick());
    REQUIRE(rows.front().num_agents == 4);
    CHECK(rows[1].abs_error < rows[0].abs_error / 8);
    CHECK(rows[0].cost_n == doctest::Approx(5.0 / 36).epsilon(1e-12));
  }
  {
    const std::vector<int> ns{4, 16, 64, 256};
    const auto rows = convergence_study(ProblemParams(2, 1), ns, ConstantField{0.0}, quick());
    for (const auto& r : rows) {
      CHECK(r.cost_n == doctest::Approx(-(r.num_agents + 1.0) / (12.0 * (r.num_agents - 1.0))).epsilon(1e-12));
      CHECK(r.cost_limit == doctest::Approx(-1.0 / 12).epsilon(1e-8));
    }
    CHECK(fitted_order(rows) >= 0.9);
  }
  const std::vector<int> ns{4};
  CHECK_THROWS_AS(convergence_study(ProblemParams(0.5, 1), ns, SignWithGap{}, quick()),
                  InvalidParameter);
  const std::vector<int> odd{5};
  CHECK_THROWS_AS(convergence_study(ProblemParams(2, 1), odd, SaturatedLinear{2, 1}, quick()),
                  InvalidParameter);
}

TEST_CASE("fitted_order recovers a known power law") {
  std::vector<ConvergenceRow> rows;
  for (int n : {8, 32, 128}) {
    ConvergenceRow r;
    r.num_agents = n;
    r.abs_error = 3.0 * std::pow(n, -1.5);
    rows.push_back(r);
  }
  CHECK(fitted_order(rows) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("convergence errors decay at first order") {
  const std::vector<int> ns{16, 64, 256, 1024};
  for (double lambda : {2.0, -1.0}) {
    const auto rows =
        convergence_study(ProblemParams(lambda, 1), ns, optimal_feedback(lambda, 1.0), quick());
    CHECK(fitted_order(rows) >= 0.9);
    for (std::size_t k = 1; k < rows.size(); ++k) {
      CHECK(rows[k].w1_initial < rows[k - 1].w1_initial);
    }
  }
}

TEST_CASE("gronwall_sweep examples") {
  const auto rep = gronwall_sweep(SaturatedLinear{2, 1}, 100, 7, 1.0);
  CHECK(rep.samples.size() == 500);
  CHECK(rep.lipschitz == doctest::Approx(1.0));
  CHECK(rep.max_ratio <= 1.0 + 1e-9);
  CHECK(rep.max_ratio > 0.0);

  const auto zero = gronwall_sweep(ConstantField{0.0}, 20, 3, 1.0);
  for (const auto& s : zero.samples) {
    CHECK(s.lhs == s.rhs);
    CHECK(s.ratio <= 1.0);
  }

  const auto moll = gronwall_sweep(MollifiedSign{5.0}, 30, 11, 1.0);
  CHECK(moll.max_ratio <= 1.0 + 1e-9);

  const auto neg = gronwall_sweep(SaturatedLinear{-1, 1}, 30, 5, 1.0);
  CHECK(neg.max_ratio <= 1.0 + 1e-9);

  CHECK_THROWS_AS(gronwall_sweep(SignWithGap{}, 5, 1, 1.0), InvalidParameter);
}

TEST_CASE("gronwall_sweep is reproducible from its seed") {
  const auto a = gronwall_sweep(MollifiedSign{3.0}, 10, 42, 1.0);
  const auto b = gronwall_sweep(MollifiedSign{3.0}, 10, 42, 1.0);
  const auto c = gronwall_sweep(MollifiedSign{3.0}, 10, 43, 1.0);
  REQUIRE(a.samples.size() == b.samples.size());
  bool differs = false;
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    CHECK(a.samples[k].lhs == b.samples[k].lhs);
    CHECK(a.samples[k].rhs == b.samples[k].rhs);
    differs = differs || a.samples[k].rhs != c.samples[k].rhs;
  }
  CHECK(differs);
}

TEST_CASE("sign_motion_limit_cost") {
  CHECK(sign_motion_limit_cost(ProblemParams(0.5, 1)) == doctest::Approx(-11.0 / 6).epsilon(1e-15));
  CHECK(sign_motion_limit_cost(ProblemParams(1, 1)) == doctest::Approx(-2.0 / 3).epsilon(1e-15));
  // Large-N finite-agent oracle.
  for (double lambda : {0.5, 1.0, 0.25}) {
    const ProblemParams big(lambda, 1, 100000);
    CHECK(std::abs(discrete_cost(big, initial_grid(big), closed_form_controls(big)).total -
                   sign_motion_limit_cost(big)) <= 1e-4);
  }
}

TEST_CASE("lipschitz_gap_scan") {
  const std::vector<double> slopes{32, 2, 128, 8};
  const int m = 10000;
  const auto scan = lipschitz_gap_scan(ProblemParams(0.5, 1), slopes, m, 1e-3);
  REQUIRE(scan.rows.size() == 4);
  const double limit = -11.0 / 6;
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& r = scan.rows[k];
    CHECK(r.limit_cost == doctest::Approx(limit).epsilon(1e-15));
    CHECK(r.gap > 0.0);
    CHECK(r.gap == r.cost_of_mollified - r.limit_cost);
    const double oracle = mollified_cost_oracle(0.5, 1.0, r.slope, m) - limit;
    CHECK(std::abs(r.gap - oracle) <= 1e-3 * oracle);
    if (k > 0) {
      CHECK(r.slope > scan.rows[k - 1].slope);
      CHECK(r.gap <= 0.5 * scan.rows[k - 1].gap);
    }
  }
  CHECK(scan.decay_exponent > 0.5);
  REQUIRE(scan.extrapolated_limit.has_value());
  CHECK(std::abs(*scan.extrapolated_limit - limit) <= 1e-3);

  const std::vector<double> crit{4, 16};
  const auto c = lipschitz_gap_scan(ProblemParams(1, 1), crit, 4000, 1e-3);
  for (const auto& r : c.rows) {
    CHECK(r.gap > 0.0);
    CHECK(r.limit_cost == doctest::Approx(-2.0 / 3));
  }
  CHECK_FALSE(c.extrapolated_limit.has_value());
  CHECK_THROWS_AS(lipschitz_gap_scan(ProblemParams(2, 1), crit, 100, 1e-2), InvalidParameter);
  CHECK_THROWS_AS(lipschitz_gap_scan(ProblemParams(-1, 1), crit, 100, 1e-2), InvalidParameter);
}

TEST_CASE("dichotomy_map") {
  const std::vector<double> lams{2, 0.5, -1, 1};
  const auto cells = dichotomy_map(lams, 1.0);
  REQUIRE(cells.size() == 4);
  CHECK(cells[0].verdict == Verdict::LipschitzMinimizerExists);
  CHECK(cells[0].witness_bound.value() == doctest::Approx(1.0));
  CHECK(cells[1].verdict == Verdict::NoLipschitzMinimizer);
  CHECK_FALSE(cells[1].witness_bound.has_value());
  CHECK(cells[2].verdict == Verdict::LipschitzMinimizerExists);
  CHECK(cells[2].witness_bound.value() == doctest::Approx(1.0));
  CHECK(cells[3].verdict == Verdict::NoLipschitzMinimizer);
  const std::vector<double> bad{1.0, 0.0};
  CHECK_THROWS_AS(dichotomy_map(bad, 1.0), InvalidParameter);

  // Verdict follows the regime, and the witness bounds hold for every N.
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> lam(-4, 4), hor(0.1, 3);
  for (int trial = 0; trial < 40; ++trial) {
    const double T = hor(rng);
    const std::vector<double> one{lam(rng)};
    if (one[0] == 0.0) continue;
    const auto cell = dichotomy_map(one, T).front();
    const bool lip = has_lipschitz_controls(classify_regime(one[0], T));
    CHECK((cell.verdict == Verdict::LipschitzMinimizerExists) == lip);
    for (int n : {2, 16, 128}) {
      const ProblemParams p(one[0], T, n);
      const auto u = closed_form_controls(p);
      const auto tr = trajectories(p, initial_grid(p), u, 4);
      const double l0 = lipschitz_constant(tr, u, 0.0);
      if (lip) {
        CHECK(l0 <= *cell.witness_bound * (1 + 1e-12));
      } else {
        CHECK(l0 == doctest::Approx(n - 1.0));
      }
    }
  }
}
