#ifndef MFVAR_CLI_HPP
#define MFVAR_CLI_HPP

#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "mfvar/core.hpp"

namespace mfvar {

/// Fixed-point diagram for one agent: the identity and the map
/// u -> pi((x0 + T u) / lambda) sampled on [-1, 1], plus every intersection.
struct Figure1Data {
  double lambda = 0.0;
  double horizon = 0.0;
  double x0 = 0.0;
  std::vector<double> u;
  std::vector<double> identity;
  std::vector<double> projection;
  std::vector<double> fixed_points;
};

/// |u*(t, y)| on [0, T] x [-(1 + T), 1 + T] (NaN where the feedback is
/// undefined) and the N optimal agent trajectories sampled on the same times.
struct Figure2Data {
  double lambda = 0.0;
  double horizon = 0.0;
  std::vector<double> t;
  std::vector<double> y;
  /// Row-major [time][space].
  std::vector<double> magnitude;
  std::vector<double> initial_positions;
  std::vector<double> controls;
  /// trajectories[i][k] = x_i(t[k]).
  std::vector<std::vector<double>> trajectories;
};

using FigureData = std::variant<Figure1Data, Figure2Data>;

FigureData emit_figure_data(int which, const ProblemParams& params, int resolution,
                            double x0 = 0.5);

/// Exit codes returned by run().
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitNumerical = 2 };

/// Dispatches solve-discrete, solve-meanfield, converge, gap-scan, gronwall,
/// dichotomy and figure. args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace mfvar

#endif  // MFVAR_CLI_HPP
