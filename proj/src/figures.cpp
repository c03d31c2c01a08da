#include <cmath>

#include "mfvar/cli.hpp"
#include "mfvar/discrete_pmp.hpp"
#include "mfvar/meanfield.hpp"

namespace mfvar {

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    xs[static_cast<std::size_t>(k)] =
        k == n - 1 ? b : a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  return xs;
}

Figure1Data figure1(const ProblemParams& params, int resolution, double x0) {
  Figure1Data fig;
  fig.lambda = params.lambda();
  fig.horizon = params.horizon();
  fig.x0 = x0;
  fig.u = linspace(-1.0, 1.0, resolution);
  for (double u : fig.u) {
    fig.identity.push_back(u);
    fig.projection.push_back(project_control((x0 + params.horizon() * u) / params.lambda()));
  }
  fig.fixed_points = fixed_point_candidates(params, x0);
  return fig;
}

Figure2Data figure2(const ProblemParams& params, int resolution) {
  Figure2Data fig;
  const double T = params.horizon();
  fig.lambda = params.lambda();
  fig.horizon = T;
  fig.t = linspace(0.0, T, resolution);
  fig.y = linspace(-(1.0 + T), 1.0 + T, resolution);
  const FeedbackField field = optimal_feedback(params);
  fig.magnitude.reserve(fig.t.size() * fig.y.size());
  for (double t : fig.t) {
    for (double y : fig.y) {
      fig.magnitude.push_back(is_defined(field, t, y) ? std::abs(eval_field(field, t, y))
                                                      : std::nan(""));
    }
  }
  fig.initial_positions = initial_grid(params);
  const ControlVector controls = closed_form_controls(params);
  fig.controls.assign(controls.values().begin(), controls.values().end());
  for (std::size_t i = 0; i < fig.initial_positions.size(); ++i) {
    std::vector<double> line;
    line.reserve(fig.t.size());
    for (double t : fig.t) line.push_back(fig.initial_positions[i] + t * controls[i]);
    fig.trajectories.push_back(std::move(line));
  }
  return fig;
}

}  // namespace

FigureData emit_figure_data(int which, const ProblemParams& params, int resolution,
                            double x0) {
  if (resolution < 2) throw InvalidParameter("resolution must be at least 2");
  if (which == 1) return figure1(params, resolution, x0);
  if (which == 2) return figure2(params, resolution);
  throw InvalidParameter("figure must be 1 or 2");
}

}  // namespace mfvar
