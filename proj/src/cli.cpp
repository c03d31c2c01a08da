#include "mfvar/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "mfvar/discrete_pmp.hpp"
#include "mfvar/experiments.hpp"
#include "mfvar/meanfield.hpp"
#include "mfvar/output.hpp"

namespace mfvar {

namespace {

using Json = nlohmann::ordered_json;

struct Output {
  Json json;
  Table table;
};

struct CommonOptions {
  std::string format = "csv";
  std::string out_path;
};

// Non-finite doubles become JSON null.
Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json cost_json(const CostBreakdown& c) {
  return Json{{"running", c.running}, {"terminal", c.terminal}, {"total", c.total}};
}

Json rows_from_table(const Table& table) {
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json obj = Json::object();
    for (std::size_t c = 0; c < row.size(); ++c) {
      const Cell& cell = row[c];
      if (const auto* d = std::get_if<double>(&cell)) {
        obj[table.columns[c]] = number(*d);
      } else if (const auto* i = std::get_if<long long>(&cell)) {
        obj[table.columns[c]] = *i;
      } else {
        obj[table.columns[c]] = std::get<std::string>(cell);
      }
    }
    rows.push_back(std::move(obj));
  }
  return rows;
}

Json config_base(const std::string& subcommand) {
  return Json{{"subcommand", subcommand}};
}

// ---- subcommands ---------------------------------------------------------

struct DiscreteArgs {
  double lambda = 0.0;
  double horizon = 1.0;
  int agents = 40;
};

Output solve_discrete(const DiscreteArgs& a) {
  const ProblemParams params(a.lambda, a.horizon, a.agents);
  const PMPSolution sol = solve_pmp(params);
  Output o;
  o.table.columns = {"agent", "x0", "control", "costate", "final_position"};
  for (std::size_t i = 0; i < sol.initial_positions.size(); ++i) {
    o.table.add_row({static_cast<long long>(i + 1), sol.initial_positions[i],
                     sol.controls[i], sol.costates[i], sol.final_positions[i]});
  }
  Json config = config_base("solve-discrete");
  config["lambda"] = a.lambda;
  config["T"] = a.horizon;
  config["N"] = a.agents;
  o.json["config"] = config;
  Json summary = {{"regime", std::string(to_string(classify_regime(params)))}};
  summary.update(cost_json(sol.cost));
  o.json["summary"] = summary;
  o.json["rows"] = rows_from_table(o.table);
  return o;
}

struct MeanfieldArgs {
  double lambda = 0.0;
  double horizon = 1.0;
  std::size_t particles = 10000;
  double dt = 1e-3;
  double slope = 0.0;  // > 0 selects the mollified sign field
  int snapshots = 10;
};

FeedbackField pick_field(double lambda, double horizon, double slope) {
  return slope > 0.0 ? mollify_sign_field(slope) : optimal_feedback(lambda, horizon);
}

Output solve_meanfield(const MeanfieldArgs& a) {
  const ProblemParams params(a.lambda, a.horizon);
  if (a.snapshots < 1) throw InvalidParameter("snapshots must be >= 1");
  const FeedbackField field = pick_field(a.lambda, a.horizon, a.slope);
  FlowOptions opts;
  opts.horizon = a.horizon;
  opts.num_particles = a.particles;
  opts.step_dt = a.dt;
  for (int j = 1; j <= a.snapshots; ++j) {
    opts.snapshot_times.push_back(a.horizon * j / static_cast<double>(a.snapshots));
  }
  const Measure1D mu0 = UniformMeasure1D(-1.0, 1.0);
  const FlowResult flow = solve_continuity(field, mu0, opts);
  const double running = 0.5 * flow.control_energy;
  const double terminal = -variance(Measure1D(flow.final_measure())) / (2.0 * a.lambda);
  const CostBreakdown cost = make_cost(running, terminal);

  Output o;
  o.table.columns = {"t", "mean", "variance", "min", "max", "w1_to_initial"};
  const Measure1D initial = EmpiricalMeasure1D(flow.initial_particles);
  const auto add = [&](double t, const EmpiricalMeasure1D& m) {
    const Measure1D mu = m;
    o.table.add_row({t, mean(mu), variance(mu), m.support().front(), m.support().back(),
                     wasserstein1(mu, initial)});
  };
  add(0.0, std::get<EmpiricalMeasure1D>(initial));
  for (std::size_t s = 0; s < flow.snapshots.size(); ++s) {
    add(flow.snapshot_times[s], flow.snapshots[s]);
  }
  Json config = config_base("solve-meanfield");
  config["lambda"] = a.lambda;
  config["T"] = a.horizon;
  config["particles"] = a.particles;
  config["dt"] = a.dt;
  config["field"] = field_name(field);
  if (a.slope > 0.0) config["slope"] = a.slope;
  o.json["config"] = config;
  Json summary = {{"method", flow.method}};
  summary.update(cost_json(cost));
  o.json["summary"] = summary;
  o.json["rows"] = rows_from_table(o.table);
  return o;
}

struct ConvergeArgs {
  double lambda = 2.0;
  double horizon = 1.0;
  std::vector<int> n_list{4, 16, 64, 256, 1024};
  std::size_t particles = 100000;
  double dt = 1e-3;
  double slope = 0.0;
};

Output converge(const ConvergeArgs& a) {
  const ProblemParams base(a.lambda, a.horizon);
  for (int n : a.n_list) ProblemParams(a.lambda, a.horizon, n);
  const FeedbackField field = pick_field(a.lambda, a.horizon, a.slope);
  ConvergenceOptions opts;
  opts.limit_particles = a.particles;
  opts.step_dt = a.dt;
  const auto rows = convergence_study(base, a.n_list, field, opts);

  Output o;
  o.table.columns = {"N", "w1_initial", "cost_N", "cost_limit", "abs_error"};
  for (const auto& r : rows) {
    o.table.add_row({static_cast<long long>(r.num_agents), r.w1_initial, r.cost_n,
                     r.cost_limit, r.abs_error});
  }
  Json config = config_base("converge");
  config["lambda"] = a.lambda;
  config["T"] = a.horizon;
  config["n_list"] = a.n_list;
  config["particles"] = a.particles;
  config["dt"] = a.dt;
  config["field"] = field_name(field);
  if (a.slope > 0.0) config["slope"] = a.slope;
  o.json["config"] = config;
  bool fit_ok = rows.size() >= 2;
  for (const auto& r : rows) fit_ok = fit_ok && r.abs_error > 0.0;
  o.json["summary"] = {{"fitted_order", fit_ok ? number(fitted_order(rows)) : Json(nullptr)}};
  o.json["rows"] = rows_from_table(o.table);
  return o;
}

struct GapArgs {
  double lambda = 0.5;
  double horizon = 1.0;
  std::vector<double> l_list{2, 8, 32, 128};
  std::size_t particles = 100000;
  double dt = 1e-3;
};

Output gap_scan(const GapArgs& a) {
  const ProblemParams params(a.lambda, a.horizon);
  for (double l : a.l_list) mollify_sign_field(l);
  const GapScan scan = lipschitz_gap_scan(params, a.l_list, a.particles, a.dt);
  Output o;
  o.table.columns = {"slope", "cost_of_mollified", "limit_cost", "gap"};
  for (const auto& r : scan.rows) {
    o.table.add_row({r.slope, r.cost_of_mollified, r.limit_cost, r.gap});
  }
  Json config = config_base("gap-scan");
  config["lambda"] = a.lambda;
  config["T"] = a.horizon;
  config["l_list"] = a.l_list;
  config["particles"] = a.particles;
  config["dt"] = a.dt;
  o.json["config"] = config;
  o.json["summary"] = {
      {"decay_exponent", number(scan.decay_exponent)},
      {"extrapolated_limit",
       scan.extrapolated_limit ? number(*scan.extrapolated_limit) : Json(nullptr)}};
  o.json["rows"] = rows_from_table(o.table);
  return o;
}

struct GronwallArgs {
  std::string field = "optimal";
  double lambda = 2.0;
  double horizon = 1.0;
  double slope = 5.0;
  int pairs = 100;
  std::uint64_t seed = 0;
  double dt = 1e-3;
};

Output gronwall(const GronwallArgs& a) {
  FeedbackField field = ConstantField{0.0};
  if (a.field == "optimal") {
    field = optimal_feedback(a.lambda, a.horizon);
  } else if (a.field == "mollified") {
    field = mollify_sign_field(a.slope);
  }
  const GronwallReport report = gronwall_sweep(field, a.pairs, a.seed, a.horizon, a.dt);
  Output o;
  o.table.columns = {"pair", "t", "lhs", "rhs", "ratio"};
  for (const auto& s : report.samples) {
    o.table.add_row({static_cast<long long>(s.pair), s.t, s.lhs, s.rhs, s.ratio});
  }
  Json config = config_base("gronwall");
  config["field"] = field_name(field);
  if (a.field == "optimal") config["lambda"] = a.lambda;
  if (a.field == "mollified") config["slope"] = a.slope;
  config["T"] = a.horizon;
  config["pairs"] = a.pairs;
  config["seed"] = a.seed;
  config["dt"] = a.dt;
  o.json["config"] = config;
  o.json["summary"] = {{"lipschitz", report.lipschitz}, {"max_ratio", number(report.max_ratio)}};
  o.json["rows"] = rows_from_table(o.table);
  return o;
}

struct DichotomyArgs {
  std::vector<double> lambdas;
  double horizon = 1.0;
};

Output dichotomy(const DichotomyArgs& a) {
  const auto cells = dichotomy_map(a.lambdas, a.horizon);
  Output o;
  o.table.columns = {"lambda", "T", "regime", "verdict", "witness_bound"};
  for (const auto& c : cells) {
    const Cell bound = c.witness_bound ? Cell(*c.witness_bound) : Cell(std::string("N-1"));
    o.table.add_row({c.lambda, c.horizon,
                     std::string(to_string(classify_regime(c.lambda, c.horizon))),
                     std::string(c.verdict == Verdict::LipschitzMinimizerExists ? "exists" : "none"),
                     bound});
  }
  Json config = config_base("dichotomy");
  config["lambda_list"] = a.lambdas;
  config["T"] = a.horizon;
  o.json["config"] = config;
  o.json["rows"] = rows_from_table(o.table);
  return o;
}

struct FigureArgs {
  int which = 2;
  double lambda = 2.0;
  double horizon = 1.0;
  int agents = 40;
  double x0 = 0.5;
  int resolution = 200;
};

Output figure(const FigureArgs& a) {
  const ProblemParams params(a.lambda, a.horizon, a.agents);
  const FigureData data = emit_figure_data(a.which, params, a.resolution, a.x0);
  Output o;
  Json config = config_base("figure");
  config["which"] = a.which;
  config["lambda"] = a.lambda;
  config["T"] = a.horizon;
  config["resolution"] = a.resolution;
  if (const auto* f1 = std::get_if<Figure1Data>(&data)) {
    config["x0"] = a.x0;
    o.table.columns = {"series", "u", "value"};
    for (std::size_t k = 0; k < f1->u.size(); ++k) {
      o.table.add_row({std::string("identity"), f1->u[k], f1->identity[k]});
    }
    for (std::size_t k = 0; k < f1->u.size(); ++k) {
      o.table.add_row({std::string("projection"), f1->u[k], f1->projection[k]});
    }
    for (double u : f1->fixed_points) o.table.add_row({std::string("fixed_point"), u, u});
    o.json["config"] = config;
    o.json["fixed_points"] = f1->fixed_points;
    o.json["rows"] = rows_from_table(o.table);
    return o;
  }
  const auto& f2 = std::get<Figure2Data>(data);
  config["N"] = a.agents;
  o.table.columns = {"series", "agent", "t", "y", "value"};
  const std::size_t ny = f2.y.size();
  Json magnitude = Json::array();
  for (std::size_t k = 0; k < f2.t.size(); ++k) {
    Json line = Json::array();
    for (std::size_t j = 0; j < ny; ++j) {
      const double v = f2.magnitude[k * ny + j];
      o.table.add_row({std::string("field"), std::string(), f2.t[k], f2.y[j], v});
      line.push_back(number(v));
    }
    magnitude.push_back(std::move(line));
  }
  Json trajectories = Json::array();
  for (std::size_t i = 0; i < f2.trajectories.size(); ++i) {
    for (std::size_t k = 0; k < f2.t.size(); ++k) {
      o.table.add_row({std::string("trajectory"), static_cast<long long>(i + 1), f2.t[k],
                       f2.trajectories[i][k], f2.controls[i]});
    }
    trajectories.push_back(Json{{"agent", i + 1},
                                {"x0", f2.initial_positions[i]},
                                {"control", f2.controls[i]},
                                {"y", f2.trajectories[i]}});
  }
  o.json["config"] = config;
  o.json["grid"] = Json{{"t", f2.t}, {"y", f2.y}, {"magnitude", std::move(magnitude)}};
  o.json["trajectories"] = std::move(trajectories);
  return o;
}

void emit(const Output& o, const CommonOptions& common, std::ostream& out) {
  std::ostringstream buf;
  if (common.format == "json") {
    write_json(buf, o.json);
  } else {
    write_csv(buf, o.table);
  }
  if (common.out_path.empty() || common.out_path == "-") {
    out << buf.str();
    out.flush();
    return;
  }
  std::ofstream file(common.out_path, std::ios::binary | std::ios::trunc);
  if (!file) throw InvalidParameter("cannot open output file " + common.out_path);
  file << buf.str();
}

void add_common(CLI::App* sub, CommonOptions& common) {
  sub->add_option("--format", common.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", common.out_path, "Output path (default: standard output)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variance-optimization control: finite-agent PMP solutions, mean-field "
               "feedbacks and regularity experiments",
               "mfvar"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  CommonOptions common;
  std::function<Output()> action;

  DiscreteArgs discrete;
  auto* sd = app.add_subcommand("solve-discrete", "Closed-form optimal controls for N agents");
  sd->add_option("--lambda", discrete.lambda, "Weight lambda (nonzero)")->required();
  sd->add_option("--T", discrete.horizon, "Horizon T");
  sd->add_option("--N", discrete.agents, "Number of agents (even)");
  add_common(sd, common);
  sd->callback([&] { action = [&] { return solve_discrete(discrete); }; });

  MeanfieldArgs meanfield;
  auto* sm = app.add_subcommand("solve-meanfield",
                                "Particle solution of the continuity equation from U(-1,1)");
  sm->add_option("--lambda", meanfield.lambda, "Weight lambda (nonzero)")->required();
  sm->add_option("--T", meanfield.horizon, "Horizon T");
  sm->add_option("--particles", meanfield.particles, "Particle count M");
  sm->add_option("--dt", meanfield.dt, "Integrator step");
  sm->add_option("--slope", meanfield.slope, "Use the mollified sign field pi(L y)");
  sm->add_option("--snapshots", meanfield.snapshots, "Reported times in (0, T]");
  add_common(sm, common);
  sm->callback([&] { action = [&] { return solve_meanfield(meanfield); }; });

  ConvergeArgs conv;
  auto* sc = app.add_subcommand("converge", "Finite-agent cost convergence to the mean-field cost");
  sc->add_option("--lambda", conv.lambda, "Weight lambda");
  sc->add_option("--T", conv.horizon, "Horizon T");
  sc->add_option("--n-list", conv.n_list, "Agent counts")->delimiter(',');
  sc->add_option("--particles", conv.particles, "Particles for the limit cost");
  sc->add_option("--dt", conv.dt, "Integrator step");
  sc->add_option("--slope", conv.slope, "Use the mollified sign field pi(L y)");
  add_common(sc, common);
  sc->callback([&] { action = [&] { return converge(conv); }; });

  GapArgs gap;
  auto* sg = app.add_subcommand("gap-scan", "Cost gap of mollified sign feedbacks, lambda in (0,T]");
  sg->add_option("--lambda", gap.lambda, "Weight lambda");
  sg->add_option("--T", gap.horizon, "Horizon T");
  sg->add_option("--l-list", gap.l_list, "Mollifier slopes")->delimiter(',');
  sg->add_option("--particles", gap.particles, "Particle count M");
  sg->add_option("--dt", gap.dt, "Integrator step");
  add_common(sg, common);
  sg->callback([&] { action = [&] { return gap_scan(gap); }; });

  GronwallArgs gw;
  auto* sw = app.add_subcommand("gronwall", "W1 stability of flows on random measure pairs");
  sw->add_option("--field", gw.field, "optimal | mollified | zero")
      ->check(CLI::IsMember({"optimal", "mollified", "zero"}));
  sw->add_option("--lambda", gw.lambda, "Weight lambda for --field optimal");
  sw->add_option("--T", gw.horizon, "Horizon T");
  sw->add_option("--slope", gw.slope, "Slope for --field mollified");
  sw->add_option("--pairs", gw.pairs, "Number of random pairs");
  sw->add_option("--seed", gw.seed, "RNG seed")->required();
  sw->add_option("--dt", gw.dt, "Integrator step");
  add_common(sw, common);
  sw->callback([&] { action = [&] { return gronwall(gw); }; });

  DichotomyArgs dich;
  auto* sy = app.add_subcommand("dichotomy", "Existence of Lipschitz minimizers per lambda");
  sy->add_option("--lambda-list", dich.lambdas, "Weights lambda")->delimiter(',')->required();
  sy->add_option("--T", dich.horizon, "Horizon T");
  add_common(sy, common);
  sy->callback([&] { action = [&] { return dichotomy(dich); }; });

  FigureArgs fig;
  auto* sf = app.add_subcommand("figure", "Data for the fixed-point diagram (1) or trajectory fan (2)");
  sf->add_option("--which", fig.which, "1 or 2")->check(CLI::IsMember({1, 2}));
  sf->add_option("--lambda", fig.lambda, "Weight lambda");
  sf->add_option("--T", fig.horizon, "Horizon T");
  sf->add_option("--N", fig.agents, "Number of agents");
  sf->add_option("--x0", fig.x0, "Initial position for figure 1");
  sf->add_option("--resolution", fig.resolution, "Samples per axis");
  add_common(sf, common);
  sf->callback([&] { action = [&] { return figure(fig); }; });

  std::vector<const char*> argv{"mfvar"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return kExitValidation;
  }

  try {
    emit(action(), common, out);
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const DomainError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace mfvar
