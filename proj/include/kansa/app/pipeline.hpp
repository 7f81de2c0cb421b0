#pragma once

#include "kansa/app/reference.hpp"
#include "kansa/app/report.hpp"
#include "kansa/model.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace kansa::app {

inline constexpr const char* kSummaryFormat = "kansa-percolation-run/1";
inline constexpr double kSecondsPerDay = 86400.0;

inline double seconds_to_days(double s) { return s / kSecondsPerDay; }

struct Geometry {
  double R = 3.0;
  double L = 1.388;
  int n_slices = 6;
  DiskPattern pattern;
};

enum class Horizon { derived, t_bar, explicit_value };

struct RunConfig {
  percolation::ModelParameters params;
  Geometry geometry;
  KernelFamily kernel = KernelFamily::multiquadric;
  std::optional<double> shape;
  int degree = 1;
  IntegratorControls controls;
  Horizon horizon = Horizon::derived;
  double t_end_days = 0.0;  // used with Horizon::explicit_value
  bool clamp_nonnegative = false;
  bool bear_convention = false;

  /// Final time in days. The derived horizon is where the solid decay reaches the published final value.
  double t_end() const {
    switch (horizon) {
      case Horizon::derived:
        return percolation::horizon_for_solid_value(params.C10s, params.alpha1, kSolidFinalCollocation);
      case Horizon::t_bar: return params.t_bar;
      case Horizon::explicit_value: return t_end_days;
    }
    return 0.0;
  }

  void validate() const {
    params.validate();
    if (!(t_end() > 0.0)) throw std::invalid_argument("final time must be positive");
    for (double t : controls.output_times)
      if (t < 0.0 || t > t_end()) throw std::invalid_argument("output times must lie in [0, t_end]");
  }
};

struct StageTimes {
  double head = 0, heat = 0, transport = 0, total = 0;
};

struct RunResult {
  RunResult(NodeSet n, Basis b) : nodes(std::move(n)), basis(std::move(b)) {}

  NodeSet nodes;
  Basis basis;
  double t_end = 0.0;
  double q0 = 0.0;
  FieldSeries head, heat, transport;
  std::vector<double> solid_times;
  std::vector<Eigen::VectorXd> solid_values;
  StageTimes wall;
};

class StageError : public std::runtime_error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : std::runtime_error("stage '" + stage + "' failed: " + what), stage_(stage) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline FieldSeries solve_field(const std::string& stage, const Basis& basis, const percolation::FieldProblem& fp,
                               const Eigen::VectorXd& init, double t_end, const IntegratorControls& ctl) {
  try {
    const auto sys = assemble(basis, fp.op, fp.bcs);
    const auto s0 = consistent_initialize(sys, init, 0.0);
    return integrate(sys, s0, t_end, ctl);
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

}  // namespace detail

inline NodeSet build_nodes(const Geometry& g) { return cylinder_nodes(g.R, g.L, g.n_slices, g.pattern); }

/// Head, then q0, heat, solid (closed form) and transport.
inline RunResult run_simulation(const RunConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  auto ns = build_nodes(cfg.geometry);
  auto basis = make_basis(ns, cfg.kernel, cfg.shape, cfg.degree);
  RunResult res(std::move(ns), std::move(basis));
  res.t_end = cfg.t_end();
  const auto& p = cfg.params;

  auto t0 = std::chrono::steady_clock::now();
  res.head = detail::solve_field("head", res.basis, percolation::head_problem(p), percolation::head_initial(p, res.nodes),
                                 res.t_end, cfg.controls);
  res.wall.head = detail::seconds_since(t0);
  res.q0 = percolation::extract_q0(res.head, res.basis, p);

  t0 = std::chrono::steady_clock::now();
  res.heat = detail::solve_field("heat", res.basis, percolation::heat_problem(p, res.q0),
                                 percolation::heat_initial(p, res.nodes), res.t_end, cfg.controls);
  res.wall.heat = detail::seconds_since(t0);

  t0 = std::chrono::steady_clock::now();
  res.transport = detail::solve_field("transport", res.basis, percolation::transport_problem(p, res.q0, cfg.bear_convention),
                                      percolation::transport_initial(res.nodes), res.t_end, cfg.controls);
  res.wall.transport = detail::seconds_since(t0);

  res.solid_times = res.transport.times;
  for (double t : res.solid_times)
    res.solid_values.push_back(Eigen::VectorXd::Constant(res.nodes.size(), percolation::solid_concentration(p.C10s, p.alpha1, t)));
  res.wall.total = detail::seconds_since(start);
  return res;
}

inline void write_nodes_csv(std::ostream& out, const NodeSet& ns) {
  out << "id,x1,x2,x3,class,nx,ny,nz\r\n";
  for (int j = 0; j < ns.size(); ++j) {
    const auto& p = ns.points[static_cast<std::size_t>(j)];
    const auto& n = ns.normals[static_cast<std::size_t>(j)];
    out << (j + 1) << ',' << fmt17(p[0]) << ',' << fmt17(p[1]) << ',' << fmt17(p[2]) << ','
        << to_string(ns.classes[static_cast<std::size_t>(j)]) << ',' << fmt17(n[0]) << ',' << fmt17(n[1]) << ','
        << fmt17(n[2]) << "\r\n";
  }
}

/// Mean of the final nodal values over each distinct depth.
inline std::vector<double> depth_profile(const NodeSet& ns, const Eigen::VectorXd& values,
                                         const std::vector<double>& depths) {
  std::vector<double> out;
  for (double z : depths) {
    double sum = 0.0;
    int count = 0;
    for (int j = 0; j < ns.size(); ++j)
      if (std::abs(ns.points[static_cast<std::size_t>(j)][2] - z) < 1e-9) {
        sum += values[j];
        ++count;
      }
    out.push_back(count ? sum / count : NAN);
  }
  return out;
}

inline nlohmann::json stats_json(const IntegrationStats& s) {
  return {{"accepted_steps", s.accepted},
          {"rejected_steps", s.rejected},
          {"newton_iterations", s.newton_iterations},
          {"factorizations", s.factorizations},
          {"max_algebraic_residual_ratio", s.max_algebraic_ratio}};
}

inline std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

inline nlohmann::json summary_json(const RunConfig& cfg, const RunResult& res) {
  nlohmann::json params;
  for (const auto& [key, field] : percolation::detail::parameter_fields()) params[key] = cfg.params.*field;

  const auto depths = slice_depths(res.nodes);
  std::vector<double> z;
  std::vector<std::string> cls;
  for (int j = 0; j < res.nodes.size(); ++j) {
    z.push_back(res.nodes.points[static_cast<std::size_t>(j)][2]);
    cls.push_back(to_string(res.nodes.classes[static_cast<std::size_t>(j)]));
  }
  const double solid_final = percolation::solid_concentration(cfg.params.C10s, cfg.params.alpha1, res.t_end);

  nlohmann::json j;
  j["format"] = kSummaryFormat;
  j["t_end_days"] = res.t_end;
  j["t_end_seconds"] = res.t_end * kSecondsPerDay;
  j["horizon"] = cfg.horizon == Horizon::derived ? "derived" : cfg.horizon == Horizon::t_bar ? "t_bar" : "explicit";
  j["q0_cm_per_day"] = res.q0;
  j["parameters"] = params;
  j["geometry"] = {{"R", cfg.geometry.R},
                   {"L", cfg.geometry.L},
                   {"n_slices", cfg.geometry.n_slices},
                   {"N", res.nodes.size()},
                   {"interior", res.nodes.interior_idx.size()},
                   {"top", res.nodes.top_idx.size()},
                   {"lateral", res.nodes.lateral_idx.size()},
                   {"bottom", res.nodes.bottom_idx.size()}};
  j["kernel"] = {{"family", to_string(res.basis.kernel.family())},
                 {"shape", res.basis.kernel.shape()},
                 {"degree", res.basis.poly.degree()}};
  j["tolerances"] = {{"atol", cfg.controls.atol}, {"rtol", cfg.controls.rtol}};
  j["bear_convention"] = cfg.bear_convention;
  j["clamp_nonnegative"] = cfg.clamp_nonnegative;
  j["wall_time_seconds"] = {{"head", res.wall.head},
                            {"heat", res.wall.heat},
                            {"transport", res.wall.transport},
                            {"total", res.wall.total}};
  j["nodes"] = {{"x3", z}, {"class", cls}};
  j["final"] = {{"head", to_std(res.head.nodal_values.back())},
                {"temperature", to_std(res.heat.nodal_values.back())},
                {"liquid_caffeine", to_std(res.transport.nodal_values.back())},
                {"solid_caffeine", solid_final}};
  j["profiles"] = {{"depths", depths},
                   {"head", depth_profile(res.nodes, res.head.nodal_values.back(), depths)},
                   {"temperature", depth_profile(res.nodes, res.heat.nodal_values.back(), depths)},
                   {"liquid_caffeine", depth_profile(res.nodes, res.transport.nodal_values.back(), depths)}};
  j["stats"] = {{"head", stats_json(res.head.stats)},
                {"heat", stats_json(res.heat.stats)},
                {"transport", stats_json(res.transport.stats)}};
  return j;
}

inline void write_svg(const std::filesystem::path& path, const SvgChart& chart) {
  auto out = open_output(path.string());
  out << chart.render();
}

/// CSV series, summary.json and SVG charts under `dir`.
inline void write_bundle(const RunConfig& cfg, const RunResult& res, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    auto out = open_output((dir / "nodes.csv").string());
    write_nodes_csv(out, res.nodes);
  }
  auto series = [&](const char* file, const std::vector<double>& t, const std::vector<Eigen::VectorXd>& v, bool clamp) {
    auto out = open_output((dir / file).string());
    write_series_csv(out, t, v, clamp);
  };
  series("head.csv", res.head.times, res.head.nodal_values, false);
  series("temperature.csv", res.heat.times, res.heat.nodal_values, false);
  series("solid_caffeine.csv", res.solid_times, res.solid_values, false);
  series("liquid_caffeine.csv", res.transport.times, res.transport.nodal_values, cfg.clamp_nonnegative);
  {
    auto out = open_output((dir / "summary.json").string());
    out << summary_json(cfg, res).dump(2) << "\n";
  }

  write_svg(dir / "head.svg", field_chart("hydraulic head", "cm", res.head.times, res.head.nodal_values));
  write_svg(dir / "temperature.svg", field_chart("temperature", "C", res.heat.times, res.heat.nodal_values));
  write_svg(dir / "solid_caffeine.svg", field_chart("solid caffeine", "Kg/L", res.solid_times, res.solid_values));
  auto liquid = res.transport.nodal_values;
  if (cfg.clamp_nonnegative)
    for (auto& v : liquid) v = v.cwiseMax(0.0);
  write_svg(dir / "liquid_caffeine.svg", field_chart("liquid caffeine", "Kg/L", res.transport.times, liquid));

  SvgChart mean;
  SvgChart::Series s{{}, {}, "#d62728", false, 1.5, 1.0};
  for (std::size_t k = 0; k < res.transport.times.size(); ++k) {
    s.x.push_back(res.transport.times[k] * kSecondsPerDay);
    s.y.push_back(liquid[k].mean());
  }
  mean.panels = {{"liquid caffeine, node average", "time (s)", "liquid caffeine (Kg/L)", {s}}};
  write_svg(dir / "liquid_caffeine_mean.svg", mean);
}

}  // namespace kansa::app
