// Front end for the espresso percolation solver: node export, staged run, comparison.
#include "kansa/app/compare.hpp"
#include "kansa/app/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

struct Options {
  std::string config;
  std::string out = "run";
  double t_end_seconds = 0.0;
  std::string horizon = "derived";
  std::string kernel = "mq";
  double shape = 0.0;
  int degree = 1;
  double rtol = 1e-6, atol = 1e-8;
  bool clamp = false, bear = false;
  double radius = 3.0, length = 1.388;
  int slices = 6;
  bool no_oracle = false;
};

kansa::app::RunConfig make_config(const Options& o) {
  using namespace kansa::app;
  RunConfig cfg;
  if (!o.config.empty()) cfg.params = kansa::percolation::load_parameters(o.config);
  cfg.geometry.R = o.radius;
  cfg.geometry.L = o.length;
  cfg.geometry.n_slices = o.slices;
  cfg.kernel = kansa::parse_kernel_family(o.kernel);
  if (o.shape > 0.0) cfg.shape = o.shape;
  cfg.degree = o.degree;
  cfg.controls.rtol = o.rtol;
  cfg.controls.atol = o.atol;
  cfg.clamp_nonnegative = o.clamp;
  cfg.bear_convention = o.bear;
  if (o.t_end_seconds > 0.0) {
    cfg.horizon = Horizon::explicit_value;
    cfg.t_end_days = seconds_to_days(o.t_end_seconds);
  } else if (o.horizon == "t_bar") {
    cfg.horizon = Horizon::t_bar;
  } else if (o.horizon != "derived") {
    throw std::invalid_argument("unknown horizon '" + o.horizon + "' (expected derived or t_bar)");
  }
  cfg.validate();
  return cfg;
}

void add_model_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "parameter file (key = value)");
  cmd->add_option("--radius", o.radius, "cylinder radius, cm");
  cmd->add_option("--length", o.length, "cylinder height, cm");
  cmd->add_option("--slices", o.slices, "number of horizontal slices");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RBF collocation solver for espresso percolation"};
  app.require_subcommand(1);
  Options o;

  auto* nodes = app.add_subcommand("nodes", "write the node cloud as CSV");
  add_model_flags(nodes, o);
  nodes->add_option("--out", o.out, "output CSV path")->capture_default_str();

  auto* run = app.add_subcommand("run", "run head, heat, solid and transport stages");
  add_model_flags(run, o);
  run->add_option("--out", o.out, "output directory")->capture_default_str();
  run->add_option("--t-end-seconds", o.t_end_seconds, "final time in seconds (overrides --horizon)");
  run->add_option("--horizon", o.horizon, "derived or t_bar")->capture_default_str();
  run->add_option("--kernel", o.kernel, "mq, imq, ga or cubic")->capture_default_str();
  run->add_option("--shape", o.shape, "kernel shape parameter (default: from node spacing)");
  run->add_option("--degree", o.degree, "polynomial augmentation degree (-1 for none)")->capture_default_str();
  run->add_option("--rtol", o.rtol, "relative tolerance")->capture_default_str();
  run->add_option("--atol", o.atol, "absolute tolerance")->capture_default_str();
  run->add_flag("--clamp-nonnegative", o.clamp, "clamp written liquid concentrations at zero");
  run->add_flag("--bear-convention", o.bear, "use betaL - betaT for the longitudinal dispersion");

  auto* cmp = app.add_subcommand("compare", "check a run bundle against reference data and the 1-D oracle");
  cmp->add_option("--out", o.out, "run directory")->capture_default_str();
  cmp->add_flag("--no-oracle", o.no_oracle, "skip the finite-difference cross-check");

  CLI11_PARSE(app, argc, argv);

  try {
    if (nodes->parsed()) {
      const auto cfg = make_config(o);
      const auto ns = kansa::app::build_nodes(cfg.geometry);
      auto out = kansa::app::open_output(o.out);
      kansa::app::write_nodes_csv(out, ns);
      std::cout << "wrote " << ns.size() << " nodes to " << o.out << "\n";
    } else if (run->parsed()) {
      const auto cfg = make_config(o);
      const auto res = kansa::app::run_simulation(cfg);
      kansa::app::write_bundle(cfg, res, o.out);
      std::cout << "nodes " << res.nodes.size() << ", t_end " << res.t_end << " d (" << res.t_end * 86400.0 << " s)\n"
                << "q0 " << res.q0 << " cm/d\n"
                << "wall time " << res.wall.total << " s (head " << res.wall.head << ", heat " << res.wall.heat
                << ", transport " << res.wall.transport << ")\n"
                << "bundle written to " << o.out << "\n";
    } else if (cmp->parsed()) {
      kansa::app::CompareOptions opt;
      opt.run_oracle = !o.no_oracle;
      const auto rep = kansa::app::compare_bundle(o.out, opt);
      kansa::app::print_report(std::cout, rep);
      return rep.all_pass() ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
