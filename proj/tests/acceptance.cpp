// End-to-end acceptance checks on the paper configuration. One line per criterion.
#include "kansa/app/compare.hpp"
#include "kansa/app/pipeline.hpp"
#include "kansa/oracle.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <set>
#include <random>
#include <sstream>

using namespace kansa;
using namespace kansa::app;

namespace {

constexpr double kHeadTol = 0.01;
constexpr double kRuntimeLimit = 60.0;  // s
constexpr double kSameDepthTol = 1e-3;
constexpr double kAffineTol = 1e-3;     // of the profile range
constexpr double kTempTol = 1e-3;
constexpr double kTempRefTol = 5e-3;
constexpr double kMonotoneSlack = 1e-3 * 88.0;  // the temperature tolerance, in degrees
constexpr double kSolidOdeRtol = 1e-6;
constexpr double kSolidPaperTol = 1e-3;
constexpr double kSolidRefTol = 1.5e-2;
constexpr double kNoFlowOracleTol = 1e-6;
constexpr double kNoFlowKansaTol = 1e-2;
constexpr double kLiquidL2Tol = 0.15;
constexpr double kKernelRtol = 1e-5;
constexpr double kPatchTol = 1e-8;
constexpr double kSlopeTarget = 2.0, kSlopeTol = 0.2;
constexpr double kOracleTol = 0.01;
constexpr double kRefinementFactor = 4.0;

std::set<int> failed;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) failed.insert(id);
}

template <class... T>
std::string fmt(const char* f, T... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<int> nodes_at(const NodeSet& ns, double z) {
  std::vector<int> out;
  for (int j = 0; j < ns.size(); ++j)
    if (std::abs(ns.points[static_cast<std::size_t>(j)][2] - z) < 1e-9) out.push_back(j);
  return out;
}

bool unimodal(const std::vector<double>& v, double slack) {
  const auto peak = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
  if (peak == 0 || peak + 1 == v.size()) return false;
  for (std::size_t k = 1; k < v.size(); ++k) {
    if (k <= peak && v[k] < v[k - 1] - slack) return false;
    if (k > peak && v[k] > v[k - 1] + slack) return false;
  }
  return true;
}

void criterion1(const RunResult& r) {
  double worst_col = 0, worst_ref = 0;
  for (const auto& row : kHeadTable)
    for (int j : nodes_at(r.nodes, row.height)) {
      const double h = r.head.nodal_values.back()[j];
      worst_col = std::max(worst_col, relative_error(h, row.collocation));
      worst_ref = std::max(worst_ref, relative_error(h, row.reference_code));
    }
  report(1, worst_col <= kHeadTol && worst_ref <= kHeadTol && r.wall.total < kRuntimeLimit,
         fmt("head max rel err %.3g vs collocation column, %.3g vs reference code (tol %.2g); run %.1f s (< %.0f s)",
             worst_col, worst_ref, kHeadTol, r.wall.total, kRuntimeLimit));
}

void criterion2(const RunResult& r) {
  const auto depths = slice_depths(r.nodes);
  const auto& h = r.head.nodal_values.back();
  double spread = 0;
  std::vector<double> mean;
  for (double z : depths) {
    double lo = INFINITY, hi = -INFINITY, sum = 0;
    const auto idx = nodes_at(r.nodes, z);
    for (int j : idx) {
      lo = std::min(lo, h[j]);
      hi = std::max(hi, h[j]);
      sum += h[j];
    }
    mean.push_back(sum / static_cast<double>(idx.size()));
    spread = std::max(spread, (hi - lo) / std::abs(mean.back()));
  }
  // least-squares line through the depth means
  Eigen::MatrixXd X(static_cast<Eigen::Index>(depths.size()), 2);
  Eigen::VectorXd y(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = depths[static_cast<std::size_t>(i)];
    y[i] = mean[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd fit = X.colPivHouseholderQr().solve(y);
  const double range = y.maxCoeff() - y.minCoeff();
  const double resid = (X * fit - y).cwiseAbs().maxCoeff() / range;
  report(2, spread <= kSameDepthTol && resid <= kAffineTol,
         fmt("same-depth spread %.3g (tol %.1g); affine residual %.3g of range (tol %.1g); slope %.6g", spread,
             kSameDepthTol, resid, kAffineTol, fit[1]));
}

void criterion3(const RunResult& r) {
  const auto& T = r.heat.nodal_values.back();
  const double worst_final = (T.array() - 88.0).abs().maxCoeff() / 88.0;
  double worst_ref = 0;
  for (const auto& row : kTemperatureTable)
    for (int j : nodes_at(r.nodes, row.height))
      worst_ref = std::max(worst_ref, relative_error(T[j], row.reference_code));
  double worst_dip = 0;
  for (int j : r.nodes.interior_idx) {
    double running = r.heat.nodal_values.front()[j];
    for (const auto& v : r.heat.nodal_values) {
      worst_dip = std::max(worst_dip, running - v[j]);
      running = std::max(running, v[j]);
    }
  }
  // same check on the interior slice averages, reported only
  double slice_dip = 0;
  for (double z : slice_depths(r.nodes)) {
    std::vector<int> idx;
    for (int j : nodes_at(r.nodes, z))
      if (r.nodes.classes[static_cast<std::size_t>(j)] == NodeClass::interior) idx.push_back(j);
    if (idx.empty()) continue;
    double running = -INFINITY;
    for (const auto& v : r.heat.nodal_values) {
      double m = 0;
      for (int j : idx) m += v[j];
      m /= static_cast<double>(idx.size());
      if (std::isfinite(running)) slice_dip = std::max(slice_dip, running - m);
      running = std::max(running, m);
    }
  }
  report(3, worst_final <= kTempTol && worst_ref <= kTempRefTol && worst_dip <= kMonotoneSlack,
         fmt("final max rel dev from 88 %.3g (tol %.1g); max dev vs reference code %.3g (tol %.1g); "
             "largest interior node dip %.3g C (allowed %.3g C); largest slice-average dip %.3g C",
             worst_final, kTempTol, worst_ref, kTempRefTol, worst_dip, kMonotoneSlack, slice_dip));
}

void criterion4(const RunConfig& cfg, const RunResult& r) {
  const auto& p = cfg.params;
  bool exact = true;
  for (std::size_t k = 0; k < r.solid_times.size(); ++k)
    exact = exact && (r.solid_values[k].array() == percolation::solid_concentration(p.C10s, p.alpha1, r.solid_times[k])).all();

  CollocationSystem ode;
  ode.A = Eigen::MatrixXd::Identity(1, 1);
  ode.B = Eigen::MatrixXd::Constant(1, 1, -p.alpha1);
  ode.E = Eigen::MatrixXd::Identity(1, 1);
  ode.g = Eigen::VectorXd::Zero(1);
  ode.kinds = {RowKind::differential};
  IntegratorControls ctl;
  ctl.rtol = 1e-9;
  ctl.atol = 1e-16;
  const auto s = integrate(ode, consistent_initialize(ode, Eigen::VectorXd::Constant(1, p.C10s), 0.0), r.t_end, ctl);
  double ode_err = 0;
  for (std::size_t k = 0; k < s.times.size(); ++k)
    ode_err = std::max(ode_err, relative_error(s.nodal_values[k][0], percolation::solid_concentration(p.C10s, p.alpha1, s.times[k])));

  const double final_value = percolation::solid_concentration(p.C10s, p.alpha1, r.t_end);
  const double e_paper = relative_error(final_value, kSolidFinalCollocation);
  const double e_ref = relative_error(final_value, kSolidFinalReferenceCode);
  report(4, exact && ode_err <= kSolidOdeRtol && e_paper <= kSolidPaperTol && e_ref <= kSolidRefTol,
         fmt("analytic path exact: %s; ODE path max rel err %.3g (tol %.1g); at t = %.6g d value %.6g, "
             "rel err %.3g vs 4.3888e-3 (tol %.1g), %.3g vs 4.32814e-3 (tol %.2g)",
             exact ? "yes" : "no", ode_err, kSolidOdeRtol, r.t_end, final_value, e_paper, kSolidPaperTol, e_ref,
             kSolidRefTol));
}

void criterion5(const RunConfig& cfg, const RunResult& r, const fd::Solution& oracle) {
  const auto& p = cfg.params;
  // unimodality: every oracle node and the node average of the collocation run
  bool oracle_uni = true;
  for (Eigen::Index i = 0; i < oracle.values.front().size(); ++i) {
    std::vector<double> c;
    for (const auto& v : oracle.values) c.push_back(v[i]);
    oracle_uni = oracle_uni && unimodal(c, 0.0);
  }
  std::vector<double> avg;
  for (const auto& v : r.transport.nodal_values) avg.push_back(v.mean());
  const bool kansa_uni = unimodal(avg, 0.0);

  // no flow, no outflux
  auto pn = p;
  pn.Phi_1 = 0.0;
  auto exact = [&](double t) { return pn.eps_s() / pn.eps * pn.C10s * (1.0 - std::exp(-pn.alpha1 * t)); };
  const auto fo = fd::fd_solve(fd::Field::transport, pn, 0.0, fd::Grid1D(41, cfg.geometry.L), r.t_end, pn.t_bar / 2000);
  double oracle_err = 0;
  for (std::size_t k = 0; k < fo.times.size(); ++k)
    oracle_err = std::max(oracle_err, (fo.values[k].array() - exact(fo.times[k])).abs().maxCoeff());
  const auto tp = percolation::transport_problem(pn, 0.0);
  const auto sys = assemble(r.basis, tp.op, tp.bcs);
  const auto ks = integrate(sys, consistent_initialize(sys, percolation::transport_initial(r.nodes), 0.0), r.t_end, cfg.controls);
  double kansa_err = 0;
  for (std::size_t k = 1; k < ks.times.size(); ++k)
    kansa_err = std::max(kansa_err, (ks.nodal_values[k].array() - exact(ks.times[k])).abs().maxCoeff() / exact(ks.times[k]));

  // final profile against the oracle
  const auto depths = slice_depths(r.nodes);
  const auto prof = depth_profile(r.nodes, r.transport.nodal_values.back(), depths);
  double num = 0, den = 0;
  for (std::size_t i = 0; i < depths.size(); ++i) {
    const double c = oracle.at_depth(oracle.values.size() - 1, depths[i]);
    num += (prof[i] - c) * (prof[i] - c);
    den += c * c;
  }
  const double l2 = std::sqrt(num / den);
  const double cmin = r.transport.nodal_values.back().minCoeff();
  report(5, oracle_uni && kansa_uni && oracle_err <= kNoFlowOracleTol && kansa_err <= kNoFlowKansaTol && l2 <= kLiquidL2Tol,
         fmt("unimodal: oracle %s, collocation node average %s (peak %.4g at %.3g s); no-flow abs err oracle %.3g "
             "(tol %.1g), collocation rel err %.3g (tol %.1g); final L2 vs oracle %.3g (tol %.2g); min final value %.3g",
             oracle_uni ? "yes" : "no", kansa_uni ? "yes" : "no", *std::max_element(avg.begin(), avg.end()),
             r.transport.times[static_cast<std::size_t>(std::max_element(avg.begin(), avg.end()) - avg.begin())] * 86400.0,
             oracle_err, kNoFlowOracleTol, kansa_err, kNoFlowKansaTol, l2, kLiquidL2Tol, cmin));
}

double kernel_fd_worst() {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-1.5, 1.5);
  double worst = 0;
  const double h = 1e-5;
  for (auto f : {KernelFamily::multiquadric, KernelFamily::inverse_multiquadric, KernelFamily::gaussian}) {
    const RadialKernel k(f, 0.9);
    for (int trial = 0; trial < 100; ++trial) {
      const Vec3 x(U(rng), U(rng), U(rng)), c(U(rng), U(rng), U(rng));
      const Vec3 g = k.gradient(x, c);
      const Mat3 H = k.hessian(x, c);
      for (int a = 0; a < 3; ++a) {
        const Vec3 e = h * Vec3::Unit(a);
        const double gfd = (k.value((x + e - c).norm()) - k.value((x - e - c).norm())) / (2 * h);
        const Vec3 hfd = (k.gradient(x + e, c) - k.gradient(x - e, c)) / (2 * h);
        worst = std::max(worst, std::abs(g[a] - gfd) / std::max(g.cwiseAbs().maxCoeff(), 1e-300));
        worst = std::max(worst, (H.col(a) - hfd).cwiseAbs().maxCoeff() / std::max(H.cwiseAbs().maxCoeff(), 1e-300));
      }
    }
  }
  return worst;
}

void criterion6(const RunResult& r) {
  const double kern = kernel_fd_worst();

  // steady degree-1 patch: u = 4 - 3 x3
  BoundaryConditions bcs;
  bcs.top = BoundarySpec::dirichlet(4.0);
  bcs.lateral = BoundarySpec::neumann(0.0);
  bcs.bottom = BoundarySpec::neumann(3.0);
  const auto sys = assemble(r.basis, OperatorSpec::constant(1.0, Mat3::Identity(), Vec3::Zero()), bcs);
  const Eigen::VectorXd u = sys.B.partialPivLu().solve(-sys.g);
  const Eigen::VectorXd nodal = sys.nodal(u);
  double patch = 0;
  for (int j = 0; j < r.nodes.size(); ++j)
    patch = std::max(patch, std::abs(nodal[j] - (4.0 - 3.0 * r.nodes.points[static_cast<std::size_t>(j)][2])) / 8.164);

  int nonzero = 0;
  for (Eigen::Index i = 0; i < sys.A.rows(); ++i) nonzero += sys.A.row(i).cwiseAbs().maxCoeff() > 0.0;

  const double alg = std::max({r.head.stats.max_algebraic_ratio, r.heat.stats.max_algebraic_ratio,
                               r.transport.stats.max_algebraic_ratio});

  CollocationSystem decay;
  decay.A = Eigen::MatrixXd::Identity(1, 1);
  decay.B = -Eigen::MatrixXd::Identity(1, 1);
  decay.E = Eigen::MatrixXd::Identity(1, 1);
  decay.g = Eigen::VectorXd::Zero(1);
  decay.kinds = {RowKind::differential};
  std::vector<double> err;
  for (double h : {0.1, 0.05, 0.025, 0.0125}) {
    IntegratorControls ctl;
    ctl.fixed_dt = h;
    const auto s = integrate(decay, consistent_initialize(decay, Eigen::VectorXd::Ones(1), 0.0), 1.0, ctl);
    err.push_back(std::abs(s.nodal_values.back()[0] - std::exp(-1.0)));
  }
  double smin = INFINITY, smax = -INFINITY;
  for (std::size_t i = 1; i < err.size(); ++i) {
    const double s = std::log2(err[i - 1] / err[i]);
    smin = std::min(smin, s);
    smax = std::max(smax, s);
  }
  const auto& ns = r.nodes;
  const bool counts = ns.interior_idx.size() == 292 && ns.top_idx.size() == 73 && ns.lateral_idx.size() == 96 &&
                      ns.bottom_idx.size() == 73;
  report(6,
         kern <= kKernelRtol && patch <= kPatchTol && nonzero == 292 && alg <= 1.0 &&
             std::abs(smin - kSlopeTarget) <= kSlopeTol && std::abs(smax - kSlopeTarget) <= kSlopeTol && counts,
         fmt("kernel FD rel err %.3g (tol %.1g); patch rel err %.3g (tol %.1g); nonzero mass rows %d (want 292); "
             "max algebraic residual / tolerance %.3g (want <= 1); BDF2 slopes %.3f..%.3f; counts %zu/%zu/%zu/%zu",
             kern, kKernelRtol, patch, kPatchTol, nonzero, alg, smin, smax, ns.interior_idx.size(), ns.top_idx.size(),
             ns.lateral_idx.size(), ns.bottom_idx.size()));
}

void criterion7(const RunConfig& cfg, const RunResult& r, const fd::Solution& oh, const fd::Solution& ot) {
  const auto depths = slice_depths(r.nodes);
  double worst = 0;
  for (double z : depths)
    for (int j : nodes_at(r.nodes, z)) {
      worst = std::max(worst, relative_error(r.head.nodal_values.back()[j], oh.at_depth(oh.values.size() - 1, z)));
      worst = std::max(worst, relative_error(r.heat.nodal_values.back()[j], ot.at_depth(ot.values.size() - 1, z)));
    }

  // doubling the node count; halving the spacing is shown for reference
  const auto& p = cfg.params;
  const double t = 2e-6, dt = t / 50;
  const auto err = fd::head_refinement_errors(p, cfg.geometry.L, {10, 20, 40, 80, 160}, t, dt);
  const auto err_h = fd::head_refinement_errors(p, cfg.geometry.L, {11, 21, 41, 81, 161}, t, dt);
  double rmin = INFINITY;
  std::ostringstream ratios, ratios_h;
  for (std::size_t i = 1; i < err.size(); ++i) {
    rmin = std::min(rmin, err[i - 1] / err[i]);
    ratios << (i > 1 ? ", " : "") << fmt("%.2f", err[i - 1] / err[i]);
    ratios_h << (i > 1 ? ", " : "") << fmt("%.3f", err_h[i - 1] / err_h[i]);
  }
  report(7, worst <= kOracleTol && rmin >= kRefinementFactor,
         fmt("collocation vs oracle max rel err %.3g (tol %.2g); error ratio per doubling of n: %s (want >= %.0f); "
             "per halving of the spacing: %s",
             worst, kOracleTol, ratios.str().c_str(), kRefinementFactor, ratios_h.str().c_str()));
}

}  // namespace

// Usage: acceptance [--expect-fail ID ...]
// Exits 0 only when the failing criteria are exactly the expected ones, so a known
// shortfall stays visible and an unexpected pass is flagged too.
int main(int argc, char** argv) {
  std::set<int> expected;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--expect-fail") == 0 && i + 1 < argc) expected.insert(std::atoi(argv[++i]));
    else {
      std::fprintf(stderr, "usage: %s [--expect-fail ID ...]\n", argv[0]);
      return 2;
    }
  }
  try {
    RunConfig cfg;
    std::printf("running paper configuration ...\n");
    const auto r = run_simulation(cfg);
    std::printf("N = %d, t_end = %.6g d, q0 = %.6g cm/d, wall %.2f s\n", r.nodes.size(), r.t_end, r.q0, r.wall.total);

    const fd::Grid1D grid(201, cfg.geometry.L);
    const double dt = cfg.params.t_bar / 2000;
    const auto oh = fd::fd_solve(fd::Field::head, cfg.params, r.q0, grid, r.t_end, dt, 1 << 30);
    const auto ot = fd::fd_solve(fd::Field::heat, cfg.params, r.q0, grid, r.t_end, dt, 1 << 30);
    const auto oc = fd::fd_solve(fd::Field::transport, cfg.params, r.q0, grid, r.t_end, dt, 10);

    criterion1(r);
    criterion2(r);
    criterion3(r);
    criterion4(cfg, r);
    criterion5(cfg, r, oc);
    criterion6(r);
    criterion7(cfg, r, oh, ot);
  } catch (const std::exception& e) {
    std::printf("acceptance run aborted: %s\n", e.what());
    return 2;
  }
  if (failed.empty()) std::printf("all criteria passed\n");
  else {
    std::printf("failed criteria:");
    for (int id : failed) std::printf(" %d", id);
    std::printf("\n");
  }
  if (failed == expected) return 0;
  for (int id : expected)
    if (!failed.count(id)) std::printf("criterion %d was expected to fail but passed\n", id);
  return 1;
}
