#pragma once

#include "kansa/collocation.hpp"
#include "kansa/dae.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>

namespace kansa::percolation {

/**
 * Physical inputs for one chemical species (caffeine by default).
 *
 * Units: lengths cm, time d, temperature C, concentrations Kg/L,
 * heat capacities J/(cm^3 C), conductivity J/(d cm C).
 */
struct ModelParameters {
  double p_z0 = 6.0;              // inlet pressure, bar
  double T_z0 = 88.0;             // inlet temperature
  double eps = 0.305;             // porosity
  double k = 1.8282;              // hydraulic conductivity, cm/d
  double t_bar = 2.3148e-4;       // percolation horizon, d
  double rho0 = 0.01;             // reference density, only used by head_to_pressure
  double h_z0 = 6118.3;           // inlet head, cm
  double alpha1 = 3184.9;         // dissolution rate, 1/d
  double S0 = 1e-5;               // specific storage, 1/cm
  double betaT1 = 10.0;           // transverse dispersivity, cm
  double betaL1 = 100.0;          // longitudinal dispersivity, cm
  double D1 = 86400 * 1e-5;       // molecular diffusion, cm^2/d
  double rhoc = 4.18e-3;          // fluid volumetric heat capacity
  double rhoscs = 3.184e-3;       // solid volumetric heat capacity
  double lambda = 86400 * 5e-3;   // thermal conductivity
  double f_mu = 1.0;              // viscosity relation
  double chi = 0.0;               // buoyancy coefficient
  double Phi_h = 86400 * 6.5e-5;  // outlet head transfer, 1/d
  double Phi_1 = 259200.0;        // outlet solute transfer, cm/d
  double T0 = 70.0;               // initial temperature
  double C10s = 0.01254;          // initial solid concentration
  double h_C = 0.0;               // outlet head threshold, cm
  double C_1C = 0.0;              // outlet concentration threshold

  double eps_s() const { return 1.0 - eps; }

  void validate() const {
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0, 1)");
    for (auto [name, v] : {std::pair{"k", k}, {"S0", S0}, {"alpha1", alpha1}, {"Phi_h", Phi_h}, {"Phi_1", Phi_1},
                           {"lambda", lambda}, {"rhoc", rhoc}, {"rhoscs", rhoscs}, {"f_mu", f_mu}, {"t_bar", t_bar}})
      if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be positive");
    for (auto [name, v] : {std::pair{"D1", D1}, {"betaT1", betaT1}, {"betaL1", betaL1}, {"C10s", C10s}})
      if (!(v >= 0.0)) throw std::invalid_argument(std::string(name) + " must be non-negative");
  }
};

namespace detail {

inline std::map<std::string, double ModelParameters::*> parameter_fields() {
  return {{"p_z0", &ModelParameters::p_z0},     {"T_z0", &ModelParameters::T_z0},
          {"eps", &ModelParameters::eps},       {"k", &ModelParameters::k},
          {"t_bar", &ModelParameters::t_bar},   {"rho0", &ModelParameters::rho0},
          {"h_z0", &ModelParameters::h_z0},     {"alpha1", &ModelParameters::alpha1},
          {"S0", &ModelParameters::S0},         {"betaT1", &ModelParameters::betaT1},
          {"betaL1", &ModelParameters::betaL1}, {"D1", &ModelParameters::D1},
          {"rhoc", &ModelParameters::rhoc},     {"rhoscs", &ModelParameters::rhoscs},
          {"lambda", &ModelParameters::lambda}, {"f_mu", &ModelParameters::f_mu},
          {"chi", &ModelParameters::chi},       {"Phi_h", &ModelParameters::Phi_h},
          {"Phi_1", &ModelParameters::Phi_1},   {"T0", &ModelParameters::T0},
          {"C10s", &ModelParameters::C10s},     {"h_C", &ModelParameters::h_C},
          {"C_1C", &ModelParameters::C_1C}};
}

// "86400*6.5e-5" style products of plain numbers
inline double parse_product(const std::string& text) {
  double out = 1.0;
  std::stringstream ss(text);
  std::string factor;
  bool any = false;
  while (std::getline(ss, factor, '*')) {
    const auto b = factor.find_first_not_of(" \t");
    const auto e = factor.find_last_not_of(" \t");
    if (b == std::string::npos) throw std::invalid_argument("empty factor in '" + text + "'");
    const std::string f = factor.substr(b, e - b + 1);
    std::size_t used = 0;
    const double v = std::stod(f, &used);
    if (used != f.size()) throw std::invalid_argument("bad number '" + f + "'");
    out *= v;
    any = true;
  }
  if (!any) throw std::invalid_argument("missing value");
  return out;
}

}  // namespace detail

/// `key = value` lines, `#` comments. Keys are the ASCII parameter names; unknown keys are rejected.
inline ModelParameters parse_parameters(std::istream& in, ModelParameters base = {}) {
  const auto fields = detail::parameter_fields();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("line " + std::to_string(lineno) + ": expected key = value");
    std::string key = line.substr(0, eq);
    key.erase(0, key.find_first_not_of(" \t"));
    key.erase(key.find_last_not_of(" \t") + 1);
    const auto it = fields.find(key);
    if (it == fields.end()) throw std::invalid_argument("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    std::string value = line.substr(eq + 1);
    value.erase(value.find_last_not_of(" \t\r") + 1);
    try {
      base.*(it->second) = detail::parse_product(value);
    } catch (const std::exception& e) {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

inline ModelParameters load_parameters(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open parameter file '" + path + "'");
  return parse_parameters(in);
}

inline void write_parameters(std::ostream& out, const ModelParameters& p) {
  out.precision(17);
  for (const auto& [key, field] : detail::parameter_fields()) out << key << " = " << p.*field << "\n";
}

struct AlphaCoefficients {
  double A0 = 0, a = 0, b = 0, c = 0, d = 0, f = 0, l = 0, m = 0;
};

/// Dissolution rate as a quadratic-in-each response surface of inlet temperature and pressure.
inline double alpha_rate(const AlphaCoefficients& k, double p_z0, double T_z0) {
  const double T = T_z0, p = p_z0;
  return k.A0 + k.a * T + k.b * p + k.c * T * T + k.d * p * p + k.f * T * p + k.l * T * T * p + k.m * T * p * p;
}

inline double solid_concentration(double C10s, double alpha1, double t) {
  if (t < 0.0) throw std::domain_error("solid_concentration: negative time");
  return C10s * std::exp(-alpha1 * t);
}

/// Horizon at which the solid concentration has decayed to `target`.
inline double horizon_for_solid_value(double C10s, double alpha1, double target) {
  return std::log(C10s / target) / alpha1;
}

/// Liquid source R and solid sink R^s for the current solid concentration; R + R^s = 0.
inline std::pair<double, double> reaction_rates(const ModelParameters& p, double solid) {
  const double r = p.alpha1 * p.eps_s() * solid;
  return {r, -r};
}

inline double head_to_pressure(double head, double x3, double rho0, double gravity, double unit_factor) {
  return (head - x3) * rho0 * gravity * unit_factor;
}

struct FieldProblem {
  OperatorSpec op;
  BoundaryConditions bcs;
};

/// Saturated flow: S0 dh/dt = div(K f_mu grad h).
inline FieldProblem head_problem(const ModelParameters& p) {
  const double cond = p.k * p.f_mu;
  const Mat3 D = cond * Mat3::Identity();
  FieldProblem fp;
  fp.op = OperatorSpec::constant(p.S0, D, Vec3::Zero());
  fp.bcs.top = BoundarySpec::dirichlet(p.h_z0);
  fp.bcs.lateral = BoundarySpec::neumann(0.0);
  // q.n = -K f_mu (grad h + chi e).n with n = -e on the outlet
  fp.bcs.bottom = BoundarySpec::robin_min(D, p.Phi_h, p.h_C, cond * p.chi);
  return fp;
}

/// Uniform head initial field.
inline Eigen::VectorXd head_initial(const ModelParameters& p, const NodeSet& nodes) {
  return Eigen::VectorXd::Constant(nodes.size(), p.h_z0);
}

/// Mean vertical Darcy flux over the interior nodes at the final state.
inline double extract_q0(const FieldSeries& head, const Basis& basis, const ModelParameters& p) {
  if (head.coeffs.empty()) throw std::invalid_argument("extract_q0: empty head series");
  const auto& c = head.coeffs.back();
  double sum = 0.0;
  for (int j : basis.nodes.interior_idx) {
    const double dh = basis.directional(basis.nodes.points[static_cast<std::size_t>(j)], Vec3::UnitZ()).dot(c);
    sum += -p.k * p.f_mu * (dh + p.chi);
  }
  return sum / static_cast<double>(basis.nodes.interior_idx.size());
}

/// Hydrodynamic dispersion for the constant flux (0, 0, q0).
inline Mat3 dispersion_tensor(const ModelParameters& p, double q0, bool bear_convention = false) {
  const Vec3 q(0.0, 0.0, q0);
  const double qn = q.norm();
  Mat3 D = (p.eps * p.D1 + p.betaT1 * qn) * Mat3::Identity();
  if (qn > 0.0) {
    const double cross = bear_convention ? p.betaL1 - p.betaT1 : p.betaL1 + p.betaT1;
    D += cross * (q * q.transpose()) / qn;
  }
  return D;
}

/// eps dC/dt + q.grad C - div(D grad C) = alpha eps_s C^s(t).
inline FieldProblem transport_problem(const ModelParameters& p, double q0, bool bear_convention = false) {
  const Mat3 D = dispersion_tensor(p, q0, bear_convention);
  const double rate = p.alpha1, amp = p.alpha1 * p.eps_s() * p.C10s;
  FieldProblem fp;
  fp.op = OperatorSpec::constant(p.eps, D, Vec3(0.0, 0.0, q0), 0.0,
                                 [rate, amp](double t, const Vec3&) { return amp * std::exp(-rate * t); });
  fp.bcs.top = BoundarySpec::neumann(0.0);
  fp.bcs.lateral = BoundarySpec::neumann(0.0);
  // -(D grad C).n = -Phi min(C_C - C, 0)
  fp.bcs.bottom = BoundarySpec::robin_min(D, p.Phi_1, p.C_1C);
  return fp;
}

inline Eigen::VectorXd transport_initial(const NodeSet& nodes) { return Eigen::VectorXd::Zero(nodes.size()); }

inline double heat_capacity(const ModelParameters& p) { return p.eps * p.rhoc + p.eps_s() * p.rhoscs; }

/// (eps rho c + eps_s rho^s c^s) dT/dt + rho c q.grad T - lambda lap T = 0.
inline FieldProblem heat_problem(const ModelParameters& p, double q0) {
  FieldProblem fp;
  fp.op = OperatorSpec::constant(heat_capacity(p), p.lambda * Mat3::Identity(), Vec3(0.0, 0.0, p.rhoc * q0));
  fp.bcs.top = BoundarySpec::dirichlet(p.T_z0);
  fp.bcs.lateral = BoundarySpec::neumann(0.0);
  fp.bcs.bottom = BoundarySpec::neumann(0.0);
  return fp;
}

/// T0 everywhere except the inlet face, which starts at the inlet temperature.
inline Eigen::VectorXd heat_initial(const ModelParameters& p, const NodeSet& nodes) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(nodes.size(), p.T0);
  for (int j : nodes.top_idx) v[j] = p.T_z0;
  return v;
}

}  // namespace kansa::percolation
