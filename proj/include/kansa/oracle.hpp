#pragma once

#include "kansa/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kansa::fd {

/// Uniform depths z_i = -i L / (n - 1), top to bottom.
struct Grid1D {
  int n = 201;
  double L = 1.388;

  Grid1D(int n_, double L_) : n(n_), L(L_) {
    if (n < 3) throw std::invalid_argument("Grid1D: need at least 3 nodes");
    if (!(L > 0.0)) throw std::invalid_argument("Grid1D: length must be positive");
  }
  double dz() const { return L / (n - 1); }
  double z(int i) const { return i == n - 1 ? -L : -dz() * i; }
};

enum class Field { head, heat, transport };

/**
 * Reduced vertical problem
 *
 *   capacity du/dt = diffusivity u_zz - velocity u_z + source(t)
 *
 * with a Dirichlet or zero-gradient top and a zero-gradient or min-type
 * bottom: -diffusivity u_z = transfer min(threshold - u, 0) + offset.
 */
struct Problem1D {
  double capacity = 1.0;
  double diffusivity = 1.0;
  double velocity = 0.0;
  std::function<double(double)> source;        // pointwise
  std::function<double(double, double)> source_integral;  // over [t0, t1]; used when present
  bool top_dirichlet = true;
  double top_value = 0.0;
  bool bottom_min = false;
  double transfer = 0.0;
  double threshold = 0.0;
  double offset = 0.0;
  double initial = 0.0;
  double initial_top = 0.0;
};

inline Problem1D reduce(Field field, const percolation::ModelParameters& p, double q0, bool bear_convention = false) {
  Problem1D pr;
  switch (field) {
    case Field::head:
      pr.capacity = p.S0;
      pr.diffusivity = p.k * p.f_mu;
      pr.top_dirichlet = true;
      pr.top_value = p.h_z0;
      pr.bottom_min = true;
      pr.transfer = p.Phi_h;
      pr.threshold = p.h_C;
      pr.offset = p.k * p.f_mu * p.chi;
      pr.initial = pr.initial_top = p.h_z0;
      break;
    case Field::heat:
      pr.capacity = percolation::heat_capacity(p);
      pr.diffusivity = p.lambda;
      pr.velocity = p.rhoc * q0;
      pr.top_dirichlet = true;
      pr.top_value = p.T_z0;
      pr.bottom_min = false;
      pr.initial = p.T0;
      pr.initial_top = p.T_z0;
      break;
    case Field::transport: {
      pr.capacity = p.eps;
      pr.diffusivity = percolation::dispersion_tensor(p, q0, bear_convention)(2, 2);
      pr.velocity = q0;
      const double a = p.alpha1, amp = p.alpha1 * p.eps_s() * p.C10s;
      pr.source = [a, amp](double t) { return amp * std::exp(-a * t); };
      pr.source_integral = [a, amp](double t0, double t1) {
        return a > 0.0 ? amp / a * (std::exp(-a * t0) - std::exp(-a * t1)) : amp * (t1 - t0);
      };
      pr.top_dirichlet = false;
      pr.bottom_min = p.Phi_1 > 0.0;
      pr.transfer = p.Phi_1;
      pr.threshold = p.C_1C;
      pr.initial = pr.initial_top = 0.0;
      break;
    }
  }
  return pr;
}

struct Solution {
  std::vector<double> z;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> values;

  /// Linear interpolation in depth of the snapshot at index `k`.
  double at_depth(std::size_t k, double depth) const {
    const auto& v = values.at(k);
    const double dz = z[0] - z[1];
    const double s = std::clamp((z[0] - depth) / dz, 0.0, static_cast<double>(z.size() - 1));
    const auto i = std::min(static_cast<std::size_t>(s), z.size() - 2);
    const double w = s - static_cast<double>(i);
    return (1.0 - w) * v[static_cast<Eigen::Index>(i)] + w * v[static_cast<Eigen::Index>(i + 1)];
  }
};

/// Tridiagonal matrix with an unpivoted (Thomas) factorization; the oracle
/// matrices are diagonally dominant.
struct Tridiagonal {
  Eigen::VectorXd lo, di, up;

  Tridiagonal() = default;
  explicit Tridiagonal(int n) : lo(Eigen::VectorXd::Zero(n)), di(Eigen::VectorXd::Zero(n)), up(Eigen::VectorXd::Zero(n)) {}

  /// s I - this
  Tridiagonal shifted_negation(double s) const {
    Tridiagonal m = *this;
    m.lo = -lo;
    m.up = -up;
    m.di = s - di.array();
    return m;
  }

  void factor() {
    const Eigen::Index n = di.size();
    cp_.resize(n);
    piv_.resize(n);
    piv_[0] = di[0];
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i > 0) piv_[i] = di[i] - lo[i] * cp_[i - 1];
      if (piv_[i] == 0.0) throw std::runtime_error("Tridiagonal: zero pivot");
      cp_[i] = up[i] / piv_[i];
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const {
    const Eigen::Index n = di.size();
    Eigen::VectorXd x(n);
    x[0] = rhs[0] / piv_[0];
    for (Eigen::Index i = 1; i < n; ++i) x[i] = (rhs[i] - lo[i] * x[i - 1]) / piv_[i];
    for (Eigen::Index i = n - 2; i >= 0; --i) x[i] -= cp_[i] * x[i + 1];
    return x;
  }

 private:
  Eigen::VectorXd cp_, piv_;
};

/**
 * Implicit Euler in time, central second differences, first-order upwind
 * advection. Boundary nodes use a ghost point eliminated through the
 * boundary condition. The source enters through its exact step average
 * when an integral is supplied. Each step is a tridiagonal solve.
 */
inline Solution fd_solve(const Problem1D& pr, const Grid1D& grid, double t_end, double dt, int record_every = 1) {
  if (!(dt > 0.0) || !(t_end > 0.0)) throw std::invalid_argument("fd_solve: need positive dt and t_end");
  const int n = grid.n;
  const double h = grid.dz();
  const double Dz = pr.diffusivity;
  const double v = pr.velocity;

  Solution sol;
  for (int i = 0; i < n; ++i) sol.z.push_back(grid.z(i));
  Eigen::VectorXd u = Eigen::VectorXd::Constant(n, pr.initial);
  u[0] = pr.initial_top;
  sol.times.push_back(0.0);
  sol.values.push_back(u);

  // z decreases with index: u_z(i) ~ (u[i-1] - u[i+1]) / (2h); upwind picks the upstream side.
  // Spatial rate operator K as three diagonals: lo[i] = K(i, i-1), di[i] = K(i, i), up[i] = K(i, i+1).
  auto assemble = [&](bool active, Tridiagonal& K, Eigen::VectorXd& rhs_const) {
    K = Tridiagonal(n);
    rhs_const = Eigen::VectorXd::Zero(n);
    const double d2 = Dz / (h * h);
    for (int i = 1; i < n - 1; ++i) {
      K.lo[i] += d2;
      K.di[i] -= 2.0 * d2;
      K.up[i] += d2;
      if (v < 0.0) {  // flow toward -z, upstream is i-1
        K.lo[i] -= v / h;
        K.di[i] += v / h;
      } else if (v > 0.0) {
        K.di[i] -= v / h;
        K.up[i] += v / h;
      }
    }
    if (!pr.top_dirichlet) {
      // u_z = 0: ghost u[-1] = u[1]; advection vanishes with the gradient
      K.di[0] -= 2.0 * d2;
      K.up[0] += 2.0 * d2;
    }
    const int b = n - 1;
    // -Dz u_z = transfer (threshold - u) [active] + offset ; ghost u[n] = u[n-2] - 2 h u_z
    double slope_u = 0.0, slope_c = -pr.offset / Dz;  // u_z = slope_u * u[b] + slope_c
    if (pr.bottom_min && active) {
      slope_u = pr.transfer / Dz;
      slope_c -= pr.transfer * pr.threshold / Dz;
    }
    K.lo[b] += 2.0 * d2;
    K.di[b] += -2.0 * d2 - 2.0 * h * slope_u * d2 - v * slope_u;
    rhs_const[b] += -2.0 * h * slope_c * d2 - v * slope_c;
  };

  const double cap = pr.capacity;
  Tridiagonal K[2];
  Eigen::VectorXd kc[2];
  assemble(false, K[0], kc[0]);
  assemble(true, K[1], kc[1]);
  Tridiagonal sysm[2];
  double factored_step[2] = {0.0, 0.0};

  double t = 0.0;
  long stepno = 0;
  while (t < t_end * (1.0 - 1e-14)) {
    const double step = std::min(dt, t_end - t);
    const double t1 = t + step;
    double src = 0.0;
    if (pr.source_integral) src = pr.source_integral(t, t1) / step;
    else if (pr.source) src = pr.source(t1);

    bool active = pr.bottom_min && (u[n - 1] > pr.threshold);
    Eigen::VectorXd next;
    for (int sweep = 0;; ++sweep) {
      if (sweep > 20) throw std::runtime_error("fd_solve: outlet branch did not settle");
      const int a = active ? 1 : 0;
      if (factored_step[a] != step) {
        sysm[a] = K[a].shifted_negation(cap / step);
        if (pr.top_dirichlet) {
          sysm[a].di[0] = 1.0;
          sysm[a].up[0] = 0.0;
        }
        sysm[a].factor();
        factored_step[a] = step;
      }
      Eigen::VectorXd rhs = cap / step * u + kc[a] + Eigen::VectorXd::Constant(n, src);
      if (pr.top_dirichlet) rhs[0] = pr.top_value;
      next = sysm[a].solve(rhs);
      if (!next.allFinite()) throw std::runtime_error("fd_solve: non-finite state");
      const bool now = pr.bottom_min && (next[n - 1] > pr.threshold);
      if (now == active) break;
      active = now;
    }
    u = next;
    t = t1;
    ++stepno;
    if (stepno % record_every == 0 || t >= t_end * (1.0 - 1e-14)) {
      sol.times.push_back(t);
      sol.values.push_back(u);
    }
  }
  return sol;
}

inline Solution fd_solve(Field field, const percolation::ModelParameters& p, double q0, const Grid1D& grid,
                         double t_end, double dt, int record_every = 1, bool bear_convention = false) {
  return fd_solve(reduce(field, p, q0, bear_convention), grid, t_end, dt, record_every);
}

/**
 * Transient head error of each grid against a grid with `factor` times as many
 * intervals and the same time step, so every coarse node is also a reference
 * node and the temporal error cancels. The steady profile is affine and
 * therefore exact on every grid, so the comparison is made at time t.
 */
inline std::vector<double> head_refinement_errors(const percolation::ModelParameters& p, double L,
                                                  const std::vector<int>& node_counts, double t, double dt,
                                                  int factor = 16) {
  std::vector<double> err;
  for (int n : node_counts) {
    const auto coarse = fd_solve(Field::head, p, 0.0, Grid1D(n, L), t, dt, 1 << 30);
    const auto fine = fd_solve(Field::head, p, 0.0, Grid1D((n - 1) * factor + 1, L), t, dt, 1 << 30);
    double e = 0.0;
    for (int i = 0; i < n; ++i)
      e = std::max(e, std::abs(coarse.values.back()[i] - fine.values.back()[static_cast<Eigen::Index>(i) * factor]));
    err.push_back(e);
  }
  return err;
}

/// Steady affine head with the outlet branch active.
inline double steady_head_slope(const percolation::ModelParameters& p, double L) {
  const double K = p.k * p.f_mu;
  // K s = Phi (h_z0 - s L - h_C) + K chi  =>  s = (Phi (h_z0 - h_C) + K chi) / (K + Phi L)
  return (p.Phi_h * (p.h_z0 - p.h_C) + K * p.chi) / (K + p.Phi_h * L);
}

}  // namespace kansa::fd
