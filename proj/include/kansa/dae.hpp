#pragma once

#include "kansa/collocation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kansa {

class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Accepted state. `previous` carries the step history BDF2 needs.
struct DaeState {
  double t = 0.0;
  Eigen::VectorXd u;
  std::vector<bool> active_set;
  std::optional<std::pair<double, Eigen::VectorXd>> previous;
};

struct IntegratorControls {
  double atol = 1e-8;
  double rtol = 1e-6;
  double initial_dt = 0.0;  // 0: 1e-7 of the span
  double max_dt = std::numeric_limits<double>::infinity();
  double min_dt = 0.0;      // 0: 1e-14 of the span
  double fixed_dt = 0.0;    // > 0 disables error control
  int max_newton = 12;
  long max_steps = 1000000;
  std::vector<double> output_times;  // empty: record every accepted step
};

struct IntegrationStats {
  long accepted = 0;
  long rejected = 0;
  long newton_iterations = 0;
  long factorizations = 0;
  // max over accepted steps of |algebraic residual|_inf / (atol + rtol |nodal|_inf)
  double max_algebraic_ratio = 0.0;
};

struct FieldSeries {
  std::vector<double> times;
  std::vector<Eigen::VectorXd> coeffs;
  std::vector<Eigen::VectorXd> nodal_values;
  IntegrationStats stats;

  void record(double t, const Eigen::VectorXd& c, const Eigen::VectorXd& v) {
    if (!times.empty() && !(t > times.back())) throw std::logic_error("FieldSeries: times must increase");
    times.push_back(t);
    coeffs.push_back(c);
    nodal_values.push_back(v);
  }
};

namespace detail {

inline double wrms(const Eigen::VectorXd& err, const Eigen::VectorXd& ref, double atol, double rtol) {
  if (err.size() == 0) return 0.0;
  const Eigen::ArrayXd w = atol + rtol * ref.array().abs();
  return std::sqrt((err.array() / w).square().mean());
}

}  // namespace detail

/**
 * Constrained initial state: algebraic rows of b hold exactly, interior
 * nodal values match nodal_init in the least-squares sense over the null
 * space of the constraints. The min branches are iterated to a fixed point.
 */
inline DaeState consistent_initialize(const CollocationSystem& sys, const Eigen::VectorXd& nodal_init, double t0) {
  if (nodal_init.size() != sys.E.rows()) throw std::invalid_argument("consistent_initialize: one value per node");

  std::vector<int> diff_rows;
  for (int j = 0; j < sys.E.rows(); ++j)
    if (sys.kinds[static_cast<std::size_t>(j)] == RowKind::differential) diff_rows.push_back(j);
  Eigen::MatrixXd Ei(static_cast<Eigen::Index>(diff_rows.size()), sys.size());
  Eigen::VectorXd vi(static_cast<Eigen::Index>(diff_rows.size()));
  for (std::size_t r = 0; r < diff_rows.size(); ++r) {
    Ei.row(static_cast<Eigen::Index>(r)) = sys.E.row(diff_rows[r]);
    vi[static_cast<Eigen::Index>(r)] = nodal_init[diff_rows[r]];
  }

  std::vector<bool> flags(sys.min_terms.size());
  for (std::size_t k = 0; k < sys.min_terms.size(); ++k)
    flags[k] = sys.min_terms[k].threshold - nodal_init[sys.min_terms[k].row] < 0.0;

  for (int sweep = 0; sweep < 50; ++sweep) {
    Eigen::MatrixXd C;
    Eigen::VectorXd d;
    sys.algebraic_linearization(t0, flags, C, d);

    Eigen::VectorXd u;
    if (C.rows() == 0) {
      u = Ei.colPivHouseholderQr().solve(vi);
    } else {
      const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(C.transpose());
      const Eigen::Index rank = qr.rank();
      const Eigen::MatrixXd Q = qr.householderQ();
      const Eigen::VectorXd up = C.completeOrthogonalDecomposition().solve(d);
      if ((C * up - d).norm() > 1e-8 * (1.0 + d.norm()))
        throw IntegrationError("consistent_initialize: algebraic constraints are inconsistent");
      const Eigen::MatrixXd Z = Q.rightCols(sys.size() - rank);
      u = up;
      if (Z.cols() > 0 && Ei.rows() > 0) u += Z * (Ei * Z).colPivHouseholderQr().solve(vi - Ei * up);
    }

    const auto next = sys.active_set(u);
    if (next == flags) return DaeState{t0, u, flags, std::nullopt};
    flags = next;
  }
  throw IntegrationError("consistent_initialize: active set did not settle");
}

/// BDF1/BDF2 stepper with modified Newton and a small LU cache keyed by
/// (leading coefficient / h, active set).
class BdfStepper {
 public:
  BdfStepper(const CollocationSystem& sys, const IntegratorControls& controls) : sys_(sys), ctl_(controls) {}

  struct Result {
    DaeState state;
    int iterations = 0;
  };

  /// One step of size h from state; BDF1 when state has no history.
  std::optional<Result> advance(const DaeState& state, double h) {
    const double t1 = state.t + h;
    double gamma;
    Eigen::VectorXd beta;
    Eigen::VectorXd u;
    if (state.previous) {
      const auto& [tp, up] = *state.previous;
      const double w = h / (state.t - tp);
      const double a0 = (1.0 + 2.0 * w) / (1.0 + w);
      const double a1 = -(1.0 + w);
      const double a2 = w * w / (1.0 + w);
      gamma = a0 / h;
      beta = (a1 * state.u + a2 * up) / h;
      u = state.u + w * (state.u - up);
    } else {
      gamma = 1.0 / h;
      beta = -state.u / h;
      u = state.u;
    }

    const Eigen::VectorXd ref = sys_.E * state.u;
    std::vector<bool> flags = sys_.active_set(u);
    for (int it = 1; it <= ctl_.max_newton; ++it) {
      const Eigen::VectorXd r = sys_.A * (gamma * u + beta) - sys_.b(t1, u);
      const Eigen::VectorXd delta = factor(gamma, flags).solve(r);
      if (!delta.allFinite()) return std::nullopt;
      u -= delta;
      ++stats.newton_iterations;
      const auto next = sys_.active_set(u);
      const double change = detail::wrms(sys_.E * delta, ref, ctl_.atol, ctl_.rtol);
      if (next == flags && change <= 1e-3) {
        DaeState out{t1, u, flags, std::make_pair(state.t, state.u)};
        return Result{std::move(out), it};
      }
      flags = next;
    }
    return std::nullopt;
  }

  IntegrationStats stats;

 private:
  struct Entry {
    double gamma;
    std::vector<bool> flags;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  };

  const Eigen::PartialPivLU<Eigen::MatrixXd>& factor(double gamma, const std::vector<bool>& flags) {
    for (auto it = cache_.begin(); it != cache_.end(); ++it) {
      if (it->gamma == gamma && it->flags == flags) {
        cache_.splice(cache_.begin(), cache_, it);
        return cache_.front().lu;
      }
    }
    ++stats.factorizations;
    cache_.push_front(Entry{gamma, flags, Eigen::PartialPivLU<Eigen::MatrixXd>(gamma * sys_.A - sys_.jacobian(flags))});
    if (cache_.size() > kCacheSize) cache_.pop_back();
    return cache_.front().lu;
  }

  static constexpr std::size_t kCacheSize = 16;
  const CollocationSystem& sys_;
  IntegratorControls ctl_;
  std::list<Entry> cache_;
};

/// Single implicit step without factorization reuse.
inline DaeState step(const CollocationSystem& sys, const DaeState& state, double dt,
                     const IntegratorControls& controls = {}) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  BdfStepper stepper(sys, controls);
  auto res = stepper.advance(state, dt);
  if (!res) throw IntegrationError("step: Newton iteration did not converge");
  return std::move(res->state);
}

namespace detail {

// Quadratic (or linear) interpolation through up to three accepted states.
inline Eigen::VectorXd lagrange(const std::vector<double>& ts, const std::vector<const Eigen::VectorXd*>& ys, double t) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ys.front()->size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    double w = 1.0;
    for (std::size_t j = 0; j < ts.size(); ++j)
      if (j != i) w *= (t - ts[j]) / (ts[i] - ts[j]);
    out += w * *ys[i];
  }
  return out;
}

}  // namespace detail

/**
 * Adaptive BDF integration with step-doubling error control. Step sizes move
 * on a factor-of-two ladder so cached factorizations stay valid; only the
 * final step is clipped to land on t_end.
 */
inline FieldSeries integrate(const CollocationSystem& sys, const DaeState& state0, double t_end,
                             const IntegratorControls& controls = {}) {
  if (!(t_end > state0.t)) throw std::invalid_argument("integrate: t_end must exceed the initial time");
  const double span = t_end - state0.t;
  const double min_dt = controls.min_dt > 0.0 ? controls.min_dt : 1e-14 * span;
  double dt = controls.fixed_dt > 0.0 ? controls.fixed_dt
              : controls.initial_dt > 0.0 ? controls.initial_dt
                                          : 1e-7 * span;
  dt = std::min(dt, controls.max_dt);

  BdfStepper stepper(sys, controls);
  FieldSeries series;
  const bool record_all = controls.output_times.empty();
  std::size_t next_out = 0;
  const auto& outs = controls.output_times;
  for (double t : outs)
    if (t < state0.t || t > t_end) throw std::invalid_argument("integrate: output time outside the horizon");

  DaeState state = state0;
  Eigen::VectorXd nodal = sys.E * state.u;
  std::optional<std::pair<double, Eigen::VectorXd>> older;  // the state before state.previous

  auto emit_until = [&](double t_hi) {
    while (next_out < outs.size() && outs[next_out] <= t_hi) {
      const double to = outs[next_out++];
      if (to == state.t) {
        series.record(to, state.u, sys.E * state.u);
        continue;
      }
      std::vector<double> ts{state.t};
      std::vector<const Eigen::VectorXd*> ys{&state.u};
      if (state.previous) {
        ts.push_back(state.previous->first);
        ys.push_back(&state.previous->second);
        if (older) {
          ts.push_back(older->first);
          ys.push_back(&older->second);
        }
      }
      const Eigen::VectorXd c = detail::lagrange(ts, ys, to);
      series.record(to, c, sys.E * c);
    }
  };

  if (record_all) series.record(state.t, state.u, nodal);
  else emit_until(state.t);

  long steps = 0;
  bool grow_ok = false;
  while (state.t < t_end) {
    if (++steps > controls.max_steps) throw IntegrationError("integrate: step limit reached");
    const double remaining = t_end - state.t;
    const bool last = dt >= remaining * (1.0 - 1e-12);
    const double h = last ? remaining : dt;

    std::optional<DaeState> accepted;
    double err = 0.0;
    if (controls.fixed_dt > 0.0) {
      auto res = stepper.advance(state, h);
      if (res) accepted = std::move(res->state);
    } else {
      auto coarse = stepper.advance(state, h);
      std::optional<BdfStepper::Result> half1, half2;
      if (coarse) half1 = stepper.advance(state, 0.5 * h);
      if (half1) half2 = stepper.advance(half1->state, 0.5 * h);
      if (half2) {
        const int order = state.previous ? 2 : 1;
        const Eigen::VectorXd diff = sys.E * (half2->state.u - coarse->state.u);
        err = detail::wrms(diff, nodal, controls.atol, controls.rtol) / ((1 << order) - 1);
        if (err <= 1.0) {
          accepted = std::move(half2->state);
          // keep a full-h history so the next step ratio stays on the ladder
          accepted->previous = std::make_pair(state.t, state.u);
        }
      }
    }

    if (!accepted) {
      ++stepper.stats.rejected;
      if (controls.fixed_dt > 0.0) throw IntegrationError("integrate: fixed step failed to converge");
      dt *= 0.5;
      grow_ok = false;
      if (dt < min_dt) throw IntegrationError("integrate: step size underflow at t = " + std::to_string(state.t));
      continue;
    }

    if (last) accepted->t = t_end;
    older = state.previous;
    state = std::move(*accepted);
    nodal = sys.E * state.u;
    ++stepper.stats.accepted;

    const double scale = controls.atol + controls.rtol * nodal.cwiseAbs().maxCoeff();
    stepper.stats.max_algebraic_ratio =
        std::max(stepper.stats.max_algebraic_ratio, sys.algebraic_residual(state.t, state.u) / scale);

    if (record_all) series.record(state.t, state.u, nodal);
    else emit_until(state.t);

    if (controls.fixed_dt <= 0.0) {
      if (err < 0.125 && grow_ok) dt = std::min(2.0 * dt, controls.max_dt);
      grow_ok = err < 0.125;
    }
  }
  series.stats = stepper.stats;
  return series;
}

}  // namespace kansa
