#pragma once

#include "kansa/kernels.hpp"
#include "kansa/nodes.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace kansa {

using RowVec = Eigen::RowVectorXd;

class AssemblyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Global ansatz u(x) = sum_i c_i phi(|x - x_i|) + sum_k c_{N+k} P_k(x).
struct Basis {
  RadialKernel kernel;
  PolyBasis poly;
  NodeSet nodes;

  int N() const { return nodes.size(); }
  int M() const { return poly.size(); }
  int size() const { return N() + M(); }

  RowVec values(const Vec3& x) const {
    RowVec row(size());
    for (int i = 0; i < N(); ++i) row[i] = kernel.value((x - nodes.points[i]).norm());
    for (int k = 0; k < M(); ++k) row[N() + k] = poly.value(k, x);
    return row;
  }

  /// Row r with r . c = v . grad u(x).
  RowVec directional(const Vec3& x, const Vec3& v) const {
    RowVec row(size());
    for (int i = 0; i < N(); ++i) row[i] = v.dot(kernel.gradient(x, nodes.points[i]));
    for (int k = 0; k < M(); ++k) row[N() + k] = v.dot(poly.gradient(k, x));
    return row;
  }

  RowVec laplacian(const Vec3& x) const {
    RowVec row(size());
    for (int i = 0; i < N(); ++i) row[i] = kernel.laplacian(x, nodes.points[i]);
    for (int k = 0; k < M(); ++k) row[N() + k] = poly.hessian(k, x).trace();
    return row;
  }
};

/// Shape heuristic: twice the mean nearest-neighbour spacing (its reciprocal for gaussians).
inline double default_shape(KernelFamily family, const NodeSet& nodes) {
  const double h = nearest_neighbor_stats(nodes).mean;
  switch (family) {
    case KernelFamily::gaussian: return 1.0 / (2.0 * h);
    case KernelFamily::cubic: return 1.0;
    default: return 2.0 * h;
  }
}

inline Basis make_basis(NodeSet nodes, KernelFamily family = KernelFamily::multiquadric,
                        std::optional<double> shape = std::nullopt, int degree = 1) {
  const double c = shape ? *shape : default_shape(family, nodes);
  return Basis{RadialKernel(family, c), degree < 0 ? PolyBasis::none() : PolyBasis(degree), std::move(nodes)};
}

/**
 * Second-order linear operator in the form
 *
 *   time_coeff * du/dt = div(D grad u) - a . grad u - reaction * u + source(t, x).
 *
 * div(D grad u) is expanded as D : hess(u) + (div D) . grad u; the divergence
 * field may be omitted when D is constant.
 */
struct OperatorSpec {
  double time_coeff = 1.0;
  std::function<Mat3(const Vec3&)> diffusion;
  std::function<Vec3(const Vec3&)> diffusion_divergence;
  std::function<Vec3(const Vec3&)> advection;
  double reaction = 0.0;
  std::function<double(double, const Vec3&)> source;

  static OperatorSpec constant(double time_coeff, const Mat3& D, const Vec3& a, double reaction = 0.0,
                               std::function<double(double, const Vec3&)> source = {}) {
    OperatorSpec op;
    op.time_coeff = time_coeff;
    op.diffusion = [D](const Vec3&) { return D; };
    op.advection = [a](const Vec3&) { return a; };
    op.reaction = reaction;
    op.source = std::move(source);
    return op;
  }
};

enum class BoundaryKind { dirichlet, neumann, robin_min };

/**
 * dirichlet:  u = value
 * neumann:    n . (F grad u) = value
 * robin_min:  n . (F grad u) = transfer * min(threshold - u, 0) + value
 */
struct BoundarySpec {
  BoundaryKind kind = BoundaryKind::dirichlet;
  double value = 0.0;
  Mat3 flux = Mat3::Identity();
  double transfer = 0.0;
  double threshold = 0.0;

  static BoundarySpec dirichlet(double g) { return {BoundaryKind::dirichlet, g, Mat3::Identity(), 0.0, 0.0}; }
  static BoundarySpec neumann(double g = 0.0, const Mat3& flux = Mat3::Identity()) {
    return {BoundaryKind::neumann, g, flux, 0.0, 0.0};
  }
  static BoundarySpec robin_min(const Mat3& flux, double transfer, double threshold, double g = 0.0) {
    return {BoundaryKind::robin_min, g, flux, transfer, threshold};
  }
};

struct BoundaryConditions {
  std::optional<BoundarySpec> top, lateral, bottom;

  const std::optional<BoundarySpec>& operator[](NodeClass c) const {
    switch (c) {
      case NodeClass::top: return top;
      case NodeClass::lateral: return lateral;
      case NodeClass::bottom: return bottom;
      case NodeClass::interior: break;
    }
    throw std::logic_error("interior nodes carry no boundary condition");
  }
};

/// Row of the spatial rate div(D grad u) - a . grad u - r u at x (source excluded).
inline RowVec apply_operator_row(const Basis& basis, const OperatorSpec& op, const Vec3& x) {
  const Mat3 D = op.diffusion ? op.diffusion(x) : Mat3::Zero();
  Vec3 drift = op.advection ? Vec3(-op.advection(x)) : Vec3::Zero();
  if (op.diffusion_divergence) drift += op.diffusion_divergence(x);

  const int N = basis.N();
  RowVec row(basis.size());
  for (int i = 0; i < N; ++i) {
    const Vec3& c = basis.nodes.points[i];
    double v = (D.array() * basis.kernel.hessian(x, c).array()).sum();
    v += drift.dot(basis.kernel.gradient(x, c));
    if (op.reaction != 0.0) v -= op.reaction * basis.kernel.value((x - c).norm());
    row[i] = v;
  }
  for (int k = 0; k < basis.M(); ++k) {
    double v = (D.array() * basis.poly.hessian(k, x).array()).sum();
    v += drift.dot(basis.poly.gradient(k, x));
    if (op.reaction != 0.0) v -= op.reaction * basis.poly.value(k, x);
    row[N + k] = v;
  }
  return row;
}

/// Data for the min(threshold - u(x_j), 0) term of a robin_min row.
struct MinTerm {
  int row = 0;
  double transfer = 0.0;
  double threshold = 0.0;
  RowVec value_row;
};

/// B u = value (+ min term), with the min term described separately.
struct BoundaryRow {
  RowVec row;
  double g = 0.0;
  std::optional<MinTerm> min_term;
};

inline BoundaryRow apply_boundary_row(const Basis& basis, const BoundarySpec& bc, const Vec3& x, const Vec3& n) {
  switch (bc.kind) {
    case BoundaryKind::dirichlet:
      return {basis.values(x), bc.value, std::nullopt};
    case BoundaryKind::neumann:
      return {basis.directional(x, bc.flux.transpose() * n), bc.value, std::nullopt};
    case BoundaryKind::robin_min:
      return {basis.directional(x, bc.flux.transpose() * n), bc.value,
              MinTerm{0, bc.transfer, bc.threshold, basis.values(x)}};
  }
  throw std::logic_error("bad boundary kind");
}

enum class RowKind { differential, algebraic };

/**
 * A du/dt = b(t, u) with
 *   b(t, u) = B u + forcing(t) + sum over robin rows of transfer * min(threshold - u(x_j), 0).
 *
 * Interior rows are divided by time_coeff so A keeps the plain interpolation
 * entries. Flux rows are divided by the largest flux-tensor entry.
 */
class CollocationSystem {
 public:
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd E;  // nodal values = E u, N x (N+M)
  Eigen::VectorXd g;  // constant boundary data
  std::vector<RowKind> kinds;
  std::vector<MinTerm> min_terms;
  std::function<void(double, Eigen::VectorXd&)> add_source;  // time-dependent part of the forcing
  std::optional<Basis> basis;

  int size() const { return static_cast<int>(A.rows()); }

  Eigen::VectorXd forcing(double t) const {
    Eigen::VectorXd f = g;
    if (add_source) add_source(t, f);
    return f;
  }

  /// Flag k is true when the min branch of min_terms[k] is active (u > threshold).
  std::vector<bool> active_set(const Eigen::VectorXd& u) const {
    std::vector<bool> flags(min_terms.size());
    for (std::size_t k = 0; k < min_terms.size(); ++k)
      flags[k] = min_terms[k].threshold - min_terms[k].value_row.dot(u) < 0.0;
    return flags;
  }

  Eigen::VectorXd b(double t, const Eigen::VectorXd& u) const {
    Eigen::VectorXd out = B * u + forcing(t);
    for (const auto& m : min_terms)
      out[m.row] += m.transfer * std::min(m.threshold - m.value_row.dot(u), 0.0);
    return out;
  }

  /// db/du with the min branches frozen at the given flags.
  Eigen::MatrixXd jacobian(const std::vector<bool>& flags) const {
    Eigen::MatrixXd J = B;
    for (std::size_t k = 0; k < min_terms.size(); ++k)
      if (flags[k]) J.row(min_terms[k].row) -= min_terms[k].transfer * min_terms[k].value_row;
    return J;
  }

  /// b restricted to the algebraic rows, with the min branches frozen at flags.
  /// Rows: (J_alg u = rhs_alg) form used by consistent initialisation.
  void algebraic_linearization(double t, const std::vector<bool>& flags, Eigen::MatrixXd& C,
                               Eigen::VectorXd& d) const {
    const Eigen::MatrixXd J = jacobian(flags);
    Eigen::VectorXd f = forcing(t);
    for (std::size_t k = 0; k < min_terms.size(); ++k)
      if (flags[k]) f[min_terms[k].row] += min_terms[k].transfer * min_terms[k].threshold;
    std::vector<int> rows;
    for (int j = 0; j < size(); ++j)
      if (kinds[static_cast<std::size_t>(j)] == RowKind::algebraic) rows.push_back(j);
    C.resize(static_cast<Eigen::Index>(rows.size()), size());
    d.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      C.row(static_cast<Eigen::Index>(r)) = J.row(rows[r]);
      d[static_cast<Eigen::Index>(r)] = -f[rows[r]];
    }
  }

  double algebraic_residual(double t, const Eigen::VectorXd& u) const {
    const Eigen::VectorXd r = b(t, u);
    double worst = 0.0;
    for (int j = 0; j < size(); ++j)
      if (kinds[static_cast<std::size_t>(j)] == RowKind::algebraic) worst = std::max(worst, std::abs(r[j]));
    return worst;
  }

  Eigen::VectorXd nodal(const Eigen::VectorXd& u) const { return E * u; }
};

inline void check_distinct(const NodeSet& nodes) {
  for (int i = 0; i < nodes.size(); ++i)
    for (int j = i + 1; j < nodes.size(); ++j)
      if ((nodes.points[i] - nodes.points[j]).norm() == 0.0)
        throw AssemblyError("duplicate collocation nodes " + std::to_string(i) + " and " + std::to_string(j));
}

/// Kernel and polynomial values on interior rows; every other row is zero.
inline Eigen::MatrixXd build_mass_matrix(const Basis& basis) {
  check_distinct(basis.nodes);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (int j : basis.nodes.interior_idx) A.row(j) = basis.values(basis.nodes.points[j]);
  return A;
}

inline Eigen::MatrixXd evaluation_matrix(const Basis& basis, const std::vector<Vec3>& points) {
  Eigen::MatrixXd E(static_cast<Eigen::Index>(points.size()), basis.size());
  for (std::size_t j = 0; j < points.size(); ++j) E.row(static_cast<Eigen::Index>(j)) = basis.values(points[j]);
  return E;
}

inline CollocationSystem assemble(const Basis& basis, const OperatorSpec& op, const BoundaryConditions& bcs) {
  if (!(op.time_coeff > 0.0)) throw AssemblyError("operator time coefficient must be positive");
  const int N = basis.N();
  const int M = basis.M();
  const int n = basis.size();

  CollocationSystem sys;
  sys.basis = basis;
  if (op.source) {
    std::vector<std::pair<int, Vec3>> sites;
    for (int j : basis.nodes.interior_idx) sites.emplace_back(j, basis.nodes.points[static_cast<std::size_t>(j)]);
    sys.add_source = [sites, source = op.source, tc = op.time_coeff](double t, Eigen::VectorXd& f) {
      for (const auto& [j, x] : sites) f[j] += source(t, x) / tc;
    };
  }
  sys.A = build_mass_matrix(basis);
  sys.B = Eigen::MatrixXd::Zero(n, n);
  sys.E = evaluation_matrix(basis, basis.nodes.points);
  sys.g = Eigen::VectorXd::Zero(n);
  sys.kinds.assign(static_cast<std::size_t>(n), RowKind::algebraic);

  for (int j = 0; j < N; ++j) {
    const NodeClass cls = basis.nodes.classes[static_cast<std::size_t>(j)];
    const Vec3& x = basis.nodes.points[static_cast<std::size_t>(j)];
    if (cls == NodeClass::interior) {
      sys.kinds[static_cast<std::size_t>(j)] = RowKind::differential;
      sys.B.row(j) = apply_operator_row(basis, op, x) / op.time_coeff;
      continue;
    }
    const auto& bc = bcs[cls];
    if (!bc) throw AssemblyError("missing boundary condition for " + to_string(cls) + " nodes");
    const BoundaryRow br = apply_boundary_row(basis, *bc, x, basis.nodes.normals[static_cast<std::size_t>(j)]);
    const double scale = bc->kind == BoundaryKind::dirichlet ? 1.0 : std::max(bc->flux.cwiseAbs().maxCoeff(), 1e-300);
    sys.B.row(j) = -br.row / scale;
    sys.g[j] = br.g / scale;
    if (br.min_term) {
      MinTerm m = *br.min_term;
      m.row = j;
      m.transfer /= scale;
      sys.min_terms.push_back(std::move(m));
    }
  }
  // orthogonality: sum_i P_k(x_i) c_i = 0
  for (int k = 0; k < M; ++k)
    for (int i = 0; i < N; ++i) sys.B(N + k, i) = basis.poly.value(k, basis.nodes.points[static_cast<std::size_t>(i)]);
  return sys;
}

inline Eigen::VectorXd evaluate_field(const Basis& basis, const Eigen::VectorXd& coeffs, const std::vector<Vec3>& X) {
  if (coeffs.size() != basis.size()) throw std::invalid_argument("evaluate_field: coefficient length mismatch");
  Eigen::VectorXd out(static_cast<Eigen::Index>(X.size()));
  for (std::size_t j = 0; j < X.size(); ++j) out[static_cast<Eigen::Index>(j)] = basis.values(X[j]).dot(coeffs);
  return out;
}

inline Vec3 evaluate_gradient(const Basis& basis, const Eigen::VectorXd& coeffs, const Vec3& x) {
  Vec3 g;
  for (int a = 0; a < 3; ++a) g[a] = basis.directional(x, Vec3::Unit(a)).dot(coeffs);
  return g;
}

/// Interpolation system [Phi P; P^T 0] used for plain RBF interpolation.
inline Eigen::MatrixXd interpolation_matrix(const Basis& basis) {
  check_distinct(basis.nodes);
  const int N = basis.N();
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  K.topRows(N) = evaluation_matrix(basis, basis.nodes.points);
  K.bottomLeftCorner(basis.M(), N) = K.topRightCorner(N, basis.M()).transpose();
  return K;
}

struct Interpolant {
  Eigen::VectorXd coeffs;
  double rcond = 0.0;  // reciprocal condition estimate of the interpolation matrix
};

inline Interpolant interpolate(const Basis& basis, const Eigen::VectorXd& values) {
  if (values.size() != basis.N()) throw std::invalid_argument("interpolate: need one value per node");
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(interpolation_matrix(basis));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(basis.size());
  rhs.head(basis.N()) = values;
  const double rc = lu.rcond();
  if (!(rc > 0.0) || !std::isfinite(rc)) throw AssemblyError("interpolation matrix is singular");
  return {lu.solve(rhs), rc};
}

}  // namespace kansa
