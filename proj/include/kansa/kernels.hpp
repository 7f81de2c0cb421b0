#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace kansa {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class KernelFamily { multiquadric, inverse_multiquadric, gaussian, cubic };

inline std::string to_string(KernelFamily f) {
  switch (f) {
    case KernelFamily::multiquadric: return "multiquadric";
    case KernelFamily::inverse_multiquadric: return "inverse-multiquadric";
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::cubic: return "cubic";
  }
  return "unknown";
}

inline KernelFamily parse_kernel_family(const std::string& name) {
  if (name == "multiquadric" || name == "mq") return KernelFamily::multiquadric;
  if (name == "inverse-multiquadric" || name == "imq") return KernelFamily::inverse_multiquadric;
  if (name == "gaussian" || name == "ga") return KernelFamily::gaussian;
  if (name == "cubic") return KernelFamily::cubic;
  throw std::invalid_argument("unknown kernel family '" + name + "'");
}

/**
 * Radial function Phi(x) = phi(|x - center|).
 *
 * Shape conventions:
 *   multiquadric          sqrt(r^2 + c^2)      shape = c   [length]
 *   inverse-multiquadric  1 / sqrt(r^2 + c^2)  shape = c   [length]
 *   gaussian              exp(-(e r)^2)        shape = e   [1/length]
 *   cubic                 r^3                  shape ignored
 *
 * The smooth families are written as psi(s) with s = r^2, so that
 * grad = 2 psi'(s) d and hess = 2 psi'(s) I + 4 psi''(s) d d^T hold with no
 * special case at the center.
 */
class RadialKernel {
 public:
  RadialKernel(KernelFamily family, double shape) : family_(family), shape_(shape) {
    if (family_ != KernelFamily::cubic && !(shape_ > 0.0 && std::isfinite(shape_)))
      throw std::invalid_argument("kernel shape parameter must be positive and finite");
  }

  KernelFamily family() const { return family_; }
  double shape() const { return shape_; }

  double value(double r) const {
    if (r < 0.0) throw std::domain_error("kernel_value: negative radius");
    if (family_ == KernelFamily::cubic) return r * r * r;
    return psi(r * r)[0];
  }

  Vec3 gradient(const Vec3& x, const Vec3& center) const {
    const Vec3 d = x - center;
    const double s = d.squaredNorm();
    if (family_ == KernelFamily::cubic) return 3.0 * std::sqrt(s) * d;
    return 2.0 * psi(s)[1] * d;
  }

  Mat3 hessian(const Vec3& x, const Vec3& center) const {
    const Vec3 d = x - center;
    const double s = d.squaredNorm();
    if (family_ == KernelFamily::cubic) {
      const double r = std::sqrt(s);
      if (r == 0.0) return Mat3::Zero();
      return 3.0 * r * Mat3::Identity() + (3.0 / r) * d * d.transpose();
    }
    const auto p = psi(s);
    return 2.0 * p[1] * Mat3::Identity() + 4.0 * p[2] * d * d.transpose();
  }

  double laplacian(const Vec3& x, const Vec3& center) const {
    const Vec3 d = x - center;
    const double s = d.squaredNorm();
    if (family_ == KernelFamily::cubic) return 12.0 * std::sqrt(s);
    const auto p = psi(s);
    return 6.0 * p[1] + 4.0 * p[2] * s;
  }

 private:
  // {psi, psi', psi''} as functions of s = r^2
  std::array<double, 3> psi(double s) const {
    switch (family_) {
      case KernelFamily::multiquadric: {
        const double q = s + shape_ * shape_;
        const double root = std::sqrt(q);
        return {root, 0.5 / root, -0.25 / (q * root)};
      }
      case KernelFamily::inverse_multiquadric: {
        const double q = s + shape_ * shape_;
        const double inv = 1.0 / std::sqrt(q);
        return {inv, -0.5 * inv / q, 0.75 * inv / (q * q)};
      }
      case KernelFamily::gaussian: {
        const double e2 = shape_ * shape_;
        const double g = std::exp(-e2 * s);
        return {g, -e2 * g, e2 * e2 * g};
      }
      case KernelFamily::cubic:
        break;
    }
    throw std::logic_error("psi undefined for cubic kernel");
  }

  KernelFamily family_;
  double shape_;
};

inline double kernel_value(const RadialKernel& k, double r) { return k.value(r); }
inline Vec3 kernel_gradient(const RadialKernel& k, const Vec3& x, const Vec3& c) { return k.gradient(x, c); }
inline Mat3 kernel_hessian(const RadialKernel& k, const Vec3& x, const Vec3& c) { return k.hessian(x, c); }
inline double kernel_laplacian(const RadialKernel& k, const Vec3& x, const Vec3& c) { return k.laplacian(x, c); }

/// Monomials in (x1, x2, x3) up to a total degree, graded lexicographic:
/// 1, x1, x2, x3, x1^2, x1 x2, x1 x3, x2^2, x2 x3, x3^2, ...
class PolyBasis {
 public:
  explicit PolyBasis(int degree = 1) : degree_(degree) {
    if (degree < 0) throw std::invalid_argument("polynomial degree must be non-negative");
    for (int total = 0; total <= degree; ++total)
      for (int a = total; a >= 0; --a)
        for (int b = total - a; b >= 0; --b) exponents_.push_back({a, b, total - a - b});
  }

  /// Empty basis (no augmentation).
  static PolyBasis none() {
    PolyBasis p(0);
    p.exponents_.clear();
    p.degree_ = -1;
    return p;
  }

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(exponents_.size()); }

  static int count_for_degree(int degree) {
    return degree < 0 ? 0 : (degree + 1) * (degree + 2) * (degree + 3) / 6;
  }

  const std::array<int, 3>& exponents(int j) const {
    check(j);
    return exponents_[static_cast<std::size_t>(j)];
  }

  /// Zero-based index j.
  double value(int j, const Vec3& x) const {
    const auto& e = exponents(j);
    return ipow(x[0], e[0]) * ipow(x[1], e[1]) * ipow(x[2], e[2]);
  }

  Vec3 gradient(int j, const Vec3& x) const {
    const auto& e = exponents(j);
    Vec3 g;
    for (int a = 0; a < 3; ++a) g[a] = partial(e, x, a, -1);
    return g;
  }

  Mat3 hessian(int j, const Vec3& x) const {
    const auto& e = exponents(j);
    Mat3 h;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) h(a, b) = partial(e, x, a, b);
    return h;
  }

 private:
  void check(int j) const {
    if (j < 0 || j >= size()) throw std::out_of_range("polynomial index out of range");
  }

  static double ipow(double v, int n) {
    double out = 1.0;
    for (int i = 0; i < n; ++i) out *= v;
    return out;
  }

  // d/dx_a (and then d/dx_b when b >= 0) of the monomial
  static double partial(std::array<int, 3> e, const Vec3& x, int a, int b) {
    double coeff = 1.0;
    for (int axis : {a, b}) {
      if (axis < 0) continue;
      if (e[static_cast<std::size_t>(axis)] == 0) return 0.0;
      coeff *= e[static_cast<std::size_t>(axis)];
      --e[static_cast<std::size_t>(axis)];
    }
    return coeff * ipow(x[0], e[0]) * ipow(x[1], e[1]) * ipow(x[2], e[2]);
  }

  int degree_;
  std::vector<std::array<int, 3>> exponents_;
};

/// One-based monomial access.
inline double poly_eval(const PolyBasis& basis, int j, const Vec3& x) { return basis.value(j - 1, x); }

inline std::pair<Vec3, Mat3> poly_derivatives(const PolyBasis& basis, int j, const Vec3& x) {
  return {basis.gradient(j - 1, x), basis.hessian(j - 1, x)};
}

}  // namespace kansa
