#pragma once

#include "kansa/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace kansa {

/**
 * Horizontal layout of one slice of the cylinder.
 *
 * A square lattice of lattice_side x lattice_side points sits at the center.
 * Around it, transition_rows closed rows of 4 * (lattice_side + 1) points
 * bend from the square outline toward a circle, one row per pitch step.
 * A final ring of ring_points equally spaced points lies on the circle.
 *
 * The default gives 25 + 2 * 24 = 73 inner points plus 24 ring points.
 */
struct DiskPattern {
  int lattice_side = 5;
  int transition_rows = 2;
  int ring_points = 24;
  double pitch = 0.0;  // 0 selects R / (lattice half-width + transition_rows + 1)

  int inner_count() const {
    return lattice_side * lattice_side + (lattice_side > 0 ? transition_rows * 4 * (lattice_side + 1) : 0);
  }
  int total_count() const { return inner_count() + ring_points; }
};

struct Point2 {
  double x;
  double y;
};

inline std::vector<Point2> disk_pattern(double R, const DiskPattern& spec) {
  if (!(R > 0.0)) throw std::invalid_argument("disk_pattern: radius must be positive");
  if (spec.ring_points < 3) throw std::invalid_argument("disk_pattern: ring needs at least 3 points");
  if (spec.lattice_side < 0 || spec.transition_rows < 0)
    throw std::invalid_argument("disk_pattern: negative counts");
  if (spec.lattice_side == 0 && spec.transition_rows > 0)
    throw std::invalid_argument("disk_pattern: transition rows need a central lattice");

  const double half = 0.5 * (spec.lattice_side - 1);
  const double pitch =
      spec.pitch > 0.0 ? spec.pitch : R / (std::max(half, 0.0) + spec.transition_rows + 1.0);

  std::vector<Point2> pts;
  pts.reserve(static_cast<std::size_t>(spec.total_count()));

  for (int i = 0; i < spec.lattice_side; ++i)
    for (int j = 0; j < spec.lattice_side; ++j) pts.push_back({(i - half) * pitch, (j - half) * pitch});

  if (spec.lattice_side > 0 && spec.transition_rows > 0) {
    // perimeter of the (side + 2) square, walked counter-clockwise, unit half-width
    const int n = spec.lattice_side + 1;
    std::vector<Point2> outline;
    for (int k = 0; k < n; ++k) outline.push_back({1.0, -1.0 + 2.0 * k / n});
    for (int k = 0; k < n; ++k) outline.push_back({1.0 - 2.0 * k / n, 1.0});
    for (int k = 0; k < n; ++k) outline.push_back({-1.0, 1.0 - 2.0 * k / n});
    for (int k = 0; k < n; ++k) outline.push_back({-1.0 + 2.0 * k / n, -1.0});

    for (int row = 1; row <= spec.transition_rows; ++row) {
      const double radius = pitch * (half + row);
      const double w = static_cast<double>(row) / (spec.transition_rows + 1);
      for (const auto& s : outline) {
        const double len = std::hypot(s.x, s.y);
        const double bx = (1.0 - w) * s.x + w * s.x / len;
        const double by = (1.0 - w) * s.y + w * s.y / len;
        pts.push_back({radius * bx, radius * by});
      }
    }
  }

  for (int k = 0; k < spec.ring_points; ++k) {
    const double theta = 2.0 * std::numbers::pi * k / spec.ring_points;
    pts.push_back({R * std::cos(theta), R * std::sin(theta)});
  }
  return pts;
}

enum class NodeClass { interior = 0, top = 1, lateral = 2, bottom = 3 };

inline std::string to_string(NodeClass c) {
  switch (c) {
    case NodeClass::interior: return "interior";
    case NodeClass::top: return "top";
    case NodeClass::lateral: return "lateral";
    case NodeClass::bottom: return "bottom";
  }
  return "unknown";
}

/// Collocation points in cm, x3 pointing up, top face at x3 = 0.
struct NodeSet {
  std::vector<Vec3> points;
  std::vector<NodeClass> classes;
  std::vector<Vec3> normals;  // zero for interior nodes
  std::vector<int> interior_idx, top_idx, lateral_idx, bottom_idx;
  double R = 0.0;
  double L = 0.0;

  int size() const { return static_cast<int>(points.size()); }

  const std::vector<int>& indices(NodeClass c) const {
    switch (c) {
      case NodeClass::interior: return interior_idx;
      case NodeClass::top: return top_idx;
      case NodeClass::lateral: return lateral_idx;
      case NodeClass::bottom: return bottom_idx;
    }
    throw std::logic_error("bad node class");
  }

  void add(const Vec3& p, NodeClass c, const Vec3& n) {
    const int id = size();
    points.push_back(p);
    classes.push_back(c);
    normals.push_back(n);
    switch (c) {
      case NodeClass::interior: interior_idx.push_back(id); break;
      case NodeClass::top: top_idx.push_back(id); break;
      case NodeClass::lateral: lateral_idx.push_back(id); break;
      case NodeClass::bottom: bottom_idx.push_back(id); break;
    }
  }
};

/// Stacks the disk pattern on equally spaced planes from x3 = 0 down to x3 = -L.
/// The circle ring is dropped on both faces so no node sits on an edge.
inline NodeSet cylinder_nodes(double R, double L, int n_slices, const DiskPattern& spec = {}) {
  if (n_slices < 2) throw std::invalid_argument("cylinder_nodes: need at least 2 slices");
  if (!(L > 0.0) || !(R > 0.0)) throw std::invalid_argument("cylinder_nodes: degenerate geometry");

  const auto disk = disk_pattern(R, spec);
  const auto ring_begin = static_cast<std::size_t>(spec.inner_count());

  NodeSet ns;
  ns.R = R;
  ns.L = L;
  for (int s = 0; s < n_slices; ++s) {
    const bool top = s == 0;
    const bool bottom = s == n_slices - 1;
    const double z = top ? 0.0 : bottom ? -L : -L * s / (n_slices - 1);
    for (std::size_t i = 0; i < disk.size(); ++i) {
      const Vec3 p(disk[i].x, disk[i].y, z);
      if (i >= ring_begin) {
        if (top || bottom) continue;
        ns.add(p, NodeClass::lateral, Vec3(disk[i].x / R, disk[i].y / R, 0.0).normalized());
      } else if (top) {
        ns.add(p, NodeClass::top, Vec3(0, 0, 1));
      } else if (bottom) {
        ns.add(p, NodeClass::bottom, Vec3(0, 0, -1));
      } else {
        ns.add(p, NodeClass::interior, Vec3::Zero());
      }
    }
  }
  return ns;
}

struct NeighborStats {
  double min;
  double mean;
};

/// Exact O(N^2) scan.
inline NeighborStats nearest_neighbor_stats(const NodeSet& ns) {
  const int n = ns.size();
  if (n < 2) throw std::invalid_argument("nearest_neighbor_stats: need at least 2 nodes");
  double min_all = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j)
      if (j != i) best = std::min(best, (ns.points[i] - ns.points[j]).norm());
    min_all = std::min(min_all, best);
    sum += best;
  }
  return {min_all, sum / n};
}

/// Distinct depths present in the set, top to bottom.
inline std::vector<double> slice_depths(const NodeSet& ns, double tol = 1e-9) {
  std::vector<double> z;
  for (const auto& p : ns.points) z.push_back(p[2]);
  std::sort(z.begin(), z.end(), std::greater<>());
  std::vector<double> out;
  for (double v : z)
    if (out.empty() || std::abs(out.back() - v) > tol) out.push_back(v);
  return out;
}

}  // namespace kansa
