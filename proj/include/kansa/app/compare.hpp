#pragma once

#include "kansa/app/pipeline.hpp"
#include "kansa/app/reference.hpp"
#include "kansa/oracle.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace kansa::app {

class CompareError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CompareRow {
  std::string check;
  double height = NAN;  // NAN when not tied to a depth
  double value = 0.0;
  double reference = 0.0;
  double error = 0.0;      // relative
  double tolerance = 0.0;  // relative
  bool pass() const { return std::isfinite(error) && error <= tolerance; }
};

struct CompareReport {
  std::vector<CompareRow> rows;
  bool all_pass() const {
    if (rows.empty()) return false;
    for (const auto& r : rows)
      if (!r.pass()) return false;
    return true;
  }
};

struct CompareOptions {
  int oracle_nodes = 201;
  int oracle_dt_divisions = 2000;  // dt = t_bar / divisions
  bool run_oracle = true;
};

inline double relative_error(double value, double reference) {
  const double scale = std::abs(reference) > 0.0 ? std::abs(reference) : 1.0;
  return std::abs(value - reference) / scale;
}

inline nlohmann::json load_summary(const std::filesystem::path& dir) {
  const auto path = dir / "summary.json";
  std::ifstream in(path);
  if (!in) throw CompareError("missing run bundle: cannot read '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw CompareError("malformed summary '" + path.string() + "': " + e.what());
  }
  if (j.value("format", "") != kSummaryFormat) throw CompareError("unrecognized summary format in '" + path.string() + "'");
  return j;
}

inline percolation::ModelParameters parameters_from(const nlohmann::json& summary) {
  percolation::ModelParameters p;
  const auto& jp = summary.at("parameters");
  for (const auto& [key, field] : percolation::detail::parameter_fields())
    if (jp.contains(key)) p.*field = jp.at(key).get<double>();
  p.validate();
  return p;
}

namespace detail {

/// Index of the profile depth matching `height`; throws on mismatch.
inline std::size_t depth_index(const std::vector<double>& depths, double height) {
  for (std::size_t i = 0; i < depths.size(); ++i)
    if (std::abs(depths[i] - height) < 1e-6) return i;
  std::ostringstream msg;
  msg << "height mismatch: run has no slice at x3 = " << height;
  throw CompareError(msg.str());
}

}  // namespace detail

/// Checks a run summary against embedded references, the closed-form dissolution and the 1-D oracle.
inline CompareReport compare_summary(const nlohmann::json& summary, const CompareOptions& opt = {}) {
  CompareReport rep;
  const auto p = parameters_from(summary);
  const auto& prof = summary.at("profiles");
  const auto depths = prof.at("depths").get<std::vector<double>>();
  const auto head = prof.at("head").get<std::vector<double>>();
  const auto temp = prof.at("temperature").get<std::vector<double>>();
  const auto liquid = prof.at("liquid_caffeine").get<std::vector<double>>();
  const double t_end = summary.at("t_end_days").get<double>();
  const double q0 = summary.at("q0_cm_per_day").get<double>();
  const bool bear = summary.value("bear_convention", false);

  auto add = [&](std::string check, double height, double value, double ref, double tol) {
    rep.rows.push_back({std::move(check), height, value, ref, relative_error(value, ref), tol});
  };

  for (const auto& r : kHeadTable) {
    const double v = head.at(detail::depth_index(depths, r.height));
    add("head vs collocation table", r.height, v, r.collocation, 0.01);
    add("head vs reference code", r.height, v, r.reference_code, 0.01);
  }
  for (const auto& r : kTemperatureTable) {
    const double v = temp.at(detail::depth_index(depths, r.height));
    add("temperature vs collocation table", r.height, v, r.collocation, 0.001);
    add("temperature vs reference code", r.height, v, r.reference_code, 0.005);
  }

  const double solid = summary.at("final").at("solid_caffeine").get<double>();
  add("solid vs closed form", NAN, solid, percolation::solid_concentration(p.C10s, p.alpha1, t_end), 1e-12);
  add("solid vs published collocation", NAN, solid, kSolidFinalCollocation, 0.001);
  add("solid vs reference code", NAN, solid, kSolidFinalReferenceCode, 0.015);

  if (opt.run_oracle) {
    const double L = summary.at("geometry").at("L").get<double>();
    const fd::Grid1D grid(opt.oracle_nodes, L);
    const double dt = p.t_bar / opt.oracle_dt_divisions;
    const auto oh = fd::fd_solve(fd::Field::head, p, q0, grid, t_end, dt, 1 << 30);
    const auto ot = fd::fd_solve(fd::Field::heat, p, q0, grid, t_end, dt, 1 << 30);
    const auto oc = fd::fd_solve(fd::Field::transport, p, q0, grid, t_end, dt, 1 << 30, bear);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < depths.size(); ++i) {
      add("head vs oracle", depths[i], head[i], oh.at_depth(oh.values.size() - 1, depths[i]), 0.01);
      add("temperature vs oracle", depths[i], temp[i], ot.at_depth(ot.values.size() - 1, depths[i]), 0.01);
      const double c = oc.at_depth(oc.values.size() - 1, depths[i]);
      num += (liquid[i] - c) * (liquid[i] - c);
      den += c * c;
    }
    const double l2 = den > 0.0 ? std::sqrt(num / den) : (num > 0.0 ? INFINITY : 0.0);
    rep.rows.push_back({"liquid caffeine vs oracle (relative L2)", NAN, std::sqrt(num), std::sqrt(den), l2, 0.15});
  }
  return rep;
}

inline CompareReport compare_bundle(const std::filesystem::path& dir, const CompareOptions& opt = {}) {
  return compare_summary(load_summary(dir), opt);
}

inline void print_report(std::ostream& out, const CompareReport& rep) {
  out << std::left << std::setw(42) << "check" << std::right << std::setw(10) << "height" << std::setw(16) << "value"
      << std::setw(16) << "reference" << std::setw(12) << "rel.err" << std::setw(10) << "tol" << "  result\n";
  for (const auto& r : rep.rows) {
    out << std::left << std::setw(42) << r.check << std::right << std::setw(10);
    if (std::isnan(r.height)) out << "-";
    else out << std::setprecision(5) << r.height;
    out << std::setprecision(9) << std::setw(16) << r.value << std::setw(16) << r.reference << std::setprecision(3)
        << std::setw(12) << r.error << std::setw(10) << r.tolerance << "  " << (r.pass() ? "PASS" : "FAIL") << "\n";
  }
  out << (rep.all_pass() ? "all checks passed" : "one or more checks FAILED") << "\n";
}

}  // namespace kansa::app
