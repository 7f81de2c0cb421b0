#include "kansa/dae.hpp"
#include "kansa/model.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace kansa;
using namespace kansa::percolation;

namespace {

FieldSeries series_of(const Basis& basis, const Eigen::VectorXd& nodal) {
  FieldSeries s;
  s.record(0.0, interpolate(basis, nodal).coeffs, nodal);
  return s;
}

}  // namespace

TEST(Model, AlphaRate) {
  EXPECT_EQ(alpha_rate({}, 6, 88), 0.0);
  AlphaCoefficients pass;
  pass.A0 = 3184.9;
  EXPECT_EQ(alpha_rate(pass, 9, 92), 3184.9);
  EXPECT_DOUBLE_EQ(alpha_rate({1, 1, 1, 1, 1, 1, 1, 1}, 3, 2), 55.0);
}

TEST(Model, SolidConcentration) {
  EXPECT_EQ(solid_concentration(0.01254, 3184.9, 0.0), 0.01254);
  EXPECT_EQ(solid_concentration(0.01254, 0.0, 5.0), 0.01254);
  EXPECT_THROW(solid_concentration(0.01254, 3184.9, -1e-9), std::domain_error);
  const double t = horizon_for_solid_value(0.01254, 3184.9, 4.3888e-3);
  EXPECT_NEAR(t, std::log(0.01254 / 0.0043888) / 3184.9, 1e-18);
  EXPECT_NEAR(t, 3.296e-4, 5e-8);
  EXPECT_NEAR(solid_concentration(0.01254, 3184.9, t), 4.3888e-3, 1e-15);
}

TEST(Model, HeadProblemFromDefaults) {
  const ModelParameters p;
  const auto fp = head_problem(p);
  EXPECT_EQ(fp.op.time_coeff, 1e-5);
  EXPECT_TRUE(fp.op.diffusion(Vec3::Zero()).isApprox(1.8282 * Mat3::Identity()));
  ASSERT_TRUE(fp.bcs.top);
  EXPECT_EQ(fp.bcs.top->kind, BoundaryKind::dirichlet);
  EXPECT_EQ(fp.bcs.top->value, 6118.3);
  EXPECT_EQ(fp.bcs.bottom->kind, BoundaryKind::robin_min);
  EXPECT_EQ(fp.bcs.bottom->value, 0.0);  // chi = 0: no gravity term
  EXPECT_NEAR(fp.bcs.bottom->transfer, 5.616, 1e-12);
}

TEST(Model, ConsistentInitialFields) {
  const ModelParameters p;
  const auto basis = make_basis(cylinder_nodes(3.0, 1.388, 6));
  const auto hp = head_problem(p);
  const auto hs = assemble(basis, hp.op, hp.bcs);
  const Eigen::VectorXd h0 = hs.nodal(consistent_initialize(hs, head_initial(p, basis.nodes), 0.0).u);
  for (int j : basis.nodes.interior_idx) EXPECT_NEAR(h0[j], 6118.3, 1e-6);
  for (int j : basis.nodes.bottom_idx) EXPECT_LT(h0[j], 6118.3);

  const auto tp = heat_problem(p, -6527.72);
  const auto ts = assemble(basis, tp.op, tp.bcs);
  const Eigen::VectorXd T0 = ts.nodal(consistent_initialize(ts, heat_initial(p, basis.nodes), 0.0).u);
  for (int j : basis.nodes.top_idx) EXPECT_NEAR(T0[j], 88.0, 1e-9);

  // compatible constant data is reproduced exactly
  ModelParameters flat = p;
  flat.T0 = flat.T_z0 = 50.0;
  const auto fs = assemble(basis, heat_problem(flat, 0.0).op, heat_problem(flat, 0.0).bcs);
  const Eigen::VectorXd c0 = fs.nodal(consistent_initialize(fs, heat_initial(flat, basis.nodes), 0.0).u);
  EXPECT_LT((c0.array() - 50.0).abs().maxCoeff(), 1e-9);
}

TEST(Model, DarcyFluxExtraction) {
  const ModelParameters p;
  const auto basis = make_basis(cylinder_nodes(3.0, 1.388, 4));
  const double s = 3570.6;
  Eigen::VectorXd h(basis.N());
  for (int j = 0; j < basis.N(); ++j) h[j] = p.h_z0 + s * basis.nodes.points[static_cast<std::size_t>(j)][2];
  EXPECT_NEAR(extract_q0(series_of(basis, h), basis, p), -p.k * s, 1e-6 * p.k * s);
  EXPECT_NEAR(extract_q0(series_of(basis, Eigen::VectorXd::Constant(basis.N(), 7.0)), basis, p), 0.0, 1e-6);
  // slope implied by the published head profile
  const double slope = (1162.36 - 6118.29) / -1.388;
  EXPECT_NEAR(-p.k * slope, -6527.8, 0.5);
  EXPECT_THROW(extract_q0(FieldSeries{}, basis, p), std::invalid_argument);
}

TEST(Model, DispersionTensor) {
  const ModelParameters p;
  EXPECT_TRUE(dispersion_tensor(p, 0.0).isApprox(p.eps * p.D1 * Mat3::Identity()));
  const double q0 = -6527.72;
  const Mat3 D = dispersion_tensor(p, q0);
  EXPECT_NEAR(D(0, 0), p.eps * p.D1 + p.betaT1 * std::abs(q0), 1e-9);
  EXPECT_NEAR(D(2, 2), p.eps * p.D1 + (p.betaT1 + p.betaL1 + p.betaT1) * std::abs(q0), 1e-6);
  EXPECT_TRUE(D.isApprox(D.transpose()));
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Mat3>(D).eigenvalues().minCoeff(), 0.0);
  const Mat3 Db = dispersion_tensor(p, q0, true);
  EXPECT_NEAR(Db(2, 2), p.eps * p.D1 + p.betaL1 * std::abs(q0), 1e-6);
}

TEST(Model, ReactionRates) {
  const ModelParameters p;
  const auto [R, Rs] = reaction_rates(p, p.C10s);
  EXPECT_NEAR(R, 3184.9 * 0.695 * 0.01254, 1e-10);
  EXPECT_NEAR(R, 27.76, 0.01);
  EXPECT_EQ(R + Rs, 0.0);
  const auto fp = transport_problem(p, -6527.72);
  EXPECT_NEAR(fp.op.source(0.0, Vec3::Zero()), R, 1e-12);
  EXPECT_LT(fp.op.source(1.0, Vec3::Zero()), 1e-300);
}

TEST(Model, HeatCoefficients) {
  const ModelParameters p;
  EXPECT_NEAR(heat_capacity(p), 0.305 * 4.18e-3 + 0.695 * 3.184e-3, 1e-18);
  EXPECT_NEAR(heat_capacity(p), 3.4879e-3, 1e-4 * 3.4879e-3);  // published figure is rounded
  EXPECT_DOUBLE_EQ(p.lambda, 432.0);
  const auto fp = heat_problem(p, -6527.72);
  EXPECT_NEAR(fp.op.advection(Vec3::Zero())[2], p.rhoc * -6527.72, 1e-12);
  EXPECT_EQ(fp.bcs.top->value, 88.0);
}

TEST(Model, ParameterParsing) {
  std::istringstream good("# comment\nk = 2.5\nlambda = 86400*5e-3  # trailing\n\nPhi_h=86400 * 6.5e-5\n");
  const auto p = parse_parameters(good);
  EXPECT_EQ(p.k, 2.5);
  EXPECT_DOUBLE_EQ(p.lambda, 432.0);
  EXPECT_DOUBLE_EQ(p.Phi_h, 5.616);
  EXPECT_EQ(p.h_z0, 6118.3);  // untouched default

  std::istringstream unknown("kappa = 1\n"), junk("k = 1.2x\n"), noeq("k 1.2\n"), negative("S0 = -1\n");
  EXPECT_THROW(parse_parameters(unknown), std::invalid_argument);
  EXPECT_THROW(parse_parameters(junk), std::invalid_argument);
  EXPECT_THROW(parse_parameters(noeq), std::invalid_argument);
  EXPECT_THROW(parse_parameters(negative), std::invalid_argument);
  EXPECT_THROW(load_parameters("/nonexistent/file.params"), std::runtime_error);

  std::stringstream round;
  write_parameters(round, p);
  const auto q = parse_parameters(round);
  for (const auto& [key, field] : percolation::detail::parameter_fields()) EXPECT_EQ(p.*field, q.*field) << key;
}

TEST(Model, ShippedConfigMatchesDefaults) {
  const auto p = load_parameters(KANSA_SOURCE_DIR "/configs/caffeine.params");
  const ModelParameters d;
  for (const auto& [key, field] : percolation::detail::parameter_fields()) EXPECT_DOUBLE_EQ(p.*field, d.*field) << key;
}

TEST(Model, HeadToPressure) {
  EXPECT_DOUBLE_EQ(head_to_pressure(10.0, -2.0, 1.0, 9.81, 1.0), 12.0 * 9.81);
}
