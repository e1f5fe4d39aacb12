#include "support.hpp"

#include "romfbk/error.hpp"
#include "romfbk/fom.hpp"
#include "romfbk/grid.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace romfbk {
namespace {

using testing::dense_substep_matrix;
using testing::random_control;

TEST(Grid, CellCentersAndSpacing) {
  const Grid g = build_grid(8);
  EXPECT_EQ(g.size(), 64);
  EXPECT_DOUBLE_EQ(g.h(), 0.25);
  EXPECT_DOUBLE_EQ(g.center(0).x1, -0.875);
  EXPECT_DOUBLE_EQ(g.center(0).x2, -0.875);
  EXPECT_DOUBLE_EQ(g.center(63).x1, 0.875);
  EXPECT_DOUBLE_EQ(g.center(g.index(3, 5)).x1, -1.0 + 3.5 * 0.25);
  EXPECT_DOUBLE_EQ(g.center(g.index(3, 5)).x2, -1.0 + 5.5 * 0.25);
}

TEST(Grid, RejectsSmallOrOddSizes) {
  EXPECT_THROW(build_grid(6), std::invalid_argument);
  EXPECT_THROW(build_grid(9), std::invalid_argument);
  EXPECT_THROW(build_grid(0), std::invalid_argument);
  EXPECT_NO_THROW(build_grid(10));
}

TEST(Grid, MirrorIndexIsAnInvolutionAndNegatesX2) {
  const Grid g(16);
  for (int k = 0; k < g.size(); ++k) {
    const int m = g.mirror_index(k);
    EXPECT_EQ(g.mirror_index(m), k);
    EXPECT_EQ(g.center(m).x1, g.center(k).x1);
    EXPECT_EQ(g.center(m).x2, -g.center(k).x2);
  }
}

TEST(Grid, BoundaryFaces) {
  const Grid g(8);
  EXPECT_EQ(g.boundary_faces(g.index(0, 0)), 2);
  EXPECT_EQ(g.boundary_faces(g.index(3, 0)), 1);
  EXPECT_EQ(g.boundary_faces(g.index(3, 4)), 0);
  int total = 0;
  for (int k = 0; k < g.size(); ++k) total += g.boundary_faces(k);
  EXPECT_EQ(total, 4 * 8);
}

TEST(Gaussian, MassNearOneAndPeakValue) {
  const Grid g(32);
  const StateField y = gaussian_density(g, {0.0, 0.0});
  // Truncation of the Gaussian tails outside (-1,1)^2 is ~1e-5 for var 0.05.
  EXPECT_NEAR(total_mass(y), 1.0, 2e-3);
  EXPECT_LE(y.values.maxCoeff(), 1.0 / (2 * std::numbers::pi * 0.05));
  EXPECT_GT(y.values.maxCoeff(), 0.9 / (2 * std::numbers::pi * 0.05));
  EXPECT_GE(y.values.minCoeff(), 0.0);
}

TEST(Gaussian, MirroredCenterGivesMirroredField) {
  const Grid g(16);
  const StateField a = gaussian_density(g, {0.2, 0.3});
  const StateField b = gaussian_density(g, {0.2, -0.3});
  EXPECT_EQ(mirror(a).values, b.values);
}

TEST(Flow, AnalyticProfile) {
  const Grid g(16);
  const double gamma = 0.8;
  const double alpha = 0.4;
  const ControlField v = background_flow(g, gamma, alpha);
  for (int k = 0; k < g.size(); ++k) {
    const Point c = g.center(k);
    EXPECT_NEAR(v.ux(k), (c.x1 + 1) * (1 - c.x1) * gamma * std::sin(alpha), 1e-15);
    EXPECT_NEAR(v.uy(k), gamma * std::cos(alpha), 1e-15);
  }
  const ControlField none = background_flow(g, Scenario{{0.1, 0.1}, std::nullopt});
  EXPECT_EQ(none.ux.norm(), 0.0);
  EXPECT_EQ(none.uy.norm(), 0.0);
}

TEST(Scenario, MuRoundTripAndMirror) {
  Scenario s{{0.3, -0.2}, FlowParams{0.5, 0.7}};
  const Eigen::VectorXd mu = s.mu();
  ASSERT_EQ(mu.size(), 4);
  const Scenario back = Scenario::from_mu(mu);
  EXPECT_EQ(back.target.x2, -0.2);
  EXPECT_EQ(back.flow->alpha, 0.7);
  const Scenario m = mirror(s);
  EXPECT_EQ(m.target.x2, 0.2);
  EXPECT_NEAR(m.flow->alpha, std::numbers::pi - 0.7, 1e-15);
  EXPECT_THROW(Scenario::from_mu(Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST(FomConfig, HorizonMustBeWholeSteps) {
  const FomConfig c = FomConfig::from_horizon(0.001, 0.25, 1.0);
  EXPECT_EQ(c.steps, 4);
  EXPECT_DOUBLE_EQ(c.steps * c.dt, c.T);
  EXPECT_THROW(FomConfig::from_horizon(0.001, 0.3, 1.0), std::invalid_argument);
  FomConfig bad;
  bad.substeps = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Step, ConservesMassAndPositivity) {
  const Grid g(32);
  std::mt19937_64 rng(1);
  FomConfig cfg;
  StateField y = gaussian_density(g, {-0.3, 0.2});
  const ControlField v = background_flow(g, 0.5, 0.3);
  for (int s = 0; s < 6; ++s) {
    const double m0 = total_mass(y);
    y = step(y, random_control(g, rng, 0.5), v, cfg);
    EXPECT_NEAR(total_mass(y), m0, 1e-10 * m0);
    EXPECT_GE(y.values.minCoeff(), 0.0);
  }
}

TEST(Step, ZeroVelocityPureDiffusionKeepsConstantField) {
  const Grid g(16);
  const StateField y(g, Eigen::VectorXd::Constant(g.size(), 0.25));
  const StateField out = step(y, ControlField::zeros(g), ControlField::zeros(g), FomConfig{});
  EXPECT_LT((out.values - y.values).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Step, BitwiseMirrorEquivariance) {
  const Grid g(16);
  std::mt19937_64 rng(2);
  const StateField y = gaussian_density(g, {-0.2, 0.35});
  const ControlField u = random_control(g, rng, 0.7);
  const ControlField v = background_flow(g, Scenario{{0.2, 0.1}, FlowParams{0.5, 0.4}});
  const StateField a = mirror(step(y, u, v, FomConfig{}));
  const StateField b = step(mirror(y), mirror(u), mirror(v), FomConfig{});
  EXPECT_EQ(a.values, b.values);
}

TEST(Step, MatchesDenseReferenceOperator) {
  const Grid g(16);
  std::mt19937_64 rng(3);
  FomConfig cfg;
  cfg.substeps = 4;
  cfg.cg_tolerance = 1e-13;
  cfg.nu = 0.01;
  const StateField y = gaussian_density(g, {0.1, -0.1});
  const ControlField u = random_control(g, rng, 0.5);
  const Eigen::VectorXd wx = u.ux;
  const Eigen::VectorXd wy = u.uy;
  const Eigen::MatrixXd m = dense_substep_matrix(g, wx, wy, cfg.substep(), cfg.nu);
  Eigen::VectorXd ref = y.values;
  for (int s = 0; s < cfg.substeps; ++s) ref = m * ref;
  const StateField out = step(y, u, ControlField::zeros(g), cfg);
  EXPECT_LT((out.values - ref).norm() / ref.norm(), 1e-10);
}

TEST(Simulate, MatchesDenseReferenceOverHorizon) {
  const Grid g(16);
  std::mt19937_64 rng(4);
  FomConfig cfg = FomConfig::from_horizon(0.002, 0.25, 0.75, 8);
  cfg.cg_tolerance = 1e-13;
  const Scenario sc{{0.2, 0.0}, FlowParams{0.3, 0.2}};
  const ControlField v = background_flow(g, sc);
  std::vector<ControlField> us;
  for (int j = 0; j < cfg.steps; ++j) us.push_back(random_control(g, rng, 0.4));
  const StateField y0 = gaussian_density(g, {-0.3, 0.0});
  const Trajectory t = simulate(y0, us, sc, cfg);
  ASSERT_EQ(t.states.size(), 4u);
  Eigen::VectorXd ref = y0.values;
  for (int j = 0; j < cfg.steps; ++j) {
    const Eigen::MatrixXd m = dense_substep_matrix(g, us[j].ux + v.ux, us[j].uy + v.uy, cfg.substep(), cfg.nu);
    for (int s = 0; s < cfg.substeps; ++s) ref = m * ref;
    EXPECT_LT((t.states[j + 1].values - ref).norm() / ref.norm(), 1e-10) << "step " << j;
  }
  EXPECT_THROW(simulate(y0, {us[0]}, sc, cfg), std::invalid_argument);
}

TEST(Simulate, UniformFlowMovesCenterOfMass) {
  const Grid g(32);
  FomConfig cfg;
  const Scenario sc{{0.0, 0.0}, std::nullopt};
  const double speed = 0.4;
  std::vector<ControlField> us(cfg.steps, ControlField(g, Eigen::VectorXd::Constant(g.size(), speed),
                                                         Eigen::VectorXd::Zero(g.size())));
  const Trajectory t = simulate(gaussian_density(g, {-0.4, 0.0}), us, sc, cfg);
  auto com = [&](const StateField& y) {
    double m = 0, c = 0;
    for (int k = 0; k < g.size(); ++k) {
      m += y.values(k);
      c += y.values(k) * g.center(k).x1;
    }
    return c / m;
  };
  const double moved = com(t.states.back()) - com(t.states.front());
  // Transport over T=1 at speed 0.4 is 0.4; boundary piling and numerical
  // diffusion slow it slightly.
  EXPECT_GT(moved, 0.3);
  EXPECT_LT(moved, 0.42);
}

TEST(Step, RefinementErrorRatio) {
  // Self-convergence of the first-order scheme: the difference between
  // successive resolutions shrinks by roughly a factor 2.
  auto run = [](int nx) {
    const Grid g(nx);
    FomConfig cfg;
    cfg.nu = 0.01;
    const ControlField u(g, Eigen::VectorXd::Constant(g.size(), 0.3), Eigen::VectorXd::Constant(g.size(), -0.2));
    StateField y = gaussian_density(g, {-0.2, 0.2});
    for (int s = 0; s < 2; ++s) y = step(y, u, ControlField::zeros(g), cfg);
    return y;
  };
  auto coarsen = [](const StateField& f) {
    const int nx = f.grid.nx() / 2;
    const Grid g(nx);
    Eigen::VectorXd v(g.size());
    for (int j = 0; j < nx; ++j) {
      for (int i = 0; i < nx; ++i) {
        v(g.index(i, j)) = 0.25 * (f.values(f.grid.index(2 * i, 2 * j)) + f.values(f.grid.index(2 * i + 1, 2 * j)) +
                                   f.values(f.grid.index(2 * i, 2 * j + 1)) +
                                   f.values(f.grid.index(2 * i + 1, 2 * j + 1)));
      }
    }
    return StateField(g, v);
  };
  const StateField y16 = run(16), y32 = run(32), y64 = run(64);
  const double e1 = l2_norm(y16.grid, y16.values - coarsen(y32).values);
  const double e2 = l2_norm(y32.grid, y32.values - coarsen(y64).values);
  const double ratio = e1 / e2;
  EXPECT_GE(ratio, 1.3);
  EXPECT_LE(ratio, 3.0);
}

TEST(Fom, DiffusionSolveResidualAndSum) {
  const Grid g(16);
  std::mt19937_64 rng(5);
  const Eigen::VectorXd rhs = testing::random_vector(g.size(), rng).cwiseAbs();
  const double coeff = 0.01;
  const Eigen::VectorXd x = solve_diffusion(g, coeff, rhs, 1e-12);
  EXPECT_LT((apply_diffusion_operator(g, coeff, x) - rhs).norm() / rhs.norm(), 1e-11);
  EXPECT_NEAR(x.sum(), rhs.sum(), 1e-12 * rhs.sum());
}

TEST(Fom, UpwindDivergenceSumsToZero) {
  const Grid g(16);
  std::mt19937_64 rng(6);
  const ControlField u = random_control(g, rng, 1.0);
  const Eigen::VectorXd y = testing::random_vector(g.size(), rng).cwiseAbs();
  EXPECT_NEAR(upwind_divergence(g, u.ux, u.uy, y).sum(), 0.0, 1e-11);
  EXPECT_THROW(upwind_divergence(g, u.ux.head(3), u.uy, y), std::invalid_argument);
}

TEST(Fom, CflNumber) {
  const Grid g(8);
  const Eigen::VectorXd wx = Eigen::VectorXd::Constant(g.size(), 1.0);
  const Eigen::VectorXd wy = Eigen::VectorXd::Zero(g.size());
  // One outgoing face at speed 1: dt/h.
  EXPECT_NEAR(cfl_number(g, wx, wy, 0.1), 0.1 / g.h(), 1e-14);
}

}  // namespace
}  // namespace romfbk
