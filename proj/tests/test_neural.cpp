#include "support.hpp"

#include "romfbk/mlp.hpp"
#include "romfbk/optim.hpp"
#include "romfbk/pod.hpp"
#include "romfbk/reducer.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace romfbk {
namespace {

Eigen::MatrixXd random_matrix(int r, int c, std::mt19937_64& rng) {
  return testing::random_vector(static_cast<Eigen::Index>(r) * c, rng).reshaped(r, c);
}

// Max relative error of the directional derivative of sum(w .* f(x)) in
// random parameter directions, for 5 random points.
void check_mlp_gradients(Mlp net, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (int trial = 0; trial < 5; ++trial) {
    const Eigen::MatrixXd x = random_matrix(net.input_dim(), 3, rng);
    const Eigen::MatrixXd w = random_matrix(net.output_dim(), 3, rng);
    MlpTape tape;
    net.forward(x, tape);
    Eigen::VectorXd pg = Eigen::VectorXd::Zero(net.parameter_count());
    const Eigen::MatrixXd xg = net.backward(tape, w, pg);
    const Eigen::VectorXd p0 = net.parameters();
    const Eigen::VectorXd d = testing::random_vector(p0.size(), rng);
    const double eps = 1e-6;
    auto f = [&](const Eigen::VectorXd& p) {
      net.set_parameters(p);
      return (net.forward(x).array() * w.array()).sum();
    };
    const double fd = (f(p0 + eps * d) - f(p0 - eps * d)) / (2 * eps);
    net.set_parameters(p0);
    EXPECT_LT(std::abs(pg.dot(d) - fd), 1e-6 * std::max(1.0, std::abs(fd)));
    const Eigen::MatrixXd dx = random_matrix(net.input_dim(), 3, rng);
    const double fdx = ((net.forward(x + eps * dx).array() - net.forward(x - eps * dx).array()) * w.array()).sum() /
                       (2 * eps);
    EXPECT_LT(std::abs((xg.array() * dx.array()).sum() - fdx), 1e-6 * std::max(1.0, std::abs(fdx)));
  }
}

TEST(Mlp, GradientsForAllNetworkRoles) {
  // State/control encoders and decoders, policy and forward model shapes
  // (scaled down), each with non-trivial input/output affine maps.
  const std::vector<std::vector<int>> roles{{12, 20, 4}, {4, 20, 20, 12}, {5, 30, 6}, {6, 10, 10, 8}};
  std::uint64_t s = 100;
  for (const auto& dims : roles) {
    Mlp net = init_he(dims, s);
    std::mt19937_64 rng(s + 7);
    net.set_input_affine(testing::random_vector(dims.front(), rng), testing::random_vector(dims.front(), rng));
    net.set_output_affine(testing::random_vector(dims.back(), rng), testing::random_vector(dims.back(), rng));
    check_mlp_gradients(net, s++);
  }
}

TEST(Mlp, HeInitializationStatistics) {
  const Mlp net = init_he({400, 300, 2}, 5);
  const Eigen::MatrixXd& w = net.weight(0);
  const double mean = w.mean();
  const double var = (w.array() - mean).square().mean();
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(var, 2.0 / 400.0, 0.05 * 2.0 / 400.0);
  EXPECT_EQ(net.bias(0).norm(), 0.0);
}

TEST(Mlp, InitializationIsDeterministic) {
  EXPECT_EQ(init_he({5, 7, 3}, 9).parameters(), init_he({5, 7, 3}, 9).parameters());
  EXPECT_NE(init_he({5, 7, 3}, 9).parameters(), init_he({5, 7, 3}, 10).parameters());
}

TEST(Mlp, LeakyReluSlope) {
  Mlp net({1, 1, 1}, 0.01);
  net.weight(0)(0, 0) = 1.0;
  net.weight(1)(0, 0) = 1.0;
  Eigen::MatrixXd x(1, 2);
  x << -2.0, 3.0;
  const Eigen::MatrixXd y = net.forward(x);
  EXPECT_DOUBLE_EQ(y(0, 0), -0.02);
  EXPECT_DOUBLE_EQ(y(0, 1), 3.0);
}

TEST(Mlp, AffineMapsAndParameterRoundTrip) {
  Mlp id = identity_mlp(2);
  id.set_input_affine(Eigen::Vector2d(1, 2), Eigen::Vector2d(2, 4));
  id.set_output_affine(Eigen::Vector2d(0.5, 0.25), Eigen::Vector2d(1, 2));
  const Eigen::MatrixXd y = id.forward(Eigen::Vector2d(3, 3));
  EXPECT_DOUBLE_EQ(y(0), 1 + 0.5 * (3 - 1) * 2);
  EXPECT_DOUBLE_EQ(y(1), 2 + 0.25 * (3 - 2) * 4);
  Mlp net = init_he({3, 4, 2}, 1);
  EXPECT_EQ(net.parameter_count(), 3 * 4 + 4 + 4 * 2 + 2);
  Eigen::VectorXd p = net.parameters();
  p(0) = 42;
  net.set_parameters(p);
  EXPECT_EQ(net.weight(0)(0, 0), 42);
  EXPECT_THROW(net.set_parameters(Eigen::VectorXd::Zero(3)), std::invalid_argument);
  EXPECT_THROW(net.forward(Eigen::MatrixXd::Zero(2, 1)), std::invalid_argument);
}

TEST(Optim, LbfgsSolvesQuadratic) {
  std::mt19937_64 rng(3);
  const Eigen::MatrixXd m = random_matrix(8, 8, rng);
  const Eigen::MatrixXd a = m.transpose() * m + Eigen::MatrixXd::Identity(8, 8);
  const Eigen::VectorXd b = testing::random_vector(8, rng);
  Objective f = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = a * x - b;
    return 0.5 * x.dot(a * x) - b.dot(x);
  };
  LbfgsOptions o;
  o.grad_tol = 1e-7;
  const OptimResult r = minimize_lbfgs(f, Eigen::VectorXd::Zero(8), o);
  EXPECT_TRUE(r.converged) << r.message;
  // lambda_min(a) >= 1, so |x - x*| <= |g|_2 <= sqrt(8) |g|_inf.
  EXPECT_LE((r.x - a.ldlt().solve(b)).norm(), std::sqrt(8.0) * o.grad_tol);
  for (std::size_t i = 1; i < r.history.size(); ++i) EXPECT_LE(r.history[i], r.history[i - 1]);
}

TEST(Optim, LbfgsRosenbrock) {
  Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g.resize(2);
    g(0) = -400 * x(0) * (x(1) - x(0) * x(0)) - 2 * (1 - x(0));
    g(1) = 200 * (x(1) - x(0) * x(0));
    return 100 * std::pow(x(1) - x(0) * x(0), 2) + std::pow(1 - x(0), 2);
  };
  LbfgsOptions o;
  o.grad_tol = 1e-8;
  o.max_iters = 200;
  const OptimResult r = minimize_lbfgs(f, Eigen::Vector2d(-1.2, 1.0), o);
  EXPECT_NEAR(r.x(0), 1.0, 1e-6);
  EXPECT_NEAR(r.x(1), 1.0, 1e-6);
}

TEST(Optim, AdamSolvesQuadratic) {
  Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 2 * (x - Eigen::Vector3d(1, -2, 0.5));
    return (x - Eigen::Vector3d(1, -2, 0.5)).squaredNorm();
  };
  AdamOptions o;
  o.learning_rate = 0.05;
  o.max_iters = 3000;
  const OptimResult r = minimize_adam(f, Eigen::VectorXd::Zero(3), o);
  EXPECT_LT((r.x - Eigen::Vector3d(1, -2, 0.5)).norm(), 1e-3);
}

TEST(Optim, ZeroGradientStartReturnsImmediately) {
  Objective f = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = 2 * x;
    return x.squaredNorm();
  };
  const OptimResult r = minimize_lbfgs(f, Eigen::VectorXd::Zero(4));
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.iterations, 0);
  EXPECT_EQ(r.x.norm(), 0.0);
}

TEST(Reducer, KindNames) {
  EXPECT_EQ(reducer_kind_from_string("pod"), ReducerKind::pod);
  EXPECT_EQ(reducer_kind_from_string("pod+ae"), ReducerKind::pod_ae);
  EXPECT_EQ(to_string(ReducerKind::ae), "ae");
  EXPECT_THROW(reducer_kind_from_string("pca"), std::invalid_argument);
}

TEST(Reducer, PodDispatch) {
  std::mt19937_64 rng(4);
  const Eigen::MatrixXd s = random_matrix(30, 10, rng);
  PodOptions o;
  o.n_modes = 4;
  const PodBasis b = compute_pod(s, o);
  const Reducer r = make_pod_reducer(b);
  EXPECT_EQ(r.latent_dim, 4);
  EXPECT_EQ(r.encode(s), pod_encode(b, s));
  EXPECT_EQ(r.decode(r.encode(s)), pod_decode(b, pod_encode(b, s)));
}

TEST(Reducer, PodAeWithIdentityNetworksEqualsPod) {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd s = random_matrix(30, 10, rng);
  PodOptions o;
  o.n_modes = 4;
  const PodBasis b = compute_pod(s, o);
  Reducer r;
  r.kind = ReducerKind::pod_ae;
  r.pod = b;
  r.encoder = identity_mlp(4);
  r.decoder = identity_mlp(4);
  r.latent_dim = 4;
  r.networks_ready = true;
  r.validate();
  EXPECT_LT((r.encode(s) - pod_encode(b, s)).norm(), 1e-14);
  EXPECT_LT((r.decode(r.encode(s)) - pod_decode(b, pod_encode(b, s))).norm(), 1e-13);
  EXPECT_LT((r.to_network_space(s) - pod_encode(b, s)).norm(), 1e-14);
}

TEST(Reducer, AutoencoderNormalizationAndReadiness) {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd s = random_matrix(12, 20, rng);
  const Reducer r = make_ae_reducer(s, {3, {8}, {8}}, 1);
  EXPECT_EQ(r.network_dim(), 12);
  EXPECT_THROW(r.encode(s), std::logic_error);
  Reducer ready = r;
  ready.networks_ready = true;
  EXPECT_EQ(ready.encode(s).rows(), 3);
  EXPECT_EQ(ready.decode(ready.encode(s)).rows(), 12);
  // The encoder input map sends training data into [0, 1].
  const Eigen::MatrixXd z = ((s.colwise() - r.encoder.input_shift()).array().colwise() * r.encoder.input_scale().array());
  EXPECT_GE(z.minCoeff(), -1e-12);
  EXPECT_LE(z.maxCoeff(), 1 + 1e-12);
}

TEST(Reducer, MinMaxAffineHandlesConstantRows) {
  Eigen::MatrixXd s(2, 3);
  s << 1, 2, 3, 5, 5, 5;
  const auto [shift, scale] = minmax_affine(s);
  EXPECT_DOUBLE_EQ(shift(0), 1);
  EXPECT_DOUBLE_EQ(scale(0), 0.5);
  EXPECT_DOUBLE_EQ(shift(1), 5);
  EXPECT_DOUBLE_EQ(scale(1), 1);
}

}  // namespace
}  // namespace romfbk
