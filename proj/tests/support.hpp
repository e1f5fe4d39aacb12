#pragma once

#include "romfbk/dataset.hpp"
#include "romfbk/fom.hpp"
#include "romfbk/grid.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

namespace romfbk::testing {

inline Eigen::VectorXd random_vector(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

inline ControlField random_control(const Grid& g, std::mt19937_64& rng, double scale) {
  return ControlField(g, random_vector(g.size(), rng, scale), random_vector(g.size(), rng, scale));
}

// Dense matrix of one semi-implicit upwind sub-step, assembled face by face.
inline Eigen::MatrixXd dense_substep_matrix(const Grid& g, const Eigen::VectorXd& wx, const Eigen::VectorXd& wy,
                                            double dts, double nu) {
  const int n = g.size();
  const int nx = g.nx();
  const double h = g.h();
  Eigen::MatrixXd adv = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n, n);
  auto face = [&](int a, int b, double w) {
    // flux a -> b with speed w
    if (w > 0) {
      adv(a, a) -= dts / h * w;
      adv(b, a) += dts / h * w;
    } else if (w < 0) {
      adv(a, b) -= dts / h * w;
      adv(b, b) += dts / h * w;
    }
    lap(a, a) += 1;
    lap(b, b) += 1;
    lap(a, b) -= 1;
    lap(b, a) -= 1;
  };
  for (int j = 0; j < nx; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int k = g.index(i, j);
      if (i + 1 < nx) face(k, k + 1, 0.5 * (wx(k) + wx(k + 1)));
      if (j + 1 < nx) face(k, k + nx, 0.5 * (wy(k) + wy(k + nx)));
    }
  }
  const Eigen::MatrixXd implicit = Eigen::MatrixXd::Identity(n, n) + dts * nu / (h * h) * lap;
  return implicit.partialPivLu().solve(adv);
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("romfbk_test_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// Small flow-free dataset used by several suites.
inline GenerationConfig small_generation(int nx = 16, int scenarios = 4) {
  GenerationConfig c;
  c.nx = nx;
  c.num_scenarios = scenarios;
  c.ocp.max_iters = 80;
  c.test_fraction = 0.25;
  c.sampler_seed = 11;
  c.split_seed = 12;
  c.threads = 1;
  return c;
}

}  // namespace romfbk::testing
