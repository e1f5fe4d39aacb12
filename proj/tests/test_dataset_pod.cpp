#include "support.hpp"

#include "romfbk/dataset.hpp"
#include "romfbk/pod.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

namespace romfbk {
namespace {

const SnapshotSet& small_dataset() {
  static const SnapshotSet d = symmetry_augment(generate_dataset(testing::small_generation()));
  return d;
}

TEST(Dataset, CountsAndLayout) {
  const SnapshotSet& d = small_dataset();
  EXPECT_EQ(d.num_trajectories(), 8);
  EXPECT_EQ(d.size(), 8 * 4);
  EXPECT_EQ(d.steps, 4);
  EXPECT_EQ(d.mu.rows(), 2);
  for (int k = 0; k < d.size(); ++k) {
    EXPECT_EQ(d.trajectory[k], k / 4);
    EXPECT_EQ(d.time[k], k % 4);
  }
  // Initial snapshots are the Gaussian at the recorded initial center.
  for (int t = 0; t < d.num_trajectories(); ++t) {
    const Point c{d.initial_centers(0, t), d.initial_centers(1, t)};
    EXPECT_LT((d.states.col(d.snapshot_index(t, 0)) - gaussian_density(d.grid, c).values).norm(), 1e-12);
  }
}

TEST(Dataset, NextStateChainsSnapshots) {
  const SnapshotSet& d = small_dataset();
  EXPECT_EQ(d.next_state(0), d.states.col(1));
  EXPECT_EQ(d.next_state(3), d.terminal_states.col(0));
}

TEST(Dataset, GenerationIsDeterministic) {
  auto cfg = testing::small_generation(16, 2);
  const SnapshotSet a = generate_dataset(cfg);
  cfg.threads = 2;
  const SnapshotSet b = generate_dataset(cfg);
  EXPECT_EQ(a.states, b.states);
  EXPECT_EQ(a.controls, b.controls);
  EXPECT_EQ(a.test_trajectories, b.test_trajectories);
}

TEST(Dataset, SplitKeepsMirrorPairsTogether) {
  const SnapshotSet& d = small_dataset();
  const int ns = d.num_trajectories() / 2;
  std::set<int> test(d.test_trajectories.begin(), d.test_trajectories.end());
  std::set<int> train(d.train_trajectories.begin(), d.train_trajectories.end());
  for (int t = 0; t < ns; ++t) {
    EXPECT_EQ(test.count(t), test.count(t + ns));
    EXPECT_EQ(train.count(t), train.count(t + ns));
  }
  for (int t : test) EXPECT_EQ(train.count(t), 0u);
  for (int k : d.train_indices()) EXPECT_EQ(test.count(d.trajectory[k]), 0u);
}

TEST(Dataset, AugmentationMirrorsFields) {
  const SnapshotSet& d = small_dataset();
  const int k = d.size() / 2;
  const int n = d.grid.size();
  for (int i = 0; i < k; ++i) {
    EXPECT_EQ(d.states.col(k + i), mirror_values(d.grid, d.states.col(i)));
    EXPECT_EQ(d.controls.col(k + i).tail(n), Eigen::VectorXd(-mirror_values(d.grid, d.controls.col(i).tail(n))));
    EXPECT_EQ(d.mu(1, k + i), -d.mu(1, i));
  }
  EXPECT_LE(d.parameter_box.lo(1), -d.parameter_box.hi(1) + 1e-15);
}

TEST(Dataset, MirroredOptimumIsOptimalForMirroredProblem) {
  // The augmented trajectory is (to round-off) the solution of the mirrored
  // problem, so simulating its controls reproduces its states.
  const SnapshotSet& d = small_dataset();
  const int ns = d.num_trajectories() / 2;
  const int t = ns;  // first mirrored trajectory
  std::vector<ControlField> us;
  for (int j = 0; j < d.steps; ++j) us.push_back(ControlField::from_stacked(d.grid, d.controls.col(d.snapshot_index(t, j))));
  const Scenario sc = Scenario::from_mu(d.mu.col(d.snapshot_index(t, 0)));
  const Trajectory tr = simulate(StateField(d.grid, d.states.col(d.snapshot_index(t, 0))), us, sc, d.fom);
  EXPECT_LT((tr.states.back().values - d.terminal_states.col(t)).norm(), 1e-9);
}

TEST(Dataset, RejectsBadConfig) {
  GenerationConfig c = testing::small_generation();
  c.num_scenarios = 1;
  EXPECT_THROW(generate_dataset(c), std::invalid_argument);
  c = testing::small_generation();
  c.test_fraction = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = testing::small_generation();
  c.target_box.hi(0) = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Pod, ExactRankRecovery) {
  std::mt19937_64 rng(1);
  Eigen::MatrixXd a(50, 3), b(3, 20);
  for (int i = 0; i < a.size(); ++i) a.data()[i] = testing::random_vector(1, rng)(0);
  for (int i = 0; i < b.size(); ++i) b.data()[i] = testing::random_vector(1, rng)(0);
  const Eigen::MatrixXd s = a * b;
  PodOptions o;
  o.energy_tol = 1e-12;
  const PodBasis basis = compute_pod(s, o);
  EXPECT_EQ(basis.n_modes(), 3);
  EXPECT_LT((pod_decode(basis, pod_encode(basis, s)) - s).norm() / s.norm(), 1e-12);
}

TEST(Pod, OrthonormalModesAndSortedSingularValues) {
  const SnapshotSet& d = small_dataset();
  PodOptions o;
  o.n_modes = 10;
  const PodBasis b = compute_pod(d.states, o);
  EXPECT_LT((b.modes.transpose() * b.modes - Eigen::MatrixXd::Identity(10, 10)).norm(), 1e-12);
  for (Eigen::Index i = 1; i < b.singular_values.size(); ++i) {
    EXPECT_LE(b.singular_values(i), b.singular_values(i - 1));
  }
  // The projector is idempotent.
  const Eigen::MatrixXd p = pod_decode(b, pod_encode(b, d.states));
  EXPECT_LT((pod_decode(b, pod_encode(b, p)) - p).norm(), 1e-10 * p.norm());
}

TEST(Pod, EckartYoungAndMonotoneError) {
  const SnapshotSet& d = small_dataset();
  const Eigen::MatrixXd s = d.states;
  double prev = 1e300;
  for (int n : {2, 5, 10, 20}) {
    PodOptions o;
    o.n_modes = n;
    const PodBasis b = compute_pod(s, o);
    const Eigen::MatrixXd r = s - pod_decode(b, pod_encode(b, s));
    const double mse = r.colwise().squaredNorm().sum() / s.cols();
    const double tail = b.singular_values.tail(b.singular_values.size() - n).squaredNorm() / s.cols();
    EXPECT_NEAR(mse, tail, 1e-9 * std::max(1.0, tail));
    const double e = relative_error(s, s - r);
    EXPECT_LE(e, prev);
    prev = e;
  }
}

TEST(Pod, CenteredBasisReconstructsMean) {
  const SnapshotSet& d = small_dataset();
  PodOptions o;
  o.n_modes = 1;
  o.center = true;
  const PodBasis b = compute_pod(d.states, o);
  ASSERT_TRUE(b.mean.has_value());
  const Eigen::VectorXd mean = d.states.rowwise().mean();
  EXPECT_LT((pod_decode(b, pod_encode(b, mean)) - mean).norm(), 1e-12 * mean.norm());
}

TEST(Pod, EnergyCriterionPicksSmallestCount) {
  const SnapshotSet& d = small_dataset();
  PodOptions o;
  o.energy_tol = 1e-3;
  const PodBasis b = compute_pod(d.states, o);
  const Eigen::VectorXd s2 = b.singular_values.array().square();
  const double total = s2.sum();
  const int n = b.n_modes();
  EXPECT_GE(s2.head(n).sum() / total, 1 - 1e-3);
  EXPECT_LT(s2.head(n - 1).sum() / total, 1 - 1e-3);
}

TEST(Pod, ComponentwiseControlBasisIsBlockDiagonal) {
  const SnapshotSet& d = small_dataset();
  const int n = d.grid.size();
  const PodBasis b = control_pod_componentwise(d.controls, 5);
  ASSERT_EQ(b.n_modes(), 10);
  EXPECT_EQ(b.modes.block(n, 0, n, 5).norm(), 0.0);
  EXPECT_EQ(b.modes.block(0, 5, n, 5).norm(), 0.0);
  EXPECT_LT((b.modes.transpose() * b.modes - Eigen::MatrixXd::Identity(10, 10)).norm(), 1e-12);
}

TEST(Pod, RejectsBadInput) {
  PodOptions o;
  o.n_modes = 0;
  EXPECT_THROW(compute_pod(Eigen::MatrixXd::Ones(4, 3), o), std::invalid_argument);
  o.n_modes = 5;
  EXPECT_THROW(compute_pod(Eigen::MatrixXd::Ones(4, 3), o), std::invalid_argument);
  EXPECT_THROW(compute_pod(Eigen::MatrixXd(4, 0)), std::invalid_argument);
}

TEST(RelativeError, Examples) {
  Eigen::MatrixXd truth(2, 2), approx(2, 2);
  truth << 1, 0, 0, 2;
  approx << 1, 0, 0, 1;
  // Column errors 0 and 0.5.
  EXPECT_DOUBLE_EQ(relative_error(truth, approx), 0.25);
  EXPECT_DOUBLE_EQ(relative_error(truth, truth), 0.0);
  Eigen::MatrixXd with_zero(2, 2);
  with_zero << 0, 0, 0, 2;
  EXPECT_DOUBLE_EQ(relative_error(with_zero, approx), 0.5);
  EXPECT_THROW(relative_error(truth, Eigen::MatrixXd::Zero(3, 2)), std::invalid_argument);
}

}  // namespace
}  // namespace romfbk
