#pragma once

#include "romfbk/fom.hpp"
#include "romfbk/grid.hpp"
#include "romfbk/ocp.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

namespace romfbk {

/// Everything needed to regenerate a dataset from scratch.
struct GenerationConfig {
  int nx = 32;
  FomConfig fom;
  OcpConfig ocp;
  int num_scenarios = 20;
  ParameterBox initial_box = default_initial_box();
  ParameterBox target_box = default_target_box();
  /// (gamma, alpha) box; empty for the flow-free problem.
  std::optional<ParameterBox> flow_box;
  double test_fraction = 0.2;
  std::uint64_t sampler_seed = 1;
  std::uint64_t split_seed = 2;
  /// 0 = use ROMFBK_THREADS or the hardware concurrency.
  int threads = 0;

  void validate() const;
  /// Box of the scenario parameter vector mu.
  ParameterBox parameter_box() const;
};

/// State-scenario-control triplets of optimal trajectories.
///
/// Snapshot k belongs to trajectory k / steps at time index k % steps. The
/// train/test split is by whole trajectory; a mirrored trajectory always
/// sits on the same side as its original.
struct SnapshotSet {
  Grid grid;
  FomConfig fom;
  int steps = 0;
  Eigen::MatrixXd states;    ///< N x K, y(t_j)
  Eigen::MatrixXd controls;  ///< 2N x K, [ux; uy](t_j)
  Eigen::MatrixXd mu;        ///< p x K
  std::vector<int> trajectory;
  std::vector<int> time;
  Eigen::MatrixXd terminal_states;  ///< N x Ns, y(t_Nt) per trajectory
  Eigen::MatrixXd initial_centers;  ///< 2 x Ns
  Eigen::VectorXd costs;            ///< Ns
  std::vector<int> train_trajectories;
  std::vector<int> test_trajectories;
  ParameterBox parameter_box;
  int dropped = 0;
  int warnings = 0;

  int size() const noexcept { return static_cast<int>(states.cols()); }
  int num_trajectories() const noexcept { return static_cast<int>(terminal_states.cols()); }
  int snapshot_index(int traj, int j) const noexcept { return traj * steps + j; }
  std::vector<int> snapshot_indices(const std::vector<int>& trajectories) const;
  std::vector<int> train_indices() const { return snapshot_indices(train_trajectories); }
  std::vector<int> test_indices() const { return snapshot_indices(test_trajectories); }
  /// y(t_{j+1}) for snapshot k, taken from the next snapshot or the terminal state.
  Eigen::VectorXd next_state(int k) const;

  void validate() const;
};

/// Samples initial centers and scenarios, solves one OCP per draw and
/// assembles (y(t_j), mu, u(t_j)) for j = 0..Nt-1. Trajectories whose solve
/// throws are dropped and logged. Results are ordered by draw index.
SnapshotSet generate_dataset(const GenerationConfig& config);

/// Appends the mirror image (about x2 = 0) of every trajectory.
SnapshotSet symmetry_augment(const SnapshotSet& data);

/// Worker count: explicit value if > 0, else ROMFBK_THREADS, else hardware.
int resolve_threads(int requested);

/// Mirror of a parameter box (flips mu2, maps alpha to pi - alpha) merged
/// with the original.
ParameterBox mirror_closure(const ParameterBox& box);

}  // namespace romfbk
