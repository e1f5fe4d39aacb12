#pragma once

#include "romfbk/fom.hpp"
#include "romfbk/grid.hpp"
#include "romfbk/ocp.hpp"
#include "romfbk/training.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace romfbk {

struct NoiseSpec {
  double sigma = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class LoopMode { full_order, latent };

std::string_view to_string(LoopMode mode);

/// Record of one closed-loop run.
struct LoopReport {
  LoopMode mode = LoopMode::full_order;
  int steps = 0;
  Eigen::VectorXd mu;
  Point initial_center;
  Eigen::MatrixXd controls;       ///< 2N x Nt, applied controls
  Eigen::MatrixXd states;         ///< N x (Nt+1), plant (or shadow plant) states; empty without a plant
  Eigen::MatrixXd latent_states;  ///< N_y x (Nt+1), latent mode only
  /// ||y(t_j) - y_d|| for j = 0..Nt, from the plant when one is simulated,
  /// from decoded latent states otherwise.
  Eigen::VectorXd distances;
  /// Latent mode: ||D_y(y_N(t_j)) - y_d||.
  Eigen::VectorXd predicted_distances;
  double inference_seconds = 0.0;
  double plant_seconds = 0.0;
  bool completed = true;
  std::string error;
};

/// Decoded control of the policy at state y: D_u(pi(E_y(y), mu)).
ControlField policy_act(const ControllerModel& model, const StateField& y, const Eigen::Ref<const Eigen::VectorXd>& mu);

/// y + eps with eps i.i.d. N(0, sigma^2) per cell; no clipping.
StateField add_noise(const StateField& y, const NoiseSpec& spec);

double tracking_distance(const StateField& y, const StateField& target);

/// Observe (with noise), act, advance the plant for every step. A plant
/// failure ends the run early with completed = false.
LoopReport run_full_order_loop(const ControllerModel& model, Point y0_center, const Eigen::Ref<const Eigen::VectorXd>& mu,
                               const FomConfig& fom, const NoiseSpec& noise = {});

/// Observes y0 once, then propagates the latent state with the forward
/// model. With shadow set, the emitted controls also drive a plant used for
/// evaluation only.
LoopReport run_latent_loop(const ControllerModel& model, Point y0_center, const Eigen::Ref<const Eigen::VectorXd>& mu,
                           const std::optional<FomConfig>& shadow, const NoiseSpec& noise = {});

/// Distances of the zero-control trajectory, length Nt+1.
Eigen::VectorXd uncontrolled_distances(const Grid& grid, Point y0_center, const Eigen::Ref<const Eigen::VectorXd>& mu,
                                       const FomConfig& fom);

/// Mass of y inside the closed ball (cell centers) around center, clamped
/// to [0, total_mass].
double arrival_probability(const StateField& y, Point center, double radius = 0.5);

struct BenchmarkCase {
  Point y0_center;
  Eigen::VectorXd mu;
};

struct BenchmarkTable {
  std::vector<double> full_order_seconds;
  std::vector<double> latent_seconds;  ///< NaN entries when no forward model
  std::vector<double> ocp_seconds;
  double mean_full_order = 0.0;
  double mean_latent = 0.0;
  double mean_ocp = 0.0;
  /// mean_ocp / mean_full_order
  double speedup_full_vs_ocp = 0.0;
  /// mean_full_order / mean_latent
  double speedup_latent_vs_full = 0.0;
};

/// Mean wall-clock per run of the full-order loop, the latent loop (no
/// shadow plant) and an open-loop OCP solve.
BenchmarkTable benchmark(const ControllerModel& model, const std::vector<BenchmarkCase>& cases, const FomConfig& fom,
                         const OcpConfig& ocp);

}  // namespace romfbk
