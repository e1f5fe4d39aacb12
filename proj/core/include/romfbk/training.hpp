#pragma once

#include "romfbk/dataset.hpp"
#include "romfbk/fom.hpp"
#include "romfbk/grid.hpp"
#include "romfbk/mlp.hpp"
#include "romfbk/reducer.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

namespace romfbk {

/// l1 state reconstruction, l2 control reconstruction, l3 decoded policy,
/// l4 one-step prediction from data, l5 prediction from policy, l6 decoded
/// prediction.
struct LossWeights {
  double l1 = 0.01;
  double l2 = 0.01;
  double l3 = 0.01;
  double l4 = 0.0;
  double l5 = 0.0;
  double l6 = 0.0;

  static LossWeights stage1() { return {}; }
  static LossWeights stage2() { return {0.001, 0.001, 0.001, 1.0, 1.0, 0.001}; }
  void validate() const;
};

enum class OptimizerKind { lbfgs, adam };

/// uniform: plain means over snapshots. inverse_control_norm: snapshot k is
/// weighted by 1/||u_k||^2 (rescaled to mean 1), so that small late-horizon
/// controls count as much as large early ones.
enum class SampleWeighting { uniform, inverse_control_norm };

struct TrainConfig {
  OptimizerKind optimizer = OptimizerKind::lbfgs;
  int max_epochs = 1500;
  double tolerance = 1e-9;
  std::uint64_t seed = 7;
  int lbfgs_memory = 10;
  double adam_step = 1e-3;
  SampleWeighting sample_weighting = SampleWeighting::uniform;

  void validate() const;
};

struct ReductionConfig {
  ReducerKind state_kind = ReducerKind::pod_ae;
  ReducerKind control_kind = ReducerKind::pod_ae;
  int state_modes = 60;
  int control_modes_per_component = 40;
  int state_latent = 10;
  int control_latent = 18;
  std::vector<int> state_encoder_hidden{100};
  std::vector<int> state_decoder_hidden{100, 100};
  std::vector<int> control_encoder_hidden{100};
  std::vector<int> control_decoder_hidden{200, 200};
  std::vector<int> policy_hidden{50, 50, 50};
  std::vector<int> forward_hidden{50, 50, 50};
  bool center = false;

  void validate() const;
};

/// Trained reduced-order feedback controller.
struct ControllerModel {
  Grid grid;
  FomConfig fom;
  ParameterBox parameter_box;
  Reducer state_reducer;
  Reducer control_reducer;
  /// [y_N; mu] -> u_N. Its input map normalizes mu over parameter_box.
  Mlp policy;
  /// [y_N; u_N; mu] -> y_N at the next step.
  std::optional<Mlp> forward_model;
  std::vector<double> loss_history;
  std::uint64_t seed = 0;

  int state_latent() const noexcept { return state_reducer.latent_dim; }
  int control_latent() const noexcept { return control_reducer.latent_dim; }
  int parameter_dim() const noexcept { return parameter_box.dim(); }
  void validate() const;
};

/// Full-order training data: columns are snapshots.
struct TrainingBatch {
  Eigen::MatrixXd states;       ///< y(t_j)
  Eigen::MatrixXd controls;     ///< u(t_j)
  Eigen::MatrixXd mu;
  Eigen::MatrixXd next_states;  ///< y(t_{j+1})
  /// Per-snapshot loss weights; empty means all ones.
  Eigen::VectorXd weights;

  int size() const noexcept { return static_cast<int>(states.cols()); }
};

TrainingBatch make_batch(const SnapshotSet& data, const std::vector<int>& snapshot_indices);

/// 1/||x_k||^2 per column, rescaled to mean 1; zero columns get weight 0.
Eigen::VectorXd inverse_norm_weights(const Eigen::Ref<const Eigen::MatrixXd>& fields);

/// Unweighted parts of the composite loss; every entry is a mean over the
/// batch of squared Euclidean norms.
struct LossParts {
  double state_rec = 0.0;        ///< ||c_y - D_y(E_y(c_y))||^2
  double control_rec = 0.0;      ///< ||c_u - D_u(E_u(c_u))||^2
  double policy_latent = 0.0;    ///< ||u_N - pi||^2
  double policy_decoded = 0.0;   ///< ||D_u(u_N) - D_u(pi)||^2
  double forward_data = 0.0;     ///< ||y_N' - phi(y_N, u_N)||^2
  double forward_policy = 0.0;   ///< ||y_N' - phi(y_N, pi)||^2
  double forward_decoded = 0.0;  ///< ||D_y(y_N') - D_y(phi(y_N, pi))||^2

  /// l1 rec_y + l2 rec_u + policy_latent + l3 policy_decoded
  ///   + l4 forward_data + l5 forward_policy + l6 forward_decoded.
  double total(const LossWeights& w) const;
};

/// Evaluates the loss parts and, when grad is given, the gradient of
/// parts.total(w) with respect to model_parameters(model). Decoded terms are
/// zero (and skipped) for POD reducers; forward terms are zero without a
/// forward model.
LossParts evaluate_loss(const ControllerModel& model, const TrainingBatch& batch, const LossWeights& w,
                        Eigen::VectorXd* grad = nullptr);

double loss_reconstruction(const ControllerModel& model, const TrainingBatch& batch, const LossWeights& w);
double loss_policy(const ControllerModel& model, const TrainingBatch& batch, const LossWeights& w);
double loss_forward(const ControllerModel& model, const TrainingBatch& batch, const LossWeights& w);

/// Trainable parameters in the order state encoder, state decoder, control
/// encoder, control decoder, policy, forward model.
Eigen::VectorXd model_parameters(const ControllerModel& model);
void set_model_parameters(ControllerModel& model, const Eigen::Ref<const Eigen::VectorXd>& p);

/// Fits POD bases on the training split and builds untrained networks.
ControllerModel initialize_model(const SnapshotSet& data, const ReductionConfig& reduction, bool with_forward,
                                 std::uint64_t seed);

struct TrainResult {
  ControllerModel model;
  std::vector<double> loss_history;
  bool converged = false;
  bool warning = false;
  std::string message;
};

/// Trains every network jointly on the training split. With a forward model
/// the networks are warm-started from warm_start, or from an internal stage-1
/// run when warm_start is empty and cold_start is false.
TrainResult train_controller(const SnapshotSet& data, const ReductionConfig& reduction, const LossWeights& weights,
                             const TrainConfig& cfg, bool with_forward,
                             const std::optional<ControllerModel>& warm_start = std::nullopt,
                             bool cold_start = false);

/// Test-split mean relative errors.
struct EvaluationReport {
  double state_reconstruction = 0.0;
  double control_reconstruction = 0.0;
  double policy_latent = 0.0;
  double policy_decoded = 0.0;
  /// NaN without a forward model.
  double forward_data_latent = 0.0;
  double forward_policy_latent = 0.0;
  double forward_data_decoded = 0.0;
  double forward_policy_decoded = 0.0;
  int test_snapshots = 0;
};

EvaluationReport evaluate_model(const ControllerModel& model, const SnapshotSet& data);
/// Same metrics on an explicit set of snapshots.
EvaluationReport evaluate_model(const ControllerModel& model, const TrainingBatch& batch);

/// Latent state and control of full-order fields.
Eigen::MatrixXd encode_states(const ControllerModel& model, const Eigen::Ref<const Eigen::MatrixXd>& y);
Eigen::MatrixXd encode_controls(const ControllerModel& model, const Eigen::Ref<const Eigen::MatrixXd>& u);
/// pi([y_N; mu]) column-wise.
Eigen::MatrixXd policy_latent(const ControllerModel& model, const Eigen::Ref<const Eigen::MatrixXd>& yN,
                              const Eigen::Ref<const Eigen::MatrixXd>& mu);
/// phi([y_N; u_N; mu]) column-wise.
Eigen::MatrixXd forward_latent(const ControllerModel& model, const Eigen::Ref<const Eigen::MatrixXd>& yN,
                               const Eigen::Ref<const Eigen::MatrixXd>& uN,
                               const Eigen::Ref<const Eigen::MatrixXd>& mu);

}  // namespace romfbk
