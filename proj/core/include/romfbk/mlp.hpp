#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace romfbk {

/// Activations recorded by a forward pass.
struct MlpTape {
  std::vector<Eigen::MatrixXd> inputs;  ///< input of each dense layer
  std::vector<Eigen::MatrixXd> pre;     ///< pre-activation of each hidden layer
};

/// Dense feed-forward network with leaky-ReLU hidden layers and a linear
/// output layer. Samples are columns.
///
/// Two fixed (non-trained) affine maps wrap the network: inputs become
/// (x - input_shift) * input_scale and outputs raw * output_scale + output_shift.
/// Both default to the identity.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<int> layer_dims, double negative_slope = 0.01);

  const std::vector<int>& layer_dims() const noexcept { return dims_; }
  int input_dim() const noexcept { return dims_.empty() ? 0 : dims_.front(); }
  int output_dim() const noexcept { return dims_.empty() ? 0 : dims_.back(); }
  int num_layers() const noexcept { return static_cast<int>(weights_.size()); }
  double negative_slope() const noexcept { return slope_; }
  bool empty() const noexcept { return weights_.empty(); }

  Eigen::MatrixXd& weight(int l) { return weights_.at(static_cast<std::size_t>(l)); }
  const Eigen::MatrixXd& weight(int l) const { return weights_.at(static_cast<std::size_t>(l)); }
  Eigen::VectorXd& bias(int l) { return biases_.at(static_cast<std::size_t>(l)); }
  const Eigen::VectorXd& bias(int l) const { return biases_.at(static_cast<std::size_t>(l)); }

  Eigen::Index parameter_count() const noexcept;
  /// Layer by layer: W (column-major) then b.
  Eigen::VectorXd parameters() const;
  void set_parameters(const Eigen::Ref<const Eigen::VectorXd>& p);

  void set_input_affine(Eigen::VectorXd shift, Eigen::VectorXd scale);
  void set_output_affine(Eigen::VectorXd scale, Eigen::VectorXd shift);
  const Eigen::VectorXd& input_shift() const noexcept { return in_shift_; }
  const Eigen::VectorXd& input_scale() const noexcept { return in_scale_; }
  const Eigen::VectorXd& output_scale() const noexcept { return out_scale_; }
  const Eigen::VectorXd& output_shift() const noexcept { return out_shift_; }

  Eigen::MatrixXd forward(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
  Eigen::MatrixXd forward(const Eigen::Ref<const Eigen::MatrixXd>& x, MlpTape& tape) const;

  /// Reverse pass of the taped forward call. Adds the parameter gradient to
  /// param_grad (length parameter_count()) and returns the input gradient.
  Eigen::MatrixXd backward(const MlpTape& tape, const Eigen::Ref<const Eigen::MatrixXd>& upstream,
                           Eigen::Ref<Eigen::VectorXd> param_grad) const;

 private:
  Eigen::MatrixXd run(const Eigen::Ref<const Eigen::MatrixXd>& x, MlpTape* tape) const;

  std::vector<int> dims_;
  double slope_ = 0.01;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
  Eigen::VectorXd in_shift_;
  Eigen::VectorXd in_scale_;
  Eigen::VectorXd out_scale_;
  Eigen::VectorXd out_shift_;
};

/// He-normal weights (std sqrt(2 / fan_in)), zero biases.
Mlp init_he(const std::vector<int>& layer_dims, std::uint64_t seed, double negative_slope = 0.01);

/// Square network of one linear layer with identity weights.
Mlp identity_mlp(int dim);

}  // namespace romfbk
