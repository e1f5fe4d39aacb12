#include "romfbk/mlp.hpp"

#include "romfbk/random.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace romfbk {

Mlp::Mlp(std::vector<int> layer_dims, double negative_slope) : dims_(std::move(layer_dims)), slope_(negative_slope) {
  if (dims_.size() < 2) throw std::invalid_argument("mlp: need at least input and output dims");
  for (const int d : dims_) {
    if (d < 1) throw std::invalid_argument("mlp: layer dims must be >= 1");
  }
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    weights_.push_back(Eigen::MatrixXd::Zero(dims_[l + 1], dims_[l]));
    biases_.push_back(Eigen::VectorXd::Zero(dims_[l + 1]));
  }
  in_shift_ = Eigen::VectorXd::Zero(dims_.front());
  in_scale_ = Eigen::VectorXd::Ones(dims_.front());
  out_scale_ = Eigen::VectorXd::Ones(dims_.back());
  out_shift_ = Eigen::VectorXd::Zero(dims_.back());
}

Eigen::Index Mlp::parameter_count() const noexcept {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
  return n;
}

Eigen::VectorXd Mlp::parameters() const {
  Eigen::VectorXd p(parameter_count());
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    p.segment(off, weights_[l].size()) = weights_[l].reshaped();
    off += weights_[l].size();
    p.segment(off, biases_[l].size()) = biases_[l];
    off += biases_[l].size();
  }
  return p;
}

void Mlp::set_parameters(const Eigen::Ref<const Eigen::VectorXd>& p) {
  if (p.size() != parameter_count()) throw std::invalid_argument("mlp: parameter vector length mismatch");
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    weights_[l].reshaped() = p.segment(off, weights_[l].size());
    off += weights_[l].size();
    biases_[l] = p.segment(off, biases_[l].size());
    off += biases_[l].size();
  }
}

void Mlp::set_input_affine(Eigen::VectorXd shift, Eigen::VectorXd scale) {
  if (shift.size() != input_dim() || scale.size() != input_dim()) {
    throw std::invalid_argument("mlp: input affine map has wrong length");
  }
  in_shift_ = std::move(shift);
  in_scale_ = std::move(scale);
}

void Mlp::set_output_affine(Eigen::VectorXd scale, Eigen::VectorXd shift) {
  if (shift.size() != output_dim() || scale.size() != output_dim()) {
    throw std::invalid_argument("mlp: output affine map has wrong length");
  }
  out_scale_ = std::move(scale);
  out_shift_ = std::move(shift);
}

Eigen::MatrixXd Mlp::forward(const Eigen::Ref<const Eigen::MatrixXd>& x) const { return run(x, nullptr); }

Eigen::MatrixXd Mlp::forward(const Eigen::Ref<const Eigen::MatrixXd>& x, MlpTape& tape) const { return run(x, &tape); }

Eigen::MatrixXd Mlp::run(const Eigen::Ref<const Eigen::MatrixXd>& x, MlpTape* tape) const {
  if (empty()) throw std::logic_error("mlp: network has no layers");
  if (x.rows() != input_dim()) {
    throw std::invalid_argument("mlp: input has " + std::to_string(x.rows()) + " rows, expected " +
                                std::to_string(input_dim()));
  }
  if (tape) {
    tape->inputs.clear();
    tape->pre.clear();
  }
  Eigen::MatrixXd a = (x.colwise() - in_shift_).array().colwise() * in_scale_.array();
  const int last = num_layers() - 1;
  for (int l = 0; l <= last; ++l) {
    const auto sl = static_cast<std::size_t>(l);
    Eigen::MatrixXd z = weights_[sl] * a;
    z.colwise() += biases_[sl];
    if (tape) tape->inputs.push_back(std::move(a));
    if (l < last) {
      if (tape) tape->pre.push_back(z);
      const double s = slope_;
      a = z.unaryExpr([s](double v) { return v >= 0.0 ? v : s * v; });
    } else {
      a = std::move(z);
    }
  }
  return (a.array().colwise() * out_scale_.array()).colwise() + out_shift_.array();
}

Eigen::MatrixXd Mlp::backward(const MlpTape& tape, const Eigen::Ref<const Eigen::MatrixXd>& upstream,
                              Eigen::Ref<Eigen::VectorXd> param_grad) const {
  if (param_grad.size() != parameter_count()) throw std::invalid_argument("mlp: gradient buffer length mismatch");
  if (tape.inputs.size() != weights_.size()) throw std::invalid_argument("mlp: tape does not match network");
  if (upstream.rows() != output_dim()) throw std::invalid_argument("mlp: upstream gradient has wrong rows");

  // Offsets of each layer's block in the flat parameter vector.
  std::vector<Eigen::Index> offset(weights_.size());
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    offset[l] = off;
    off += weights_[l].size() + biases_[l].size();
  }

  Eigen::MatrixXd d = upstream.array().colwise() * out_scale_.array();
  for (int l = num_layers() - 1; l >= 0; --l) {
    const auto sl = static_cast<std::size_t>(l);
    const Eigen::Index wsize = weights_[sl].size();
    param_grad.segment(offset[sl], wsize).reshaped(weights_[sl].rows(), weights_[sl].cols()) +=
        d * tape.inputs[sl].transpose();
    param_grad.segment(offset[sl] + wsize, biases_[sl].size()) += d.rowwise().sum();
    d = weights_[sl].transpose() * d;
    if (l > 0) {
      const double s = slope_;
      d.array() *= tape.pre[sl - 1].unaryExpr([s](double v) { return v >= 0.0 ? 1.0 : s; }).array();
    }
  }
  return d.array().colwise() * in_scale_.array();
}

Mlp init_he(const std::vector<int>& layer_dims, std::uint64_t seed, double negative_slope) {
  Mlp net(layer_dims, negative_slope);
  std::mt19937_64 rng(seed);
  for (int l = 0; l < net.num_layers(); ++l) {
    Eigen::MatrixXd& w = net.weight(l);
    const double stddev = std::sqrt(2.0 / static_cast<double>(w.cols()));
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = stddev * standard_normal(rng);
    }
  }
  return net;
}

Mlp identity_mlp(int dim) {
  Mlp net({dim, dim});
  net.weight(0).setIdentity();
  return net;
}

}  // namespace romfbk
