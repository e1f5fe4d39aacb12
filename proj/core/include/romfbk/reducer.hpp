#pragma once

#include "romfbk/mlp.hpp"
#include "romfbk/pod.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace romfbk {

enum class ReducerKind { pod, ae, pod_ae };

std::string_view to_string(ReducerKind kind);
ReducerKind reducer_kind_from_string(std::string_view name);

/// Encoder/decoder pair between full-order fields and a latent space.
///
///   pod    : z = V^T x          x = V z
///   ae     : z = E(x)           x = D(z)
///   pod_ae : z = E(V^T x)       x = V D(z)
///
/// The autoencoder acts on "network space": the full field for ae, POD
/// coefficients for pod_ae.
struct Reducer {
  ReducerKind kind = ReducerKind::pod;
  std::optional<PodBasis> pod;
  Mlp encoder;
  Mlp decoder;
  int latent_dim = 0;
  /// Networks have been trained (or explicitly finalized) and may be used.
  bool networks_ready = false;

  bool has_networks() const noexcept { return kind != ReducerKind::pod; }
  int full_dim() const;
  int network_dim() const;

  Eigen::MatrixXd encode(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
  Eigen::MatrixXd decode(const Eigen::Ref<const Eigen::MatrixXd>& z) const;

  /// Full field -> network space (V^T x for pod_ae, x otherwise).
  Eigen::MatrixXd to_network_space(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
  /// Network space -> full field.
  Eigen::MatrixXd from_network_space(const Eigen::Ref<const Eigen::MatrixXd>& c) const;

  void validate() const;
};

struct AutoencoderShape {
  int latent_dim = 10;
  std::vector<int> encoder_hidden{100};
  std::vector<int> decoder_hidden{100, 100};
};

Reducer make_pod_reducer(PodBasis basis);

/// Autoencoder on full fields. The encoder input and decoder output carry a
/// per-feature min-max normalization fitted on training_fields.
Reducer make_ae_reducer(const Eigen::Ref<const Eigen::MatrixXd>& training_fields, const AutoencoderShape& shape,
                        std::uint64_t seed);

/// Autoencoder on the POD coefficients of training_fields.
Reducer make_pod_ae_reducer(PodBasis basis, const Eigen::Ref<const Eigen::MatrixXd>& training_fields,
                            const AutoencoderShape& shape, std::uint64_t seed);

/// Per-row [min, max] of the samples: returns (shift = min, scale = 1/(max-min)),
/// with scale 1 on rows of (near) zero range.
std::pair<Eigen::VectorXd, Eigen::VectorXd> minmax_affine(const Eigen::Ref<const Eigen::MatrixXd>& samples);

}  // namespace romfbk
