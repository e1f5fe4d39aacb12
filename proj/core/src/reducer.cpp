#include "romfbk/reducer.hpp"

#include <stdexcept>
#include <string>

namespace romfbk {

std::string_view to_string(ReducerKind kind) {
  switch (kind) {
    case ReducerKind::pod:
      return "pod";
    case ReducerKind::ae:
      return "ae";
    case ReducerKind::pod_ae:
      return "pod_ae";
  }
  return "pod";
}

ReducerKind reducer_kind_from_string(std::string_view name) {
  if (name == "pod") return ReducerKind::pod;
  if (name == "ae") return ReducerKind::ae;
  if (name == "pod_ae" || name == "pod+ae") return ReducerKind::pod_ae;
  throw std::invalid_argument("unknown reducer kind '" + std::string(name) + "'");
}

int Reducer::full_dim() const {
  if (pod) return pod->full_dim();
  return encoder.input_dim();
}

int Reducer::network_dim() const {
  if (kind == ReducerKind::pod_ae) return pod->n_modes();
  return full_dim();
}

void Reducer::validate() const {
  switch (kind) {
    case ReducerKind::pod:
      if (!pod || !encoder.empty() || !decoder.empty()) throw std::invalid_argument("reducer: pod kind takes a basis only");
      if (latent_dim != pod->n_modes()) throw std::invalid_argument("reducer: latent dim must equal POD mode count");
      break;
    case ReducerKind::ae:
      if (pod || encoder.empty() || decoder.empty()) throw std::invalid_argument("reducer: ae kind takes networks only");
      break;
    case ReducerKind::pod_ae:
      if (!pod || encoder.empty() || decoder.empty()) throw std::invalid_argument("reducer: pod_ae needs basis and networks");
      if (encoder.input_dim() != pod->n_modes() || decoder.output_dim() != pod->n_modes()) {
        throw std::invalid_argument("reducer: autoencoder width must equal POD mode count");
      }
      break;
  }
  if (has_networks() && (encoder.output_dim() != latent_dim || decoder.input_dim() != latent_dim ||
                         encoder.input_dim() != decoder.output_dim())) {
    throw std::invalid_argument("reducer: encoder/decoder dimensions are inconsistent");
  }
}

Eigen::MatrixXd Reducer::to_network_space(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  if (kind == ReducerKind::pod_ae) return pod_encode(*pod, x);
  if (x.rows() != full_dim()) throw std::invalid_argument("reducer: input dimension mismatch");
  return x;
}

Eigen::MatrixXd Reducer::from_network_space(const Eigen::Ref<const Eigen::MatrixXd>& c) const {
  if (kind == ReducerKind::pod_ae) return pod_decode(*pod, c);
  return c;
}

Eigen::MatrixXd Reducer::encode(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  switch (kind) {
    case ReducerKind::pod:
      return pod_encode(*pod, x);
    case ReducerKind::ae:
    case ReducerKind::pod_ae:
      if (!networks_ready) throw std::logic_error("reducer: autoencoder used before training");
      return encoder.forward(to_network_space(x));
  }
  return {};
}

Eigen::MatrixXd Reducer::decode(const Eigen::Ref<const Eigen::MatrixXd>& z) const {
  if (z.rows() != latent_dim) throw std::invalid_argument("reducer: latent dimension mismatch");
  switch (kind) {
    case ReducerKind::pod:
      return pod_decode(*pod, z);
    case ReducerKind::ae:
    case ReducerKind::pod_ae:
      if (!networks_ready) throw std::logic_error("reducer: autoencoder used before training");
      return from_network_space(decoder.forward(z));
  }
  return {};
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> minmax_affine(const Eigen::Ref<const Eigen::MatrixXd>& samples) {
  const Eigen::VectorXd lo = samples.rowwise().minCoeff();
  const Eigen::VectorXd hi = samples.rowwise().maxCoeff();
  Eigen::VectorXd scale(lo.size());
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    const double range = hi(i) - lo(i);
    scale(i) = range > 1e-12 ? 1.0 / range : 1.0;
  }
  return {lo, scale};
}

namespace {

void attach_autoencoder(Reducer& r, const Eigen::Ref<const Eigen::MatrixXd>& net_inputs, const AutoencoderShape& shape,
                        std::uint64_t seed) {
  const int width = static_cast<int>(net_inputs.rows());
  std::vector<int> enc{width};
  enc.insert(enc.end(), shape.encoder_hidden.begin(), shape.encoder_hidden.end());
  enc.push_back(shape.latent_dim);
  std::vector<int> dec{shape.latent_dim};
  dec.insert(dec.end(), shape.decoder_hidden.begin(), shape.decoder_hidden.end());
  dec.push_back(width);

  r.encoder = init_he(enc, seed);
  r.decoder = init_he(dec, seed + 1);
  auto [shift, scale] = minmax_affine(net_inputs);
  r.encoder.set_input_affine(shift, scale);
  r.decoder.set_output_affine(scale.cwiseInverse(), shift);
  r.latent_dim = shape.latent_dim;
  r.networks_ready = false;
}

}  // namespace

Reducer make_pod_reducer(PodBasis basis) {
  Reducer r;
  r.kind = ReducerKind::pod;
  r.latent_dim = basis.n_modes();
  r.pod = std::move(basis);
  r.networks_ready = true;
  return r;
}

Reducer make_ae_reducer(const Eigen::Ref<const Eigen::MatrixXd>& training_fields, const AutoencoderShape& shape,
                        std::uint64_t seed) {
  Reducer r;
  r.kind = ReducerKind::ae;
  attach_autoencoder(r, training_fields, shape, seed);
  r.validate();
  return r;
}

Reducer make_pod_ae_reducer(PodBasis basis, const Eigen::Ref<const Eigen::MatrixXd>& training_fields,
                            const AutoencoderShape& shape, std::uint64_t seed) {
  Reducer r;
  r.kind = ReducerKind::pod_ae;
  const Eigen::MatrixXd coeffs = pod_encode(basis, training_fields);
  r.pod = std::move(basis);
  attach_autoencoder(r, coeffs, shape, seed);
  r.validate();
  return r;
}

}  // namespace romfbk
