#include "romfbk/training.hpp"

#include "romfbk/optim.hpp"
#include "romfbk/random.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace romfbk {

void LossWeights::validate() const {
  for (const double v : {l1, l2, l3, l4, l5, l6}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("loss weights must be finite and >= 0");
  }
}

void TrainConfig::validate() const {
  if (max_epochs < 1) throw std::invalid_argument("train: max_epochs must be >= 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("train: tolerance must be > 0");
  if (lbfgs_memory < 1) throw std::invalid_argument("train: lbfgs_memory must be >= 1");
  if (!(adam_step > 0.0)) throw std::invalid_argument("train: adam_step must be > 0");
}

void ReductionConfig::validate() const {
  if (state_modes < 1 || control_modes_per_component < 1) throw std::invalid_argument("reduction: mode counts must be >= 1");
  if (state_latent < 1 || control_latent < 1) throw std::invalid_argument("reduction: latent dims must be >= 1");
  for (const auto* v : {&state_encoder_hidden, &state_decoder_hidden, &control_encoder_hidden, &control_decoder_hidden,
                        &policy_hidden, &forward_hidden}) {
    if (std::any_of(v->begin(), v->end(), [](int d) { return d < 1; })) {
      throw std::invalid_argument("reduction: hidden widths must be >= 1");
    }
  }
}

void ControllerModel::validate() const {
  state_reducer.validate();
  control_reducer.validate();
  if (state_reducer.full_dim() != grid.size() || control_reducer.full_dim() != 2 * grid.size()) {
    throw std::invalid_argument("model: reducers do not match the grid");
  }
  const int p = parameter_dim();
  if (policy.input_dim() != state_latent() + p || policy.output_dim() != control_latent()) {
    throw std::invalid_argument("model: policy dimensions are inconsistent");
  }
  if (forward_model && (forward_model->input_dim() != state_latent() + control_latent() + p ||
                        forward_model->output_dim() != state_latent())) {
    throw std::invalid_argument("model: forward model dimensions are inconsistent");
  }
}

TrainingBatch make_batch(const SnapshotSet& data, const std::vector<int>& idx) {
  const Eigen::Index k = static_cast<Eigen::Index>(idx.size());
  TrainingBatch b;
  b.states.resize(data.states.rows(), k);
  b.controls.resize(data.controls.rows(), k);
  b.mu.resize(data.mu.rows(), k);
  b.next_states.resize(data.states.rows(), k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const int s = idx[static_cast<std::size_t>(c)];
    b.states.col(c) = data.states.col(s);
    b.controls.col(c) = data.controls.col(s);
    b.mu.col(c) = data.mu.col(s);
    b.next_states.col(c) = data.next_state(s);
  }
  return b;
}

Eigen::VectorXd inverse_norm_weights(const Eigen::Ref<const Eigen::MatrixXd>& fields) {
  Eigen::VectorXd w(fields.cols());
  for (Eigen::Index k = 0; k < fields.cols(); ++k) {
    const double n2 = fields.col(k).squaredNorm();
    w(k) = n2 > 0.0 ? 1.0 / n2 : 0.0;
  }
  const double mean = w.mean();
  if (mean > 0.0) w /= mean;
  return w;
}

double LossParts::total(const LossWeights& w) const {
  return w.l1 * state_rec + w.l2 * control_rec + policy_latent + w.l3 * policy_decoded + w.l4 * forward_data +
         w.l5 * forward_policy + w.l6 * forward_decoded;
}

namespace {

struct Layout {
  Eigen::Index ey = 0, dy = 0, eu = 0, du = 0, pi = 0, phi = 0, end = 0;
};

Eigen::Index count(const Reducer& r, bool enc) {
  if (!r.has_networks()) return 0;
  return enc ? r.encoder.parameter_count() : r.decoder.parameter_count();
}

Layout layout_of(const ControllerModel& m) {
  Layout l;
  l.dy = l.ey + count(m.state_reducer, true);
  l.eu = l.dy + count(m.state_reducer, false);
  l.du = l.eu + count(m.control_reducer, true);
  l.pi = l.du + count(m.control_reducer, false);
  l.phi = l.pi + m.policy.parameter_count();
  l.end = l.phi + (m.forward_model ? m.forward_model->parameter_count() : 0);
  return l;
}

// Weighted mean over columns of squared norms.
double mean_sq(const Eigen::MatrixXd& d, const Eigen::VectorXd& w) {
  return d.colwise().squaredNorm().dot(w) / static_cast<double>(d.cols());
}

Eigen::MatrixXd hcat(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

Eigen::MatrixXd vcat(std::initializer_list<const Eigen::MatrixXd*> parts) {
  Eigen::Index rows = 0;
  Eigen::Index cols = (*parts.begin())->cols();
  for (const auto* p : parts) rows += p->rows();
  Eigen::MatrixXd out(rows, cols);
  Eigen::Index r = 0;
  for (const auto* p : parts) {
    out.middleRows(r, p->rows()) = *p;
    r += p->rows();
  }
  return out;
}

}  // namespace

Eigen::VectorXd model_parameters(const ControllerModel& m) {
  const Layout l = layout_of(m);
  Eigen::VectorXd p(l.end);
  if (m.state_reducer.has_networks()) {
    p.segment(l.ey, l.dy - l.ey) = m.state_reducer.encoder.parameters();
    p.segment(l.dy, l.eu - l.dy) = m.state_reducer.decoder.parameters();
  }
  if (m.control_reducer.has_networks()) {
    p.segment(l.eu, l.du - l.eu) = m.control_reducer.encoder.parameters();
    p.segment(l.du, l.pi - l.du) = m.control_reducer.decoder.parameters();
  }
  p.segment(l.pi, l.phi - l.pi) = m.policy.parameters();
  if (m.forward_model) p.segment(l.phi, l.end - l.phi) = m.forward_model->parameters();
  return p;
}

void set_model_parameters(ControllerModel& m, const Eigen::Ref<const Eigen::VectorXd>& p) {
  const Layout l = layout_of(m);
  if (p.size() != l.end) throw std::invalid_argument("model: parameter vector length mismatch");
  if (m.state_reducer.has_networks()) {
    m.state_reducer.encoder.set_parameters(p.segment(l.ey, l.dy - l.ey));
    m.state_reducer.decoder.set_parameters(p.segment(l.dy, l.eu - l.dy));
  }
  if (m.control_reducer.has_networks()) {
    m.control_reducer.encoder.set_parameters(p.segment(l.eu, l.du - l.eu));
    m.control_reducer.decoder.set_parameters(p.segment(l.du, l.pi - l.du));
  }
  m.policy.set_parameters(p.segment(l.pi, l.phi - l.pi));
  if (m.forward_model) m.forward_model->set_parameters(p.segment(l.phi, l.end - l.phi));
}

LossParts evaluate_loss(const ControllerModel& m, const TrainingBatch& b, const LossWeights& w, Eigen::VectorXd* grad) {
  const int k = b.size();
  if (k < 1) throw std::invalid_argument("loss: empty batch");
  const double two_k = 2.0 / k;
  const Reducer& ry = m.state_reducer;
  const Reducer& ru = m.control_reducer;
  const bool y_nets = ry.has_networks();
  const bool u_nets = ru.has_networks();
  const bool fwd = m.forward_model.has_value();
  const Layout lay = layout_of(m);
  if (grad) grad->setZero(lay.end);
  auto slot = [&](Eigen::Index a, Eigen::Index e) { return grad->segment(a, e - a); };

  const Eigen::VectorXd sw = b.weights.size() ? b.weights : Eigen::VectorXd::Ones(k);
  if (sw.size() != k) throw std::invalid_argument("loss: weight count differs from batch size");
  const auto W = sw.asDiagonal();

  LossParts parts;
  MlpTape t_ey, t_dy, t_dy2, t_eu, t_du, t_du2, t_pi, t_phi;

  // State latents (current and, with a forward model, next).
  const Eigen::MatrixXd c_y = ry.to_network_space(b.states);
  Eigen::MatrixXd c_yn;
  if (fwd) c_yn = ry.to_network_space(b.next_states);
  Eigen::MatrixXd y_n, y_nn, rec_y;
  if (y_nets) {
    const Eigen::MatrixXd z = ry.encoder.forward(fwd ? hcat(c_y, c_yn) : c_y, t_ey);
    y_n = z.leftCols(k);
    if (fwd) y_nn = z.rightCols(k);
    rec_y = ry.decoder.forward(y_n, t_dy);
    parts.state_rec = mean_sq(c_y - rec_y, sw);
  } else {
    y_n = pod_encode(*ry.pod, b.states);
    if (fwd) y_nn = pod_encode(*ry.pod, b.next_states);
  }

  // Control latents.
  const Eigen::MatrixXd c_u = ru.to_network_space(b.controls);
  Eigen::MatrixXd u_n, rec_u;
  if (u_nets) {
    u_n = ru.encoder.forward(c_u, t_eu);
    rec_u = ru.decoder.forward(u_n, t_du);
    parts.control_rec = mean_sq(c_u - rec_u, sw);
  } else {
    u_n = pod_encode(*ru.pod, b.controls);
  }

  // Policy.
  const Eigen::MatrixXd pi = m.policy.forward(vcat({&y_n, &b.mu}), t_pi);
  parts.policy_latent = mean_sq(u_n - pi, sw);
  Eigen::MatrixXd dec_pi;
  if (u_nets) {
    dec_pi = ru.decoder.forward(pi, t_du2);
    parts.policy_decoded = mean_sq(rec_u - dec_pi, sw);
  }

  // Forward model.
  Eigen::MatrixXd phi_data, phi_pol, dec2;
  if (fwd) {
    const Eigen::MatrixXd in = hcat(vcat({&y_n, &u_n, &b.mu}), vcat({&y_n, &pi, &b.mu}));
    const Eigen::MatrixXd out = m.forward_model->forward(in, t_phi);
    phi_data = out.leftCols(k);
    phi_pol = out.rightCols(k);
    parts.forward_data = mean_sq(y_nn - phi_data, sw);
    parts.forward_policy = mean_sq(y_nn - phi_pol, sw);
    if (y_nets) {
      dec2 = ry.decoder.forward(hcat(y_nn, phi_pol), t_dy2);
      parts.forward_decoded = mean_sq(dec2.leftCols(k) - dec2.rightCols(k), sw);
    }
  }
  if (!grad) return parts;

  // Reverse sweep: consumers before producers.
  const int ny = ry.latent_dim;
  const int nu = ru.latent_dim;
  Eigen::MatrixXd g_yn = Eigen::MatrixXd::Zero(ny, k);
  Eigen::MatrixXd g_ynn = Eigen::MatrixXd::Zero(ny, fwd ? k : 0);
  Eigen::MatrixXd g_un = two_k * (u_n - pi) * W;
  Eigen::MatrixXd g_pi = -g_un;

  if (fwd) {
    g_ynn = two_k * (w.l4 * (y_nn - phi_data) + w.l5 * (y_nn - phi_pol)) * W;
    Eigen::MatrixXd g_phi_pol = -two_k * w.l5 * (y_nn - phi_pol) * W;
    if (y_nets && w.l6 > 0.0) {
      const Eigen::MatrixXd diff = two_k * w.l6 * (dec2.leftCols(k) - dec2.rightCols(k)) * W;
      const Eigen::MatrixXd gin = ry.decoder.backward(t_dy2, hcat(diff, -diff), slot(lay.dy, lay.eu));
      g_ynn += gin.leftCols(k);
      g_phi_pol += gin.rightCols(k);
    }
    const Eigen::MatrixXd g_out = hcat(-two_k * w.l4 * (y_nn - phi_data) * W, g_phi_pol);
    const Eigen::MatrixXd gin = m.forward_model->backward(t_phi, g_out, slot(lay.phi, lay.end));
    g_yn += gin.topRows(ny).leftCols(k) + gin.topRows(ny).rightCols(k);
    g_un += gin.middleRows(ny, nu).leftCols(k);
    g_pi += gin.middleRows(ny, nu).rightCols(k);
  }

  Eigen::MatrixXd g_rec_u;
  if (u_nets) {
    const Eigen::MatrixXd diff = two_k * w.l3 * (rec_u - dec_pi) * W;
    if (w.l3 > 0.0) g_pi += ru.decoder.backward(t_du2, -diff, slot(lay.du, lay.pi));
    g_rec_u = -two_k * w.l2 * (c_u - rec_u) * W + diff;
  }

  {
    const Eigen::MatrixXd gin = m.policy.backward(t_pi, g_pi, slot(lay.pi, lay.phi));
    g_yn += gin.topRows(ny);
  }

  if (u_nets) {
    g_un += ru.decoder.backward(t_du, g_rec_u, slot(lay.du, lay.pi));
    ru.encoder.backward(t_eu, g_un, slot(lay.eu, lay.du));
  }

  if (y_nets) {
    g_yn += ry.decoder.backward(t_dy, -two_k * w.l1 * (c_y - rec_y) * W, slot(lay.dy, lay.eu));
    ry.encoder.backward(t_ey, fwd ? hcat(g_yn, g_ynn) : g_yn, slot(lay.ey, lay.dy));
  }
  return parts;
}

double loss_reconstruction(const ControllerModel& m, const TrainingBatch& b, const LossWeights& w) {
  const LossParts p = evaluate_loss(m, b, w);
  return w.l1 * p.state_rec + w.l2 * p.control_rec;
}

double loss_policy(const ControllerModel& m, const TrainingBatch& b, const LossWeights& w) {
  const LossParts p = evaluate_loss(m, b, w);
  return p.policy_latent + w.l3 * p.policy_decoded;
}

double loss_forward(const ControllerModel& m, const TrainingBatch& b, const LossWeights& w) {
  if (!m.forward_model) throw std::invalid_argument("loss_forward: forward model absent");
  if (m.fom.steps < 2) throw std::invalid_argument("loss_forward: trajectories need at least 2 steps");
  const LossParts p = evaluate_loss(m, b, w);
  return w.l4 * p.forward_data + w.l5 * p.forward_policy + w.l6 * p.forward_decoded;
}

namespace {

// (shift, scale) of a min-max map onto [0, 1], and its inverse as (scale, shift).
struct Affine {
  Eigen::VectorXd shift, scale;
};

Affine latent_input_affine(const Reducer& r, const Eigen::MatrixXd& latents) {
  if (r.kind == ReducerKind::pod) {
    auto [s, c] = minmax_affine(latents);
    return {s, c};
  }
  return {Eigen::VectorXd::Zero(r.latent_dim), Eigen::VectorXd::Ones(r.latent_dim)};
}

Affine box_affine(const ParameterBox& box) {
  Eigen::VectorXd scale(box.dim());
  for (int i = 0; i < box.dim(); ++i) {
    const double range = box.hi(i) - box.lo(i);
    scale(i) = range > 1e-12 ? 1.0 / range : 1.0;
  }
  return {box.lo, scale};
}

Eigen::VectorXd vstack(std::initializer_list<const Eigen::VectorXd*> parts) {
  Eigen::Index n = 0;
  for (const auto* p : parts) n += p->size();
  Eigen::VectorXd out(n);
  Eigen::Index o = 0;
  for (const auto* p : parts) {
    out.segment(o, p->size()) = *p;
    o += p->size();
  }
  return out;
}

std::vector<int> dims_of(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> d{in};
  d.insert(d.end(), hidden.begin(), hidden.end());
  d.push_back(out);
  return d;
}

Mlp make_forward_model(const ControllerModel& m, const ReductionConfig& red, const Eigen::MatrixXd& y_lat,
                       const Eigen::MatrixXd& u_lat, std::uint64_t seed) {
  const int ny = m.state_latent();
  const int nu = m.control_latent();
  Mlp phi = init_he(dims_of(ny + nu + m.parameter_dim(), red.forward_hidden, ny), derive_seed(seed, "forward"));
  const Affine ay = latent_input_affine(m.state_reducer, y_lat);
  const Affine au = latent_input_affine(m.control_reducer, u_lat);
  const Affine ap = box_affine(m.parameter_box);
  phi.set_input_affine(vstack({&ay.shift, &au.shift, &ap.shift}), vstack({&ay.scale, &au.scale, &ap.scale}));
  phi.set_output_affine(ay.scale.cwiseInverse(), ay.shift);
  return phi;
}

// Latents of the training split for reducers that have fixed (POD) latents;
// zeros otherwise (their normalization is the identity).
Eigen::MatrixXd fixed_latents(const Reducer& r, const Eigen::MatrixXd& x) {
  if (r.kind == ReducerKind::pod) return pod_encode(*r.pod, x);
  return Eigen::MatrixXd::Zero(r.latent_dim, 1);
}

}  // namespace

ControllerModel initialize_model(const SnapshotSet& data, const ReductionConfig& red, bool with_forward,
                                 std::uint64_t seed) {
  red.validate();
  const std::vector<int> idx = data.train_indices();
  if (idx.empty()) throw std::invalid_argument("training: empty training split");
  const TrainingBatch b = make_batch(data, idx);
  const int n_snap = b.size();

  ControllerModel m;
  m.grid = data.grid;
  m.fom = data.fom;
  m.parameter_box = data.parameter_box;
  m.seed = seed;

  auto clip = [&](int want, const char* what) {
    if (want > n_snap) {
      spdlog::warn("training: {} POD modes capped at {} training snapshots", what, n_snap);
      return n_snap;
    }
    return want;
  };

  PodOptions sopt;
  sopt.n_modes = clip(std::min(red.state_modes, data.grid.size()), "state");
  sopt.center = red.center;
  const int cmodes = clip(std::min(red.control_modes_per_component, data.grid.size()), "control");

  auto build = [&](ReducerKind kind, PodBasis basis, const Eigen::MatrixXd& fields, int latent,
                   const std::vector<int>& enc, const std::vector<int>& dec, std::string_view tag) {
    AutoencoderShape shape{latent, enc, dec};
    switch (kind) {
      case ReducerKind::pod:
        return make_pod_reducer(std::move(basis));
      case ReducerKind::ae:
        return make_ae_reducer(fields, shape, derive_seed(seed, tag));
      case ReducerKind::pod_ae:
        return make_pod_ae_reducer(std::move(basis), fields, shape, derive_seed(seed, tag));
    }
    return Reducer{};
  };
  m.state_reducer = build(red.state_kind,
                          red.state_kind == ReducerKind::ae ? PodBasis{} : compute_pod(b.states, sopt), b.states,
                          red.state_latent, red.state_encoder_hidden, red.state_decoder_hidden, "state_ae");
  m.control_reducer =
      build(red.control_kind,
            red.control_kind == ReducerKind::ae ? PodBasis{} : control_pod_componentwise(b.controls, cmodes, red.center),
            b.controls, red.control_latent, red.control_encoder_hidden, red.control_decoder_hidden, "control_ae");

  const Eigen::MatrixXd y_lat = fixed_latents(m.state_reducer, b.states);
  const Eigen::MatrixXd u_lat = fixed_latents(m.control_reducer, b.controls);
  const int ny = m.state_latent();
  const int nu = m.control_latent();
  m.policy = init_he(dims_of(ny + m.parameter_dim(), red.policy_hidden, nu), derive_seed(seed, "policy"));
  const Affine ay = latent_input_affine(m.state_reducer, y_lat);
  const Affine ap = box_affine(m.parameter_box);
  m.policy.set_input_affine(vstack({&ay.shift, &ap.shift}), vstack({&ay.scale, &ap.scale}));
  const Affine au = latent_input_affine(m.control_reducer, u_lat);
  m.policy.set_output_affine(au.scale.cwiseInverse(), au.shift);

  if (with_forward) m.forward_model = make_forward_model(m, red, y_lat, u_lat, seed);
  m.validate();
  return m;
}

namespace {

TrainResult run_stage(ControllerModel model, const TrainingBatch& batch, const LossWeights& w, const TrainConfig& cfg) {
  ControllerModel work = model;
  Objective f = [&](const Eigen::VectorXd& p, Eigen::VectorXd& g) {
    set_model_parameters(work, p);
    return evaluate_loss(work, batch, w, &g).total(w);
  };
  OptimResult r;
  if (cfg.optimizer == OptimizerKind::lbfgs) {
    LbfgsOptions o;
    o.memory = cfg.lbfgs_memory;
    o.max_iters = cfg.max_epochs;
    o.grad_tol = cfg.tolerance;
    r = minimize_lbfgs(f, model_parameters(model), o);
  } else {
    AdamOptions o;
    o.max_iters = cfg.max_epochs;
    o.learning_rate = cfg.adam_step;
    o.grad_tol = cfg.tolerance;
    r = minimize_adam(f, model_parameters(model), o);
  }
  set_model_parameters(model, r.x);
  model.state_reducer.networks_ready = true;
  model.control_reducer.networks_ready = true;

  TrainResult out;
  out.loss_history = r.history;
  out.converged = r.converged;
  out.warning = r.line_search_failed;
  out.message = r.message;
  if (out.warning) spdlog::warn("training: optimizer stopped early ({}); keeping best iterate", r.message);
  model.loss_history.insert(model.loss_history.end(), r.history.begin(), r.history.end());
  out.model = std::move(model);
  return out;
}

}  // namespace

TrainResult train_controller(const SnapshotSet& data, const ReductionConfig& red, const LossWeights& weights,
                             const TrainConfig& cfg, bool with_forward, const std::optional<ControllerModel>& warm_start,
                             bool cold_start) {
  weights.validate();
  cfg.validate();
  data.validate();
  if (with_forward && data.steps < 2) {
    throw std::invalid_argument("training: a forward model needs trajectories of at least 2 steps");
  }
  TrainingBatch batch = make_batch(data, data.train_indices());
  if (cfg.sample_weighting == SampleWeighting::inverse_control_norm) batch.weights = inverse_norm_weights(batch.controls);

  ControllerModel model;
  std::vector<double> history;
  if (!with_forward) {
    model = warm_start ? *warm_start : initialize_model(data, red, false, cfg.seed);
  } else if (warm_start || !cold_start) {
    if (warm_start) {
      model = *warm_start;
    } else {
      TrainResult s1 = train_controller(data, red, LossWeights::stage1(), cfg, false);
      model = std::move(s1.model);
      history = s1.loss_history;
    }
    if (model.grid.size() != data.grid.size() || model.parameter_dim() != data.mu.rows()) {
      throw std::invalid_argument("training: warm-start model does not match the dataset");
    }
    const Eigen::MatrixXd y_lat = fixed_latents(model.state_reducer, batch.states);
    const Eigen::MatrixXd u_lat = fixed_latents(model.control_reducer, batch.controls);
    model.forward_model = make_forward_model(model, red, y_lat, u_lat, cfg.seed);
  } else {
    model = initialize_model(data, red, true, cfg.seed);
  }

  TrainResult out = run_stage(std::move(model), batch, weights, cfg);
  history.insert(history.end(), out.loss_history.begin(), out.loss_history.end());
  out.loss_history = std::move(history);
  out.model.loss_history = out.loss_history;
  return out;
}

Eigen::MatrixXd encode_states(const ControllerModel& m, const Eigen::Ref<const Eigen::MatrixXd>& y) {
  return m.state_reducer.encode(y);
}

Eigen::MatrixXd encode_controls(const ControllerModel& m, const Eigen::Ref<const Eigen::MatrixXd>& u) {
  return m.control_reducer.encode(u);
}

Eigen::MatrixXd policy_latent(const ControllerModel& m, const Eigen::Ref<const Eigen::MatrixXd>& yN,
                              const Eigen::Ref<const Eigen::MatrixXd>& mu) {
  Eigen::MatrixXd in(yN.rows() + mu.rows(), yN.cols());
  in << yN, mu;
  return m.policy.forward(in);
}

Eigen::MatrixXd forward_latent(const ControllerModel& m, const Eigen::Ref<const Eigen::MatrixXd>& yN,
                               const Eigen::Ref<const Eigen::MatrixXd>& uN,
                               const Eigen::Ref<const Eigen::MatrixXd>& mu) {
  if (!m.forward_model) throw std::invalid_argument("forward model absent");
  Eigen::MatrixXd in(yN.rows() + uN.rows() + mu.rows(), yN.cols());
  in << yN, uN, mu;
  return m.forward_model->forward(in);
}

EvaluationReport evaluate_model(const ControllerModel& m, const TrainingBatch& b) {
  EvaluationReport r;
  r.test_snapshots = b.size();
  if (b.size() == 0) throw std::invalid_argument("evaluate: empty snapshot set");
  const Eigen::MatrixXd yN = encode_states(m, b.states);
  const Eigen::MatrixXd uN = encode_controls(m, b.controls);
  r.state_reconstruction = relative_error(b.states, m.state_reducer.decode(yN));
  r.control_reconstruction = relative_error(b.controls, m.control_reducer.decode(uN));
  const Eigen::MatrixXd pi = policy_latent(m, yN, b.mu);
  r.policy_latent = relative_error(uN, pi);
  r.policy_decoded = relative_error(b.controls, m.control_reducer.decode(pi));
  if (m.forward_model) {
    const Eigen::MatrixXd yNn = encode_states(m, b.next_states);
    const Eigen::MatrixXd from_data = forward_latent(m, yN, uN, b.mu);
    const Eigen::MatrixXd from_policy = forward_latent(m, yN, pi, b.mu);
    r.forward_data_latent = relative_error(yNn, from_data);
    r.forward_policy_latent = relative_error(yNn, from_policy);
    r.forward_data_decoded = relative_error(b.next_states, m.state_reducer.decode(from_data));
    r.forward_policy_decoded = relative_error(b.next_states, m.state_reducer.decode(from_policy));
  } else {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    r.forward_data_latent = r.forward_policy_latent = r.forward_data_decoded = r.forward_policy_decoded = nan;
  }
  return r;
}

EvaluationReport evaluate_model(const ControllerModel& m, const SnapshotSet& data) {
  const std::vector<int> idx = data.test_indices();
  if (idx.empty()) throw std::invalid_argument("evaluate: test split is empty");
  return evaluate_model(m, make_batch(data, idx));
}

}  // namespace romfbk
