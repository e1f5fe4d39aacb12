#include "romfbk/config.hpp"

#include "romfbk/random.hpp"

#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

namespace romfbk {

using nlohmann::json;

namespace {

// Reads optional keys of one JSON object and rejects any key it never saw.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw std::invalid_argument("config: '" + name_ + "' must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions()) return;
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw std::invalid_argument("config: unknown key '" + name_ + "." + k + "'");
    }
  }
  Section(const Section&) = delete;
  Section& operator=(const Section&) = delete;

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw std::invalid_argument("config: '" + name_ + "." + key + "' has the wrong type");
    }
  }
  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null() ? &j_.at(key) : nullptr;
  }
  const std::string& name() const { return name_; }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

ParameterBox read_box(const json& j, const std::string& name) {
  Section s(j, name);
  std::vector<double> lo, hi;
  s.get("lo", lo);
  s.get("hi", hi);
  if (lo.size() != hi.size() || lo.empty()) throw std::invalid_argument("config: '" + name + "' needs lo/hi of equal length");
  ParameterBox b;
  b.lo = Eigen::Map<Eigen::VectorXd>(lo.data(), static_cast<Eigen::Index>(lo.size()));
  b.hi = Eigen::Map<Eigen::VectorXd>(hi.data(), static_cast<Eigen::Index>(hi.size()));
  return b;
}

json box_json(const ParameterBox& b) {
  return {{"lo", std::vector<double>(b.lo.data(), b.lo.data() + b.lo.size())},
          {"hi", std::vector<double>(b.hi.data(), b.hi.data() + b.hi.size())}};
}

void read_weights(const json& j, const std::string& name, LossWeights& w) {
  Section s(j, name);
  s.get("l1", w.l1);
  s.get("l2", w.l2);
  s.get("l3", w.l3);
  s.get("l4", w.l4);
  s.get("l5", w.l5);
  s.get("l6", w.l6);
}

json weights_json(const LossWeights& w) {
  return {{"l1", w.l1}, {"l2", w.l2}, {"l3", w.l3}, {"l4", w.l4}, {"l5", w.l5}, {"l6", w.l6}};
}

}  // namespace

std::uint64_t RunConfig::sampler_seed() const { return derive_seed(seed, "sampler"); }
std::uint64_t RunConfig::split_seed() const { return derive_seed(seed, "split"); }
std::uint64_t RunConfig::init_seed() const { return derive_seed(seed, "init"); }
std::uint64_t RunConfig::noise_seed() const { return derive_seed(seed, "noise"); }

GenerationConfig RunConfig::generation() const {
  GenerationConfig g;
  g.nx = nx;
  g.fom = fom;
  g.ocp = ocp;
  g.num_scenarios = num_scenarios;
  g.initial_box = initial_box;
  g.target_box = target_box;
  g.flow_box = flow_box;
  g.test_fraction = test_fraction;
  g.sampler_seed = sampler_seed();
  g.split_seed = split_seed();
  g.threads = threads;
  return g;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t = training;
  t.seed = init_seed();
  return t;
}

void RunConfig::validate() const {
  generation().validate();
  reduction.validate();
  training.validate();
  stage1.validate();
  stage2.validate();
  noise.validate();
  if (with_forward && fom.steps < 2) throw std::invalid_argument("config: a forward model needs at least 2 steps");
}

json RunConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["fom"] = {{"nx", nx},       {"nu", fom.nu},           {"dt", fom.dt},
              {"T", fom.T},     {"substeps", fom.substeps}, {"cg_tolerance", fom.cg_tolerance}};
  j["ocp"] = {{"beta", ocp.beta},         {"beta_g", ocp.beta_g},       {"boundary_weight", ocp.boundary_weight},
              {"opt_tol", ocp.opt_tol},   {"max_iters", ocp.max_iters}, {"lbfgs_memory", ocp.lbfgs_memory}};
  j["data"] = {{"num_scenarios", num_scenarios}, {"initial_box", box_json(initial_box)},
               {"target_box", box_json(target_box)}, {"flow_box", flow_box ? box_json(*flow_box) : json(nullptr)},
               {"test_fraction", test_fraction}, {"augment", augment}, {"threads", threads}};
  j["reduction"] = {{"state_kind", std::string(to_string(reduction.state_kind))},
                    {"control_kind", std::string(to_string(reduction.control_kind))},
                    {"state_modes", reduction.state_modes},
                    {"control_modes_per_component", reduction.control_modes_per_component},
                    {"state_latent", reduction.state_latent},
                    {"control_latent", reduction.control_latent},
                    {"state_encoder_hidden", reduction.state_encoder_hidden},
                    {"state_decoder_hidden", reduction.state_decoder_hidden},
                    {"control_encoder_hidden", reduction.control_encoder_hidden},
                    {"control_decoder_hidden", reduction.control_decoder_hidden},
                    {"policy_hidden", reduction.policy_hidden},
                    {"forward_hidden", reduction.forward_hidden},
                    {"center", reduction.center}};
  j["training"] = {{"optimizer", training.optimizer == OptimizerKind::adam ? "adam" : "lbfgs"},
                   {"max_epochs", training.max_epochs},
                   {"tolerance", training.tolerance},
                   {"lbfgs_memory", training.lbfgs_memory},
                   {"adam_step", training.adam_step},
                   {"sample_weighting", training.sample_weighting == SampleWeighting::inverse_control_norm
                                            ? "inverse_control_norm"
                                            : "uniform"},
                   {"with_forward", with_forward},
                   {"cold_start", cold_start},
                   {"stage1", weights_json(stage1)},
                   {"stage2", weights_json(stage2)}};
  j["noise"] = {{"sigma", noise.sigma}};
  return j;
}

RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  Section root(j, "config");
  root.get("seed", c.seed);
  if (const json* f = root.child("fom")) {
    Section s(*f, "fom");
    double nu = c.fom.nu, dt = c.fom.dt, T = c.fom.T;
    int substeps = c.fom.substeps;
    double cg = c.fom.cg_tolerance;
    s.get("nx", c.nx);
    s.get("nu", nu);
    s.get("dt", dt);
    s.get("T", T);
    s.get("substeps", substeps);
    s.get("cg_tolerance", cg);
    if (!(dt > 0.0)) throw std::invalid_argument("config: fom.dt must be positive");
    const double ratio = T / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
      throw std::invalid_argument("config: fom.T must be a whole number of steps dt");
    }
    c.fom = FomConfig::from_horizon(nu, dt, T, substeps);
    c.fom.cg_tolerance = cg;
  }
  if (const json* o = root.child("ocp")) {
    Section s(*o, "ocp");
    s.get("beta", c.ocp.beta);
    s.get("beta_g", c.ocp.beta_g);
    s.get("boundary_weight", c.ocp.boundary_weight);
    s.get("opt_tol", c.ocp.opt_tol);
    s.get("max_iters", c.ocp.max_iters);
    s.get("lbfgs_memory", c.ocp.lbfgs_memory);
  }
  if (const json* d = root.child("data")) {
    Section s(*d, "data");
    s.get("num_scenarios", c.num_scenarios);
    if (const json* b = s.child("initial_box")) c.initial_box = read_box(*b, "data.initial_box");
    if (const json* b = s.child("target_box")) c.target_box = read_box(*b, "data.target_box");
    if (const json* b = s.child("flow_box")) c.flow_box = read_box(*b, "data.flow_box");
    s.get("test_fraction", c.test_fraction);
    s.get("augment", c.augment);
    s.get("threads", c.threads);
  }
  if (const json* r = root.child("reduction")) {
    Section s(*r, "reduction");
    std::string sk(to_string(c.reduction.state_kind)), ck(to_string(c.reduction.control_kind));
    s.get("state_kind", sk);
    s.get("control_kind", ck);
    c.reduction.state_kind = reducer_kind_from_string(sk);
    c.reduction.control_kind = reducer_kind_from_string(ck);
    s.get("state_modes", c.reduction.state_modes);
    s.get("control_modes_per_component", c.reduction.control_modes_per_component);
    s.get("state_latent", c.reduction.state_latent);
    s.get("control_latent", c.reduction.control_latent);
    s.get("state_encoder_hidden", c.reduction.state_encoder_hidden);
    s.get("state_decoder_hidden", c.reduction.state_decoder_hidden);
    s.get("control_encoder_hidden", c.reduction.control_encoder_hidden);
    s.get("control_decoder_hidden", c.reduction.control_decoder_hidden);
    s.get("policy_hidden", c.reduction.policy_hidden);
    s.get("forward_hidden", c.reduction.forward_hidden);
    s.get("center", c.reduction.center);
  }
  if (const json* t = root.child("training")) {
    Section s(*t, "training");
    std::string opt = c.training.optimizer == OptimizerKind::adam ? "adam" : "lbfgs";
    s.get("optimizer", opt);
    if (opt == "lbfgs") {
      c.training.optimizer = OptimizerKind::lbfgs;
    } else if (opt == "adam") {
      c.training.optimizer = OptimizerKind::adam;
    } else {
      throw std::invalid_argument("config: training.optimizer must be 'lbfgs' or 'adam'");
    }
    s.get("max_epochs", c.training.max_epochs);
    s.get("tolerance", c.training.tolerance);
    s.get("lbfgs_memory", c.training.lbfgs_memory);
    s.get("adam_step", c.training.adam_step);
    std::string sw =
        c.training.sample_weighting == SampleWeighting::inverse_control_norm ? "inverse_control_norm" : "uniform";
    s.get("sample_weighting", sw);
    if (sw == "uniform") {
      c.training.sample_weighting = SampleWeighting::uniform;
    } else if (sw == "inverse_control_norm") {
      c.training.sample_weighting = SampleWeighting::inverse_control_norm;
    } else {
      throw std::invalid_argument("config: training.sample_weighting must be 'uniform' or 'inverse_control_norm'");
    }
    s.get("with_forward", c.with_forward);
    s.get("cold_start", c.cold_start);
    if (const json* w = s.child("stage1")) read_weights(*w, "training.stage1", c.stage1);
    if (const json* w = s.child("stage2")) read_weights(*w, "training.stage2", c.stage2);
  }
  if (const json* n = root.child("noise")) {
    Section s(*n, "noise");
    s.get("sigma", c.noise.sigma);
  }
  c.noise.seed = c.noise_seed();
  c.training.seed = c.init_seed();
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("config: cannot open '" + path.string() + "'");
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
  }
  return from_json(j);
}

}  // namespace romfbk
