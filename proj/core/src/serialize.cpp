#include "romfbk/serialize.hpp"

#include "romfbk/error.hpp"

#include <string>

namespace romfbk {

using nlohmann::json;

namespace {

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw FormatError(std::string("artifact: bad metadata: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("artifact: inconsistent content: ") + e.what());
  }
}

void add_box(Artifact& a, const std::string& prefix, const ParameterBox& b) {
  a.add_vector(prefix + "/lo", b.lo);
  a.add_vector(prefix + "/hi", b.hi);
}

ParameterBox get_box(const Artifact& a, const std::string& prefix) { return {a.vector(prefix + "/lo"), a.vector(prefix + "/hi")}; }

void add_mlp(Artifact& a, json& meta, const std::string& prefix, const Mlp& m) {
  meta[prefix] = {{"dims", m.layer_dims()}, {"negative_slope", m.negative_slope()}};
  for (int l = 0; l < m.num_layers(); ++l) {
    a.add(prefix + "/W" + std::to_string(l), m.weight(l));
    a.add_vector(prefix + "/b" + std::to_string(l), m.bias(l));
  }
  a.add_vector(prefix + "/in_shift", m.input_shift());
  a.add_vector(prefix + "/in_scale", m.input_scale());
  a.add_vector(prefix + "/out_scale", m.output_scale());
  a.add_vector(prefix + "/out_shift", m.output_shift());
}

Mlp get_mlp(const Artifact& a, const json& meta, const std::string& prefix) {
  const json& j = meta.at(prefix);
  Mlp m(j.at("dims").get<std::vector<int>>(), j.at("negative_slope").get<double>());
  for (int l = 0; l < m.num_layers(); ++l) {
    const Eigen::MatrixXd w = a.matrix(prefix + "/W" + std::to_string(l));
    const Eigen::VectorXd b = a.vector(prefix + "/b" + std::to_string(l));
    if (w.rows() != m.weight(l).rows() || w.cols() != m.weight(l).cols() || b.size() != m.bias(l).size()) {
      throw FormatError("artifact: layer shape of '" + prefix + "' disagrees with its dims");
    }
    m.weight(l) = w;
    m.bias(l) = b;
  }
  m.set_input_affine(a.vector(prefix + "/in_shift"), a.vector(prefix + "/in_scale"));
  m.set_output_affine(a.vector(prefix + "/out_scale"), a.vector(prefix + "/out_shift"));
  return m;
}

void add_reducer(Artifact& a, json& meta, const std::string& prefix, const Reducer& r) {
  json j{{"kind", std::string(to_string(r.kind))},
         {"latent_dim", r.latent_dim},
         {"networks_ready", r.networks_ready},
         {"has_pod", r.pod.has_value()},
         {"has_mean", r.pod && r.pod->mean.has_value()}};
  if (r.pod) {
    a.add(prefix + "/modes", r.pod->modes);
    a.add_vector(prefix + "/singular_values", r.pod->singular_values);
    if (r.pod->mean) a.add_vector(prefix + "/mean", *r.pod->mean);
  }
  meta[prefix] = j;
  if (r.has_networks()) {
    add_mlp(a, meta, prefix + "/encoder", r.encoder);
    add_mlp(a, meta, prefix + "/decoder", r.decoder);
  }
}

Reducer get_reducer(const Artifact& a, const json& meta, const std::string& prefix) {
  const json& j = meta.at(prefix);
  Reducer r;
  r.kind = reducer_kind_from_string(j.at("kind").get<std::string>());
  r.latent_dim = j.at("latent_dim").get<int>();
  r.networks_ready = j.at("networks_ready").get<bool>();
  if (j.at("has_pod").get<bool>()) {
    PodBasis b;
    b.modes = a.matrix(prefix + "/modes");
    b.singular_values = a.vector(prefix + "/singular_values");
    if (j.at("has_mean").get<bool>()) b.mean = a.vector(prefix + "/mean");
    r.pod = std::move(b);
  }
  if (r.has_networks()) {
    r.encoder = get_mlp(a, meta, prefix + "/encoder");
    r.decoder = get_mlp(a, meta, prefix + "/decoder");
  }
  r.validate();
  return r;
}

}  // namespace

json to_json(const FomConfig& f) {
  return {{"nu", f.nu}, {"dt", f.dt}, {"T", f.T}, {"steps", f.steps}, {"substeps", f.substeps}, {"cg_tolerance", f.cg_tolerance}};
}

FomConfig fom_from_json(const json& j) {
  FomConfig f;
  f.nu = j.at("nu").get<double>();
  f.dt = j.at("dt").get<double>();
  f.T = j.at("T").get<double>();
  f.steps = j.at("steps").get<int>();
  f.substeps = j.at("substeps").get<int>();
  f.cg_tolerance = j.at("cg_tolerance").get<double>();
  f.validate();
  return f;
}

Artifact to_artifact(const SnapshotSet& d, const json& extra) {
  Artifact a;
  a.kind = ArtifactKind::dataset;
  a.meta = extra;
  a.meta["nx"] = d.grid.nx();
  a.meta["fom"] = to_json(d.fom);
  a.meta["steps"] = d.steps;
  a.meta["dropped"] = d.dropped;
  a.meta["warnings"] = d.warnings;
  a.meta["train_trajectories"] = d.train_trajectories;
  a.meta["test_trajectories"] = d.test_trajectories;
  a.add("states", d.states);
  a.add("controls", d.controls);
  a.add("mu", d.mu);
  a.add("terminal_states", d.terminal_states);
  a.add("initial_centers", d.initial_centers);
  a.add_vector("costs", d.costs);
  add_box(a, "parameter_box", d.parameter_box);
  return a;
}

SnapshotSet dataset_from_artifact(const Artifact& a) {
  if (a.kind != ArtifactKind::dataset) throw FormatError("artifact is not a dataset");
  return guarded([&] {
    SnapshotSet d;
    d.grid = Grid(a.meta.at("nx").get<int>());
    d.fom = fom_from_json(a.meta.at("fom"));
    d.steps = a.meta.at("steps").get<int>();
    d.dropped = a.meta.at("dropped").get<int>();
    d.warnings = a.meta.at("warnings").get<int>();
    d.train_trajectories = a.meta.at("train_trajectories").get<std::vector<int>>();
    d.test_trajectories = a.meta.at("test_trajectories").get<std::vector<int>>();
    d.states = a.matrix("states");
    d.controls = a.matrix("controls");
    d.mu = a.matrix("mu");
    d.terminal_states = a.matrix("terminal_states");
    d.initial_centers = a.matrix("initial_centers");
    d.costs = a.vector("costs");
    d.parameter_box = get_box(a, "parameter_box");
    const int k = static_cast<int>(d.states.cols());
    for (int i = 0; i < k; ++i) {
      d.trajectory.push_back(i / std::max(d.steps, 1));
      d.time.push_back(i % std::max(d.steps, 1));
    }
    d.validate();
    return d;
  });
}

Artifact to_artifact(const Reducer& r) {
  Artifact a;
  a.kind = ArtifactKind::pod_basis;
  add_reducer(a, a.meta, "reducer", r);
  return a;
}

Reducer reducer_from_artifact(const Artifact& a) {
  if (a.kind != ArtifactKind::pod_basis) throw FormatError("artifact is not a reducer");
  return guarded([&] { return get_reducer(a, a.meta, "reducer"); });
}

Artifact to_artifact(const ControllerModel& m, const json& extra) {
  Artifact a;
  a.kind = ArtifactKind::model;
  a.meta = extra;
  a.meta["nx"] = m.grid.nx();
  a.meta["fom"] = to_json(m.fom);
  a.meta["seed"] = m.seed;
  a.meta["has_forward_model"] = m.forward_model.has_value();
  add_box(a, "parameter_box", m.parameter_box);
  add_reducer(a, a.meta, "state_reducer", m.state_reducer);
  add_reducer(a, a.meta, "control_reducer", m.control_reducer);
  add_mlp(a, a.meta, "policy", m.policy);
  if (m.forward_model) add_mlp(a, a.meta, "forward_model", *m.forward_model);
  Eigen::VectorXd hist = Eigen::Map<const Eigen::VectorXd>(m.loss_history.data(), static_cast<Eigen::Index>(m.loss_history.size()));
  a.add_vector("loss_history", hist);
  return a;
}

ControllerModel model_from_artifact(const Artifact& a) {
  if (a.kind != ArtifactKind::model) throw FormatError("artifact is not a model");
  return guarded([&] {
    ControllerModel m;
    m.grid = Grid(a.meta.at("nx").get<int>());
    m.fom = fom_from_json(a.meta.at("fom"));
    m.seed = a.meta.at("seed").get<std::uint64_t>();
    m.parameter_box = get_box(a, "parameter_box");
    m.state_reducer = get_reducer(a, a.meta, "state_reducer");
    m.control_reducer = get_reducer(a, a.meta, "control_reducer");
    m.policy = get_mlp(a, a.meta, "policy");
    if (a.meta.at("has_forward_model").get<bool>()) m.forward_model = get_mlp(a, a.meta, "forward_model");
    const Eigen::VectorXd hist = a.vector("loss_history");
    m.loss_history.assign(hist.data(), hist.data() + hist.size());
    m.validate();
    return m;
  });
}

Artifact to_artifact(const LoopReport& r) {
  Artifact a;
  a.kind = ArtifactKind::report;
  a.meta["mode"] = std::string(to_string(r.mode));
  a.meta["steps"] = r.steps;
  a.meta["initial_center"] = {r.initial_center.x1, r.initial_center.x2};
  a.meta["completed"] = r.completed;
  a.meta["error"] = r.error;
  a.meta["timing"] = {{"inference_seconds", r.inference_seconds}, {"plant_seconds", r.plant_seconds}};
  a.add_vector("mu", r.mu);
  a.add("controls", r.controls);
  a.add("states", r.states);
  a.add("latent_states", r.latent_states);
  a.add_vector("distances", r.distances);
  a.add_vector("predicted_distances", r.predicted_distances);
  return a;
}

LoopReport report_from_artifact(const Artifact& a) {
  if (a.kind != ArtifactKind::report) throw FormatError("artifact is not a loop report");
  return guarded([&] {
    LoopReport r;
    const std::string mode = a.meta.at("mode").get<std::string>();
    if (mode != "latent" && mode != "full_order") throw FormatError("report: unknown mode '" + mode + "'");
    r.mode = mode == "latent" ? LoopMode::latent : LoopMode::full_order;
    r.steps = a.meta.at("steps").get<int>();
    const auto c = a.meta.at("initial_center").get<std::vector<double>>();
    if (c.size() != 2) throw FormatError("report: initial_center must have 2 entries");
    r.initial_center = {c[0], c[1]};
    r.completed = a.meta.at("completed").get<bool>();
    r.error = a.meta.at("error").get<std::string>();
    r.inference_seconds = a.meta.at("timing").at("inference_seconds").get<double>();
    r.plant_seconds = a.meta.at("timing").at("plant_seconds").get<double>();
    r.mu = a.vector("mu");
    r.controls = a.matrix("controls");
    r.states = a.matrix("states");
    r.latent_states = a.matrix("latent_states");
    r.distances = a.vector("distances");
    r.predicted_distances = a.vector("predicted_distances");
    return r;
  });
}

void save_dataset(const std::filesystem::path& p, const SnapshotSet& d, const json& extra) { write_artifact(p, to_artifact(d, extra)); }
SnapshotSet load_dataset(const std::filesystem::path& p) { return dataset_from_artifact(read_artifact(p, ArtifactKind::dataset)); }
void save_reducer(const std::filesystem::path& p, const Reducer& r) { write_artifact(p, to_artifact(r)); }
Reducer load_reducer(const std::filesystem::path& p) { return reducer_from_artifact(read_artifact(p, ArtifactKind::pod_basis)); }
void save_model(const std::filesystem::path& p, const ControllerModel& m, const json& extra) { write_artifact(p, to_artifact(m, extra)); }
ControllerModel load_model(const std::filesystem::path& p) { return model_from_artifact(read_artifact(p, ArtifactKind::model)); }
void save_report(const std::filesystem::path& p, const LoopReport& r) { write_artifact(p, to_artifact(r)); }
LoopReport load_report(const std::filesystem::path& p) { return report_from_artifact(read_artifact(p, ArtifactKind::report)); }

}  // namespace romfbk
