#include "romfbk/dataset.hpp"

#include "romfbk/random.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

namespace romfbk {

void GenerationConfig::validate() const {
  Grid grid(nx);
  (void)grid;
  fom.validate();
  ocp.validate();
  if (num_scenarios < 2) throw std::invalid_argument("generation: need at least 2 scenarios");
  if (initial_box.dim() != 2 || target_box.dim() != 2) {
    throw std::invalid_argument("generation: initial and target boxes must be 2-dimensional");
  }
  if (flow_box && flow_box->dim() != 2) throw std::invalid_argument("generation: flow box must be 2-dimensional");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw std::invalid_argument("generation: test_fraction must lie in (0, 1)");
  }
  for (const ParameterBox* b : {&initial_box, &target_box}) {
    if ((b->lo.array() <= -1.0).any() || (b->hi.array() >= 1.0).any() || (b->lo.array() > b->hi.array()).any()) {
      throw std::invalid_argument("generation: boxes must be ordered and lie inside (-1,1)^2");
    }
  }
}

ParameterBox GenerationConfig::parameter_box() const {
  if (!flow_box) return target_box;
  ParameterBox box;
  box.lo.resize(4);
  box.hi.resize(4);
  box.lo << target_box.lo, flow_box->lo;
  box.hi << target_box.hi, flow_box->hi;
  return box;
}

ParameterBox mirror_closure(const ParameterBox& box) {
  ParameterBox out = box;
  out.lo(1) = std::min(box.lo(1), -box.hi(1));
  out.hi(1) = std::max(box.hi(1), -box.lo(1));
  if (box.dim() == 4) {
    out.lo(3) = std::min(box.lo(3), std::numbers::pi - box.hi(3));
    out.hi(3) = std::max(box.hi(3), std::numbers::pi - box.lo(3));
  }
  return out;
}

std::vector<int> SnapshotSet::snapshot_indices(const std::vector<int>& trajectories) const {
  std::vector<int> out;
  out.reserve(trajectories.size() * static_cast<std::size_t>(steps));
  for (const int t : trajectories) {
    for (int j = 0; j < steps; ++j) out.push_back(snapshot_index(t, j));
  }
  return out;
}

Eigen::VectorXd SnapshotSet::next_state(int k) const {
  const int t = trajectory[static_cast<std::size_t>(k)];
  const int j = time[static_cast<std::size_t>(k)];
  return j + 1 < steps ? Eigen::VectorXd(states.col(k + 1)) : Eigen::VectorXd(terminal_states.col(t));
}

void SnapshotSet::validate() const {
  const int ns = num_trajectories();
  const int k = size();
  if (steps < 1) throw std::invalid_argument("dataset: steps must be >= 1");
  if (k != ns * steps) throw std::invalid_argument("dataset: snapshot count must equal Nt * Ns");
  if (states.rows() != grid.size() || controls.rows() != 2 * grid.size() || terminal_states.rows() != grid.size()) {
    throw std::invalid_argument("dataset: field lengths do not match grid");
  }
  if (controls.cols() != k || mu.cols() != k || static_cast<int>(trajectory.size()) != k ||
      static_cast<int>(time.size()) != k) {
    throw std::invalid_argument("dataset: inconsistent snapshot counts");
  }
  if (initial_centers.cols() != ns || costs.size() != ns) throw std::invalid_argument("dataset: per-trajectory data");
  for (int i = 0; i < k; ++i) {
    if (trajectory[static_cast<std::size_t>(i)] != i / steps || time[static_cast<std::size_t>(i)] != i % steps) {
      throw std::invalid_argument("dataset: snapshots are not in trajectory-major order");
    }
  }
  std::vector<int> seen(static_cast<std::size_t>(ns), 0);
  for (const int t : train_trajectories) {
    if (t < 0 || t >= ns) throw std::invalid_argument("dataset: split index out of range");
    ++seen[static_cast<std::size_t>(t)];
  }
  for (const int t : test_trajectories) {
    if (t < 0 || t >= ns) throw std::invalid_argument("dataset: split index out of range");
    ++seen[static_cast<std::size_t>(t)];
  }
  if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; })) {
    throw std::invalid_argument("dataset: every trajectory must be in exactly one of train/test");
  }
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ROMFBK_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct Draw {
  Point initial;
  Scenario scenario;
};

struct Outcome {
  std::optional<OcpSolution> solution;
  std::string error;
};

}  // namespace

SnapshotSet generate_dataset(const GenerationConfig& config) {
  config.validate();
  const Grid grid(config.nx);
  const int nt = config.fom.steps;

  std::mt19937_64 rng(config.sampler_seed);
  std::vector<Draw> draws(static_cast<std::size_t>(config.num_scenarios));
  for (Draw& d : draws) {
    d.initial = {uniform(rng, config.initial_box.lo(0), config.initial_box.hi(0)),
                 uniform(rng, config.initial_box.lo(1), config.initial_box.hi(1))};
    d.scenario.target = {uniform(rng, config.target_box.lo(0), config.target_box.hi(0)),
                         uniform(rng, config.target_box.lo(1), config.target_box.hi(1))};
    if (config.flow_box) {
      d.scenario.flow = FlowParams{uniform(rng, config.flow_box->lo(0), config.flow_box->hi(0)),
                                   uniform(rng, config.flow_box->lo(1), config.flow_box->hi(1))};
    }
  }

  std::vector<Outcome> outcomes(draws.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < draws.size(); i = next++) {
      try {
        const StateField y0 = gaussian_density(grid, draws[i].initial);
        const StateField yd = gaussian_density(grid, draws[i].scenario.target);
        outcomes[i].solution = solve_ocp(y0, draws[i].scenario, config.fom, config.ocp, yd);
      } catch (const std::exception& e) {
        outcomes[i].error = e.what();
      }
    }
  };
  const int nthreads = std::min<int>(resolve_threads(config.threads), config.num_scenarios);
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  }

  SnapshotSet data;
  data.grid = grid;
  data.fom = config.fom;
  data.steps = nt;
  data.parameter_box = config.parameter_box();
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].solution) {
      kept.push_back(i);
      if (outcomes[i].solution->warning) ++data.warnings;
    } else {
      ++data.dropped;
      spdlog::warn("generate_dataset: draw {} dropped: {}", i, outcomes[i].error);
    }
  }
  const int ns = static_cast<int>(kept.size());
  if (ns < 2) throw std::runtime_error("generate_dataset: fewer than 2 trajectories survived");

  const int n = grid.size();
  const int p = config.flow_box ? 4 : 2;
  data.states.resize(n, ns * nt);
  data.controls.resize(2 * n, ns * nt);
  data.mu.resize(p, ns * nt);
  data.terminal_states.resize(n, ns);
  data.initial_centers.resize(2, ns);
  data.costs.resize(ns);
  for (int t = 0; t < ns; ++t) {
    const std::size_t draw = kept[static_cast<std::size_t>(t)];
    const Trajectory& traj = outcomes[draw].solution->trajectory;
    const Eigen::VectorXd mu = draws[draw].scenario.mu();
    for (int j = 0; j < nt; ++j) {
      const int k = t * nt + j;
      data.states.col(k) = traj.states[static_cast<std::size_t>(j)].values;
      data.controls.col(k) = traj.controls[static_cast<std::size_t>(j)].stacked();
      data.mu.col(k) = mu;
      data.trajectory.push_back(t);
      data.time.push_back(j);
    }
    data.terminal_states.col(t) = traj.states.back().values;
    data.initial_centers.col(t) = Eigen::Vector2d(draws[draw].initial.x1, draws[draw].initial.x2);
    data.costs(t) = traj.cost;
  }

  // Split by trajectory (Fisher-Yates on the split stream).
  std::vector<int> order(static_cast<std::size_t>(ns));
  for (int t = 0; t < ns; ++t) order[static_cast<std::size_t>(t)] = t;
  std::mt19937_64 split_rng(config.split_seed);
  for (int i = ns - 1; i > 0; --i) {
    const auto j = static_cast<int>(split_rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
  }
  int n_test = static_cast<int>(std::lround(config.test_fraction * ns));
  n_test = std::clamp(n_test, 1, ns - 1);
  data.test_trajectories.assign(order.begin(), order.begin() + n_test);
  data.train_trajectories.assign(order.begin() + n_test, order.end());
  std::sort(data.test_trajectories.begin(), data.test_trajectories.end());
  std::sort(data.train_trajectories.begin(), data.train_trajectories.end());
  data.validate();
  return data;
}

SnapshotSet symmetry_augment(const SnapshotSet& data) {
  data.validate();
  const Grid& grid = data.grid;
  const int n = grid.size();
  const int ns = data.num_trajectories();
  const int k = data.size();

  SnapshotSet out = data;
  out.states.conservativeResize(Eigen::NoChange, 2 * k);
  out.controls.conservativeResize(Eigen::NoChange, 2 * k);
  out.mu.conservativeResize(Eigen::NoChange, 2 * k);
  out.terminal_states.conservativeResize(Eigen::NoChange, 2 * ns);
  out.initial_centers.conservativeResize(Eigen::NoChange, 2 * ns);
  out.costs.conservativeResize(2 * ns);
  for (int i = 0; i < k; ++i) {
    out.states.col(k + i) = mirror_values(grid, data.states.col(i));
    out.controls.col(k + i).head(n) = mirror_values(grid, data.controls.col(i).head(n));
    out.controls.col(k + i).tail(n) = -mirror_values(grid, data.controls.col(i).tail(n));
    const Scenario s = mirror(Scenario::from_mu(data.mu.col(i)));
    out.mu.col(k + i) = s.mu();
    out.trajectory.push_back(data.trajectory[static_cast<std::size_t>(i)] + ns);
    out.time.push_back(data.time[static_cast<std::size_t>(i)]);
  }
  for (int t = 0; t < ns; ++t) {
    out.terminal_states.col(ns + t) = mirror_values(grid, data.terminal_states.col(t));
    out.initial_centers.col(ns + t) = Eigen::Vector2d(data.initial_centers(0, t), -data.initial_centers(1, t));
    out.costs(ns + t) = data.costs(t);
  }
  for (const int t : data.train_trajectories) out.train_trajectories.push_back(t + ns);
  for (const int t : data.test_trajectories) out.test_trajectories.push_back(t + ns);
  out.parameter_box = mirror_closure(data.parameter_box);
  out.validate();
  return out;
}

}  // namespace romfbk
