#include "romfbk/controller.hpp"

#include "romfbk/random.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace romfbk {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void check_model_inputs(const ControllerModel& m, const Eigen::Ref<const Eigen::VectorXd>& mu) {
  if (mu.size() != m.parameter_dim()) {
    throw std::invalid_argument("controller: scenario has " + std::to_string(mu.size()) + " parameters, model expects " +
                                std::to_string(m.parameter_dim()));
  }
  if (!m.parameter_box.contains(mu)) spdlog::warn("controller: scenario lies outside the training parameter box");
}

// Latent control and decoded control for latent state yN.
std::pair<Eigen::VectorXd, ControlField> act_latent(const ControllerModel& m, const Eigen::VectorXd& yN,
                                                    const Eigen::Ref<const Eigen::VectorXd>& mu) {
  Eigen::VectorXd uN = policy_latent(m, yN, mu);
  const Eigen::VectorXd u = m.control_reducer.decode(uN);
  return {std::move(uN), ControlField::from_stacked(m.grid, u)};
}

}  // namespace

void NoiseSpec::validate() const {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("noise: sigma must be finite and >= 0");
}

std::string_view to_string(LoopMode mode) { return mode == LoopMode::latent ? "latent" : "full_order"; }

ControlField policy_act(const ControllerModel& m, const StateField& y, const Eigen::Ref<const Eigen::VectorXd>& mu) {
  if (!(y.grid == m.grid)) throw std::invalid_argument("policy_act: state grid does not match the model");
  check_model_inputs(m, mu);
  const Eigen::VectorXd yN = encode_states(m, y.values);
  return act_latent(m, yN, mu).second;
}

StateField add_noise(const StateField& y, const NoiseSpec& spec) {
  spec.validate();
  if (spec.sigma == 0.0) return y;
  std::mt19937_64 rng(spec.seed);
  Eigen::VectorXd v = y.values;
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) += spec.sigma * standard_normal(rng);
  return StateField(y.grid, std::move(v));
}

double tracking_distance(const StateField& y, const StateField& target) {
  return l2_norm(y.grid, y.values - target.values);
}

LoopReport run_full_order_loop(const ControllerModel& m, Point y0_center, const Eigen::Ref<const Eigen::VectorXd>& mu,
                               const FomConfig& fom, const NoiseSpec& noise) {
  fom.validate();
  noise.validate();
  check_model_inputs(m, mu);
  const Grid& g = m.grid;
  const Scenario scenario = Scenario::from_mu(mu);
  const StateField target = gaussian_density(g, scenario.target);
  const ControlField v = background_flow(g, scenario);

  LoopReport r;
  r.mode = LoopMode::full_order;
  r.steps = fom.steps;
  r.mu = mu;
  r.initial_center = y0_center;
  r.controls = Eigen::MatrixXd::Zero(2 * g.size(), fom.steps);
  r.states = Eigen::MatrixXd::Zero(g.size(), fom.steps + 1);
  r.distances = Eigen::VectorXd::Zero(fom.steps + 1);

  StateField y = gaussian_density(g, y0_center);
  r.states.col(0) = y.values;
  r.distances(0) = tracking_distance(y, target);
  for (int j = 0; j < fom.steps; ++j) {
    const StateField obs = add_noise(y, {noise.sigma, derive_seed(noise.seed, "step" + std::to_string(j))});
    auto t0 = Clock::now();
    const Eigen::VectorXd yN = encode_states(m, obs.values);
    const ControlField u = act_latent(m, yN, mu).second;
    r.inference_seconds += seconds_since(t0);
    r.controls.col(j) = u.stacked();
    t0 = Clock::now();
    try {
      y = step(y, u, v, fom);
    } catch (const std::exception& e) {
      r.plant_seconds += seconds_since(t0);
      r.completed = false;
      r.error = e.what();
      r.steps = j;
      spdlog::error("full-order loop: plant step {} failed: {}", j, e.what());
      return r;
    }
    r.plant_seconds += seconds_since(t0);
    r.states.col(j + 1) = y.values;
    r.distances(j + 1) = tracking_distance(y, target);
  }
  return r;
}

LoopReport run_latent_loop(const ControllerModel& m, Point y0_center, const Eigen::Ref<const Eigen::VectorXd>& mu,
                           const std::optional<FomConfig>& shadow, const NoiseSpec& noise) {
  if (!m.forward_model) throw std::invalid_argument("forward model absent");
  noise.validate();
  check_model_inputs(m, mu);
  const FomConfig fom = shadow.value_or(m.fom);
  if (shadow) shadow->validate();
  const Grid& g = m.grid;
  const Scenario scenario = Scenario::from_mu(mu);
  const StateField target = gaussian_density(g, scenario.target);
  const ControlField v = background_flow(g, scenario);

  LoopReport r;
  r.mode = LoopMode::latent;
  r.steps = fom.steps;
  r.mu = mu;
  r.initial_center = y0_center;
  r.controls = Eigen::MatrixXd::Zero(2 * g.size(), fom.steps);
  r.latent_states = Eigen::MatrixXd::Zero(m.state_latent(), fom.steps + 1);
  r.distances = Eigen::VectorXd::Zero(fom.steps + 1);
  r.predicted_distances = Eigen::VectorXd::Zero(fom.steps + 1);
  if (shadow) r.states = Eigen::MatrixXd::Zero(g.size(), fom.steps + 1);

  StateField y = gaussian_density(g, y0_center);
  const StateField obs = add_noise(y, {noise.sigma, derive_seed(noise.seed, "step0")});
  auto t0 = Clock::now();
  Eigen::VectorXd yN = encode_states(m, obs.values);
  r.inference_seconds += seconds_since(t0);
  auto predicted = [&](const Eigen::VectorXd& z) {
    return l2_norm(g, m.state_reducer.decode(z) - target.values);
  };
  r.latent_states.col(0) = yN;
  r.predicted_distances(0) = predicted(yN);
  if (shadow) r.states.col(0) = y.values;
  r.distances(0) = tracking_distance(y, target);

  for (int j = 0; j < fom.steps; ++j) {
    t0 = Clock::now();
    auto [uN, u] = act_latent(m, yN, mu);
    yN = forward_latent(m, yN, uN, mu);
    r.inference_seconds += seconds_since(t0);
    r.controls.col(j) = u.stacked();
    r.latent_states.col(j + 1) = yN;
    r.predicted_distances(j + 1) = predicted(yN);
    if (shadow) {
      t0 = Clock::now();
      try {
        y = step(y, u, v, fom);
      } catch (const std::exception& e) {
        r.plant_seconds += seconds_since(t0);
        r.completed = false;
        r.error = e.what();
        r.steps = j;
        spdlog::error("latent loop: shadow plant step {} failed: {}", j, e.what());
        return r;
      }
      r.plant_seconds += seconds_since(t0);
      r.states.col(j + 1) = y.values;
      r.distances(j + 1) = tracking_distance(y, target);
    } else {
      r.distances(j + 1) = r.predicted_distances(j + 1);
    }
  }
  return r;
}

Eigen::VectorXd uncontrolled_distances(const Grid& grid, Point y0_center, const Eigen::Ref<const Eigen::VectorXd>& mu,
                                       const FomConfig& fom) {
  const Scenario scenario = Scenario::from_mu(mu);
  const StateField target = gaussian_density(grid, scenario.target);
  const Trajectory t = simulate(gaussian_density(grid, y0_center),
                                std::vector<ControlField>(static_cast<std::size_t>(fom.steps), ControlField::zeros(grid)),
                                scenario, fom);
  Eigen::VectorXd d(fom.steps + 1);
  for (int j = 0; j <= fom.steps; ++j) d(j) = tracking_distance(t.states[static_cast<std::size_t>(j)], target);
  return d;
}

double arrival_probability(const StateField& y, Point center, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("arrival_probability: radius must be > 0");
  const Grid& g = y.grid;
  const double h2 = g.h() * g.h();
  double inside = 0.0;
  for (int k = 0; k < g.size(); ++k) {
    const Point c = g.center(k);
    const double dx = c.x1 - center.x1;
    const double dy = c.x2 - center.x2;
    if (dx * dx + dy * dy <= radius * radius) inside += y.values(k) * h2;
  }
  const double mass = std::max(0.0, total_mass(y));
  return std::clamp(inside, 0.0, mass);
}

BenchmarkTable benchmark(const ControllerModel& m, const std::vector<BenchmarkCase>& cases, const FomConfig& fom,
                         const OcpConfig& ocp) {
  if (cases.size() < 3) throw std::invalid_argument("benchmark: need at least 3 scenarios");
  BenchmarkTable t;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const BenchmarkCase& c : cases) {
    auto t0 = Clock::now();
    run_full_order_loop(m, c.y0_center, c.mu, fom);
    t.full_order_seconds.push_back(seconds_since(t0));

    if (m.forward_model) {
      t0 = Clock::now();
      run_latent_loop(m, c.y0_center, c.mu, std::nullopt);
      t.latent_seconds.push_back(seconds_since(t0));
    } else {
      t.latent_seconds.push_back(nan);
    }

    const Scenario s = Scenario::from_mu(c.mu);
    t0 = Clock::now();
    solve_ocp(gaussian_density(m.grid, c.y0_center), s, fom, ocp, gaussian_density(m.grid, s.target));
    t.ocp_seconds.push_back(seconds_since(t0));
  }
  auto mean = [](const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); };
  t.mean_full_order = mean(t.full_order_seconds);
  t.mean_latent = mean(t.latent_seconds);
  t.mean_ocp = mean(t.ocp_seconds);
  t.speedup_full_vs_ocp = t.mean_ocp / t.mean_full_order;
  t.speedup_latent_vs_full = t.mean_full_order / t.mean_latent;
  return t;
}

}  // namespace romfbk
