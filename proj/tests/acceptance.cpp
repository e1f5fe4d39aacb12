// Acceptance run: prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.

#include "romfbk/artifact.hpp"
#include "romfbk/config.hpp"
#include "romfbk/controller.hpp"
#include "romfbk/mlp.hpp"
#include "romfbk/ocp.hpp"
#include "romfbk/pod.hpp"
#include "romfbk/random.hpp"
#include "romfbk/serialize.hpp"
#include "romfbk/training.hpp"
#include "romfbk_cli/cli.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace fs = std::filesystem;
using namespace romfbk;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::map<int, std::pair<bool, std::string>> results;

void report(int id, bool ok, const std::string& detail) {
  results[id] = {ok, detail};
  std::fprintf(stderr, "criterion %d done\n", id);
}

int print_results() {
  int failures = 0;
  for (int id = 1; id <= 9; ++id) {
    const auto it = results.find(id);
    const bool ok = it != results.end() && it->second.first;
    failures += !ok;
    std::printf("[%s] criterion %d: %s\n", ok ? "PASS" : "FAIL", id,
                it == results.end() ? "not run" : it->second.second.c_str());
  }
  std::printf("%d of 9 criteria failed\n", failures);
  return failures;
}

std::string format(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Largest relative mass drift seen over all plant steps in this run.
double worst_mass_drift = 0.0;
long mass_checks = 0;

void check_mass(const Eigen::MatrixXd& states) {
  const double m0 = states.col(0).sum();
  for (Eigen::Index j = 1; j < states.cols(); ++j) {
    worst_mass_drift = std::max(worst_mass_drift, std::abs(states.col(j).sum() - m0) / std::abs(m0));
    ++mass_checks;
  }
}

Eigen::VectorXd normal_vector(Eigen::Index n, std::mt19937_64& rng, double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = scale * standard_normal(rng);
  return v;
}

void criterion_adjoint() {
  const auto t0 = Clock::now();
  const Grid g(16);
  FomConfig fom = FomConfig::from_horizon(0.001, 0.25, 0.75);
  fom.cg_tolerance = 1e-14;
  const OcpConfig ocp;
  std::mt19937_64 rng(derive_seed(2024, "adjoint"));
  double worst = 0.0;
  for (int c = 0; c < 10; ++c) {
    const Point y0c{uniform(rng, -0.5, 0.0), uniform(rng, -0.5, 0.5)};
    const Scenario sc{{uniform(rng, 0.0, 0.5), uniform(rng, -0.5, 0.5)},
                      c % 2 ? std::optional(FlowParams{uniform(rng, 0.1, 1.0), uniform(rng, -1.0, 1.0)})
                            : std::nullopt};
    const StateField y0 = gaussian_density(g, y0c);
    const StateField yd = gaussian_density(g, sc.target);
    const Eigen::VectorXd x = normal_vector(2 * g.size() * fom.steps, rng, 0.3);
    const Eigen::VectorXd d = normal_vector(x.size(), rng);
    const CostGradient cg = cost_and_gradient(unflatten_controls(g, x, fom.steps), y0, sc, fom, ocp, yd);
    auto j_at = [&](const Eigen::VectorXd& v) {
      const Trajectory t = simulate(y0, unflatten_controls(g, v, fom.steps), sc, fom);
      Eigen::MatrixXd s(g.size(), fom.steps + 1);
      for (int k = 0; k <= fom.steps; ++k) s.col(k) = t.states[k].values;
      check_mass(s);
      return cost(t, fom, ocp, yd);
    };
    const double eps = 1e-6;
    const double fd = (j_at(x + eps * d) - j_at(x - eps * d)) / (2 * eps);
    const double ad = flatten_controls(cg.gradient).dot(d);
    worst = std::max(worst, std::abs(ad - fd) / std::abs(fd));
  }
  const double secs = since(t0);
  report(1, worst < 1e-6 && secs < 30.0,
         format("adjoint vs central FD, nx=16 Nt=3, 10 configs: max rel err %.2e (< 1e-6), %.2f s (< 30 s)", worst, secs));
}

void criterion_pod(const SnapshotSet& data) {
  const TrainingBatch b = make_batch(data, data.train_indices());
  const Eigen::MatrixXd& s = b.states;
  double worst = 0.0;
  bool monotone = true;
  double prev = 1e300;
  std::string errs;
  for (int n : {5, 10, 20, 40}) {
    PodOptions o;
    o.n_modes = n;
    const PodBasis basis = compute_pod(s, o);
    const Eigen::MatrixXd rec = pod_decode(basis, pod_encode(basis, s));
    const double mse = (s - rec).colwise().squaredNorm().sum() / s.cols();
    const Eigen::VectorXd& sv = basis.singular_values;
    const double tail = sv.tail(sv.size() - n).squaredNorm() / s.cols();
    worst = std::max(worst, std::abs(mse - tail) / std::max(1.0, tail));
    const double e = relative_error(s, rec);
    monotone = monotone && e <= prev;
    prev = e;
    errs += format(" n=%d:%.4f", n, e);
  }
  report(3, worst < 1e-9 && monotone,
         format("Eckart-Young max deviation %.2e (< 1e-9); eps_rel non-increasing:%s", worst, errs.c_str()));
}

void criterion_nn_gradients() {
  const auto t0 = Clock::now();
  // Desk-scale shapes: state AE (POD 60 -> 10), control AE (POD 80 -> 18),
  // policy [y_N; mu] -> u_N, forward model [y_N; u_N; mu] -> y_N.
  const std::vector<std::pair<std::string, std::vector<int>>> roles{
      {"state encoder", {60, 100, 10}},      {"state decoder", {10, 100, 100, 60}},
      {"control encoder", {80, 100, 18}},    {"control decoder", {18, 200, 200, 80}},
      {"policy", {12, 50, 50, 50, 18}},      {"forward model", {30, 50, 50, 50, 10}}};
  double worst = 0.0;
  std::uint64_t seed = 77;
  for (const auto& [name, dims] : roles) {
    Mlp net = init_he(dims, seed);
    std::mt19937_64 rng(seed++);
    for (int point = 0; point < 5; ++point) {
      const Eigen::MatrixXd x = normal_vector(dims.front(), rng);
      const Eigen::MatrixXd w = normal_vector(dims.back(), rng);
      MlpTape tape;
      net.forward(x, tape);
      Eigen::VectorXd pg = Eigen::VectorXd::Zero(net.parameter_count());
      const Eigen::MatrixXd xg = net.backward(tape, w, pg);
      const Eigen::VectorXd p0 = net.parameters();
      const Eigen::VectorXd d = normal_vector(p0.size(), rng);
      const double eps = 1e-6;
      auto f = [&](const Eigen::VectorXd& p) {
        net.set_parameters(p);
        return (net.forward(x).array() * w.array()).sum();
      };
      const double fd = (f(p0 + eps * d) - f(p0 - eps * d)) / (2 * eps);
      net.set_parameters(p0);
      worst = std::max(worst, std::abs(pg.dot(d) - fd) / std::max(std::abs(fd), 1e-12));
      const Eigen::MatrixXd dx = normal_vector(dims.front(), rng);
      const double fdx =
          ((net.forward(x + eps * dx).array() - net.forward(x - eps * dx).array()) * w.array()).sum() / (2 * eps);
      worst = std::max(worst, std::abs((xg.array() * dx.array()).sum() - fdx) / std::max(std::abs(fdx), 1e-12));
    }
  }
  const double secs = since(t0);
  report(4, worst < 1e-6 && secs < 10.0,
         format("network FD checks, 6 shapes x 5 points: max rel err %.2e (< 1e-6), %.2f s (< 10 s)", worst, secs));
}

struct HeldOut {
  Point y0;
  Eigen::VectorXd mu;
};

std::vector<HeldOut> held_out(const RunConfig& cfg, int n, std::string_view stream) {
  std::mt19937_64 rng(derive_seed(cfg.seed, stream));
  std::vector<HeldOut> out;
  for (int i = 0; i < n; ++i) {
    HeldOut h;
    h.y0 = {uniform(rng, cfg.initial_box.lo(0), cfg.initial_box.hi(0)),
            uniform(rng, cfg.initial_box.lo(1), cfg.initial_box.hi(1))};
    h.mu.resize(2);
    h.mu << uniform(rng, cfg.target_box.lo(0), cfg.target_box.hi(0)),
        uniform(rng, cfg.target_box.lo(1), cfg.target_box.hi(1));
    out.push_back(h);
  }
  return out;
}

void criteria_loops(const ControllerModel& m, const RunConfig& cfg) {
  const std::vector<HeldOut> cases = held_out(cfg, 10, "acceptance_loops");
  int full_ok = 0, latent_ok = 0;
  double full_secs = 0.0, latent_secs = 0.0;
  std::string rows;
  for (const HeldOut& c : cases) {
    const double unc = uncontrolled_distances(m.grid, c.y0, c.mu, m.fom)(m.fom.steps);
    auto t0 = Clock::now();
    const LoopReport f = run_full_order_loop(m, c.y0, c.mu, m.fom);
    full_secs += since(t0);
    t0 = Clock::now();
    const LoopReport l = run_latent_loop(m, c.y0, c.mu, std::nullopt);
    latent_secs += since(t0);
    // Plant-side evaluation of the latent loop's open-loop controls.
    const LoopReport ls = run_latent_loop(m, c.y0, c.mu, m.fom);
    check_mass(f.states);
    check_mass(ls.states);
    const double df = f.distances(m.fom.steps);
    const double dl = ls.distances(m.fom.steps);
    full_ok += df <= 0.5 * unc;
    latent_ok += dl <= 1.5 * df;
    rows += format(" (%.2f/%.2f/%.2f)", unc, df, dl);
    (void)l;
  }
  report(6, full_ok >= 9,
         format("full-order final distance <= 0.5 x uncontrolled in %d/10 (need 9); (uncontrolled/full/latent):%s",
             full_ok, rows.c_str()));
  report(7, latent_ok >= 8 && latent_secs < full_secs,
         format("latent <= 1.5 x full-order in %d/10 (need 8); latent %.4f s vs full-order %.4f s wall-clock (%.1fx)",
             latent_ok, latent_secs, full_secs, full_secs / latent_secs));
}

void criterion_noise(const ControllerModel& m, const RunConfig& cfg) {
  const std::vector<HeldOut> cases = held_out(cfg, 20, "acceptance_noise");
  auto median_arrival = [&](double sigma) {
    std::vector<double> p;
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const LoopReport r = run_full_order_loop(m, cases[i].y0, cases[i].mu, m.fom,
                                               {sigma, derive_seed(cfg.seed, "noise" + std::to_string(i))});
      check_mass(r.states);
      p.push_back(arrival_probability(StateField(m.grid, r.states.col(m.fom.steps)),
                                      {cases[i].mu(0), cases[i].mu(1)}));
    }
    std::sort(p.begin(), p.end());
    return 0.5 * (p[9] + p[10]);
  };
  const double base = median_arrival(0.0);
  bool ok = true;
  std::string rows = format("sigma=0: %.3f", base);
  for (double s : {0.03, 0.15, 0.3}) {
    const double med = median_arrival(s);
    ok = ok && med >= 0.7 * base;
    rows += format(", sigma=%.2f: %.3f", s, med);
  }
  const Point c{0.25, 0.1};
  const double self = arrival_probability(gaussian_density(m.grid, c), c, 0.5);
  ok = ok && self >= 0.85 && self <= 0.95;
  report(8, ok,
         format("median arrival probability %s (each >= 0.7 x sigma=0); target self-check %.3f in [0.85, 0.95]",
             rows.c_str(), self));
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int run_stage(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = romfbk::cli::run_cli(args, out, err);
  if (code != 0) std::fprintf(stderr, "romfbk %s failed: %s\n", args[0].c_str(), err.str().c_str());
  return code;
}

// Artifact bytes with wall-clock metadata removed.
std::string without_timing(const fs::path& p) {
  Artifact a = read_artifact(p);
  a.meta.erase("timing");
  return encode_artifact(a);
}

void criterion_determinism(const fs::path& dir) {
  const std::string cfg = (fs::path(ROMFBK_SOURCE_DIR) / "configs" / "smoke.json").string();
  bool ok = true;
  std::string detail;
  for (const char* run : {"a", "b"}) {
    const fs::path r = dir / run;
    fs::create_directories(r);
    ok = ok && run_stage({"generate", "--config", cfg, "--out", (r / "d.bin").string()}) == 0;
    ok = ok && run_stage({"train", "--config", cfg, "--dataset", (r / "d.bin").string(), "--out", (r / "m.bin").string()}) == 0;
    for (const char* mode : {"full", "latent"}) {
      ok = ok && run_stage({"control", "--model", (r / "m.bin").string(), "--mode", mode, "--sigma", "0.1", "--seed", "3",
                      "--scenario", "0.2", "-0.1", "--y0", "-0.3", "0.2", "--out",
                      (r / (std::string(mode) + ".bin")).string()}) == 0;
    }
    ok = ok && run_stage({"evaluate", "--model", (r / "m.bin").string(), "--dataset", (r / "d.bin").string(), "--sigma",
                    "0.15", "--seed", "4", "--out", (r / "e.csv").string()}) == 0;
    ok = ok && run_stage({"export-csv", "--in", (r / "m.bin").string(), "--out", (r / "m.csv").string()}) == 0;
  }
  if (!ok) {
    report(9, false, "a CLI stage failed");
    return;
  }
  const fs::path a = dir / "a", b = dir / "b";
  for (const char* f : {"d.bin", "m.bin", "m.loss.csv", "e.csv", "m.csv"}) {
    const bool same = read_file(a / f) == read_file(b / f);
    ok = ok && same;
    detail += format(" %s:%s", f, same ? "identical" : "DIFFERENT");
  }
  for (const char* f : {"full.bin", "latent.bin"}) {
    const bool same = without_timing(a / f) == without_timing(b / f);
    ok = ok && same;
    detail += format(" %s:%s", f, same ? "identical(no timing)" : "DIFFERENT");
  }
  report(9, ok, "generate/train/control/evaluate/export-csv rerun with same config+seed:" + detail);
}

}  // namespace

int main() {
  spdlog::set_level(spdlog::level::err);
  const fs::path dir = fs::temp_directory_path() / ("romfbk_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);

  criterion_adjoint();

  // Desk pipeline through the CLI, timed end to end.
  const fs::path desk = fs::path(ROMFBK_SOURCE_DIR) / "configs" / "desk.json";
  const RunConfig cfg = RunConfig::load(desk);
  const auto t0 = Clock::now();
  const bool gen_ok = run_stage({"generate", "--config", desk.string(), "--out", (dir / "desk_data.bin").string()}) == 0;
  const double gen_secs = since(t0);
  const bool train_ok = gen_ok && run_stage({"train", "--config", desk.string(), "--dataset", (dir / "desk_data.bin").string(),
                                       "--out", (dir / "desk_model.bin").string()}) == 0;
  const double pipeline_secs = since(t0);
  if (!train_ok) {
    report(5, false, "desk pipeline did not complete");
    print_results();
    return 1;
  }
  const SnapshotSet data = load_dataset(dir / "desk_data.bin");
  const ControllerModel model = load_model(dir / "desk_model.bin");
  for (int t = 0; t < data.num_trajectories(); ++t) {
    Eigen::MatrixXd s(data.grid.size(), data.steps + 1);
    for (int j = 0; j < data.steps; ++j) s.col(j) = data.states.col(data.snapshot_index(t, j));
    s.col(data.steps) = data.terminal_states.col(t);
    check_mass(s);
  }

  criterion_pod(data);
  criterion_nn_gradients();

  const EvaluationReport ev = evaluate_model(model, data);
  report(5, ev.policy_decoded <= 0.20 && pipeline_secs <= 1800.0,
         format("desk pipeline (nx=32, %d trajectories incl. mirrors, Nt=4): decoded policy test eps_rel %.1f%% "
             "(<= 20%%; latent %.1f%%, state rec %.1f%%, control rec %.1f%%), runtime %.1f s (generate %.1f s) "
             "(<= 1800 s)",
             data.num_trajectories(), 100 * ev.policy_decoded, 100 * ev.policy_latent,
             100 * ev.state_reconstruction, 100 * ev.control_reconstruction, pipeline_secs, gen_secs));

  criteria_loops(model, cfg);
  criterion_noise(model, cfg);
  criterion_determinism(dir / "determinism");

  report(2, worst_mass_drift <= 1e-10,
         format("max relative mass drift %.2e over %ld plant steps (<= 1e-10); also asserted in the unit suite",
             worst_mass_drift, mass_checks));

  fs::remove_all(dir);
  return print_results() == 0 ? 0 : 1;
}
