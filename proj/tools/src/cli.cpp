#include "romfbk_cli/cli.hpp"

#include "romfbk/artifact.hpp"
#include "romfbk/config.hpp"
#include "romfbk/controller.hpp"
#include "romfbk/dataset.hpp"
#include "romfbk/random.hpp"
#include "romfbk/serialize.hpp"
#include "romfbk/training.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

namespace romfbk::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string dataset;
  std::string model;
  std::string input;
  std::string mode = "full";
  std::optional<double> sigma;
  std::optional<std::uint64_t> seed;
  std::vector<double> scenario;
  std::vector<double> y0;
  int scenarios = 3;
  std::string log_level = "warn";
};

// Files written by the current command; removed if the command fails.
class Outputs {
 public:
  void track(const fs::path& p) { paths_.push_back(p); }
  void rollback() {
    for (const auto& p : paths_) {
      std::error_code ec;
      fs::remove(p, ec);
      fs::path partial = p;
      partial += ".partial";
      fs::remove(partial, ec);
    }
  }

 private:
  std::vector<fs::path> paths_;
};

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text, Outputs& outputs) {
  outputs.track(path);
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    f << text;
    if (!f) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, path);
}

RunConfig load_config(const Options& o) {
  RunConfig c = o.config.empty() ? RunConfig::from_json(nlohmann::json::object()) : RunConfig::load(o.config);
  if (o.seed) c.seed = *o.seed;
  return c;
}

Eigen::VectorXd scenario_mu(const Options& o) {
  return Eigen::Map<const Eigen::VectorXd>(o.scenario.data(), static_cast<Eigen::Index>(o.scenario.size()));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_generate(const Options& o, std::ostream& out, Outputs& outputs) {
  const RunConfig cfg = load_config(o);
  const auto t0 = std::chrono::steady_clock::now();
  SnapshotSet data = generate_dataset(cfg.generation());
  if (cfg.augment) data = symmetry_augment(data);
  outputs.track(o.out);
  save_dataset(o.out, data, {{"config", cfg.to_json()}});
  out << "dataset: " << data.num_trajectories() << " trajectories, " << data.size() << " snapshots ("
      << data.train_trajectories.size() << " train / " << data.test_trajectories.size() << " test trajectories), "
      << data.dropped << " dropped, " << data.warnings << " optimizer warnings, " << seconds_since(t0) << " s\n";
  return 0;
}

std::string report_csv(const EvaluationReport& r) {
  std::string s = "metric,value\n";
  auto row = [&](const char* k, double v) { s += std::string(k) + ',' + fmt17(v) + '\n'; };
  row("state_reconstruction", r.state_reconstruction);
  row("control_reconstruction", r.control_reconstruction);
  row("policy_latent", r.policy_latent);
  row("policy_decoded", r.policy_decoded);
  row("forward_data_latent", r.forward_data_latent);
  row("forward_policy_latent", r.forward_policy_latent);
  row("forward_data_decoded", r.forward_data_decoded);
  row("forward_policy_decoded", r.forward_policy_decoded);
  row("test_snapshots", r.test_snapshots);
  return s;
}

int cmd_train(const Options& o, std::ostream& out, Outputs& outputs) {
  const RunConfig cfg = load_config(o);
  const SnapshotSet data = load_dataset(o.dataset);
  const TrainConfig tc = cfg.train_config();
  const auto t0 = std::chrono::steady_clock::now();
  TrainResult stage1 = train_controller(data, cfg.reduction, cfg.stage1, tc, false);
  std::vector<std::pair<int, double>> history;
  for (const double v : stage1.loss_history) history.emplace_back(1, v);
  ControllerModel model = stage1.model;
  if (cfg.with_forward) {
    const std::optional<ControllerModel> warm = cfg.cold_start ? std::nullopt : std::optional(stage1.model);
    TrainResult stage2 = train_controller(data, cfg.reduction, cfg.stage2, tc, true, warm, cfg.cold_start);
    for (const double v : stage2.loss_history) history.emplace_back(2, v);
    model = std::move(stage2.model);
  }
  model.loss_history.clear();
  for (const auto& h : history) model.loss_history.push_back(h.second);
  const double seconds = seconds_since(t0);

  std::string csv = "stage,iteration,loss\n";
  int it = 0, last_stage = 0;
  for (const auto& [stage, v] : history) {
    if (stage != last_stage) it = 0;
    last_stage = stage;
    csv += std::to_string(stage) + ',' + std::to_string(it++) + ',' + fmt17(v) + '\n';
  }
  fs::path loss_path = o.out;
  loss_path.replace_extension(".loss.csv");
  write_text(loss_path, csv, outputs);
  outputs.track(o.out);
  save_model(o.out, model, {{"config", cfg.to_json()}});

  out << "trained in " << seconds << " s; loss history in " << loss_path.string() << "\n";
  if (!data.test_trajectories.empty()) out << report_csv(evaluate_model(model, data));
  return 0;
}

int cmd_control(const Options& o, std::ostream& out, Outputs& outputs) {
  const ControllerModel model = load_model(o.model);
  const Eigen::VectorXd mu = scenario_mu(o);
  const Point y0{o.y0.at(0), o.y0.at(1)};
  const NoiseSpec noise{o.sigma.value_or(0.0), o.seed.value_or(0)};
  LoopReport r = o.mode == "latent" ? run_latent_loop(model, y0, mu, model.fom, noise)
                                    : run_full_order_loop(model, y0, mu, model.fom, noise);
  outputs.track(o.out);
  save_report(o.out, r);
  const Eigen::VectorXd base = uncontrolled_distances(model.grid, y0, mu, model.fom);
  out << "mode,step,distance,uncontrolled\n";
  for (Eigen::Index j = 0; j < r.distances.size(); ++j) {
    out << to_string(r.mode) << ',' << j << ',' << fmt17(r.distances(j)) << ',' << fmt17(base(j)) << '\n';
  }
  if (!r.completed) throw std::runtime_error("loop aborted: " + r.error);
  return 0;
}

int cmd_evaluate(const Options& o, std::ostream& out, Outputs& outputs) {
  const ControllerModel model = load_model(o.model);
  const SnapshotSet data = load_dataset(o.dataset);
  const EvaluationReport rep = evaluate_model(model, data);
  std::string csv = report_csv(rep);

  const double sigma = o.sigma.value_or(0.0);
  const std::uint64_t seed = o.seed.value_or(0);
  std::vector<double> arrivals;
  for (const int t : data.test_trajectories) {
    const Point y0{data.initial_centers(0, t), data.initial_centers(1, t)};
    const Eigen::VectorXd mu = data.mu.col(data.snapshot_index(t, 0));
    const LoopReport r =
        run_full_order_loop(model, y0, mu, model.fom, {sigma, derive_seed(seed, "trajectory" + std::to_string(t))});
    const StateField yT(model.grid, r.states.col(r.states.cols() - 1));
    const double p = arrival_probability(yT, {mu(0), mu(1)});
    arrivals.push_back(p);
    csv += "arrival_probability[" + std::to_string(t) + "]," + fmt17(p) + '\n';
  }
  if (!arrivals.empty()) {
    std::vector<double> s = arrivals;
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    const double median = n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
    csv += "arrival_probability_median," + fmt17(median) + '\n';
  }
  if (!o.out.empty()) write_text(o.out, csv, outputs);
  out << csv;
  return 0;
}

int cmd_bench(const Options& o, std::ostream& out, Outputs& outputs) {
  const ControllerModel model = load_model(o.model);
  const RunConfig cfg = load_config(o);
  std::mt19937_64 rng(derive_seed(cfg.seed, "bench"));
  std::vector<BenchmarkCase> cases;
  const ParameterBox ib = cfg.initial_box;
  for (int i = 0; i < o.scenarios; ++i) {
    BenchmarkCase c;
    c.y0_center = {uniform(rng, ib.lo(0), ib.hi(0)), uniform(rng, ib.lo(1), ib.hi(1))};
    c.mu.resize(model.parameter_dim());
    for (int d = 0; d < model.parameter_dim(); ++d) {
      c.mu(d) = uniform(rng, model.parameter_box.lo(d), model.parameter_box.hi(d));
    }
    cases.push_back(c);
  }
  const BenchmarkTable t = benchmark(model, cases, model.fom, cfg.ocp);
  std::string csv = "scenario,full_order_seconds,latent_seconds,ocp_seconds\n";
  for (std::size_t i = 0; i < cases.size(); ++i) {
    csv += std::to_string(i) + ',' + fmt17(t.full_order_seconds[i]) + ',' + fmt17(t.latent_seconds[i]) + ',' +
           fmt17(t.ocp_seconds[i]) + '\n';
  }
  csv += "mean," + fmt17(t.mean_full_order) + ',' + fmt17(t.mean_latent) + ',' + fmt17(t.mean_ocp) + '\n';
  csv += "# speedup_full_vs_ocp=" + fmt17(t.speedup_full_vs_ocp) +
         " speedup_latent_vs_full=" + fmt17(t.speedup_latent_vs_full) + '\n';
  if (!o.out.empty()) write_text(o.out, csv, outputs);
  out << csv;
  return 0;
}

int cmd_export(const Options& o, std::ostream& out, Outputs& outputs) {
  const Artifact a = read_artifact(o.input);
  write_text(o.out, artifact_to_csv(a), outputs);
  out << "wrote " << to_string(a.kind) << " with " << a.arrays.size() << " arrays to " << o.out << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"romfbk: reduced-order feedback control of 2D Fokker-Planck transport"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--log-level", o.log_level, "trace|debug|info|warn|error|off")->capture_default_str();

  auto* gen = app.add_subcommand("generate", "solve optimal control problems and write a dataset");
  gen->add_option("--config", o.config, "run configuration (JSON)")->check(CLI::ExistingFile);
  gen->add_option("--out", o.out, "dataset file")->required();
  gen->add_option("--seed", o.seed, "global seed (overrides config)");

  auto* train = app.add_subcommand("train", "train reducers, policy and forward model");
  train->add_option("--config", o.config)->check(CLI::ExistingFile);
  train->add_option("--dataset", o.dataset)->required()->check(CLI::ExistingFile);
  train->add_option("--out", o.out, "model file; the loss history goes to <out>.loss.csv")->required();
  train->add_option("--seed", o.seed);

  auto* control = app.add_subcommand("control", "run a closed loop and write a loop report");
  control->add_option("--model", o.model)->required()->check(CLI::ExistingFile);
  control->add_option("--mode", o.mode)->check(CLI::IsMember({"full", "latent"}));
  control->add_option("--sigma", o.sigma, "observation noise std");
  control->add_option("--seed", o.seed, "noise seed");
  control->add_option("--scenario", o.scenario, "mu1 mu2 [gamma alpha]")->required()->expected(2, 4);
  control->add_option("--y0", o.y0, "initial density center x1 x2")->required()->expected(2);
  control->add_option("--out", o.out, "report file")->required();

  auto* evaluate = app.add_subcommand("evaluate", "test-split errors and arrival probabilities");
  evaluate->add_option("--model", o.model)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--dataset", o.dataset)->required()->check(CLI::ExistingFile);
  evaluate->add_option("--sigma", o.sigma);
  evaluate->add_option("--seed", o.seed);
  evaluate->add_option("--out", o.out, "metrics CSV");

  auto* bench = app.add_subcommand("bench", "time full-order loop, latent loop and OCP solve");
  bench->add_option("--model", o.model)->required()->check(CLI::ExistingFile);
  bench->add_option("--config", o.config)->check(CLI::ExistingFile);
  bench->add_option("--scenarios", o.scenarios)->check(CLI::Range(3, 1000));
  bench->add_option("--seed", o.seed);
  bench->add_option("--out", o.out, "timing CSV");

  auto* exp = app.add_subcommand("export-csv", "dump any artifact as CSV");
  exp->add_option("--in", o.input, "artifact file")->required()->check(CLI::ExistingFile);
  exp->add_option("--out", o.out, "CSV file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  if (o.scenario.size() == 3) {
    err << "error: --scenario takes 2 or 4 values\n";
    return 2;
  }
  spdlog::set_level(spdlog::level::from_str(o.log_level));

  Outputs outputs;
  try {
    if (gen->parsed()) return cmd_generate(o, out, outputs);
    if (train->parsed()) return cmd_train(o, out, outputs);
    if (control->parsed()) return cmd_control(o, out, outputs);
    if (evaluate->parsed()) return cmd_evaluate(o, out, outputs);
    if (bench->parsed()) return cmd_bench(o, out, outputs);
    if (exp->parsed()) return cmd_export(o, out, outputs);
  } catch (const std::exception& e) {
    outputs.rollback();
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace romfbk::cli
