#include "romfbk/ocp.hpp"

#include "romfbk/optim.hpp"

#include <spdlog/spdlog.h>

#include <stdexcept>

namespace romfbk {

void OcpConfig::validate() const {
  if (!(beta > 0.0)) throw std::invalid_argument("ocp config: beta must be positive");
  if (!(beta_g >= 0.0)) throw std::invalid_argument("ocp config: beta_g must be non-negative");
  if (!(boundary_weight >= 0.0)) throw std::invalid_argument("ocp config: boundary_weight must be non-negative");
  if (!(opt_tol > 0.0)) throw std::invalid_argument("ocp config: opt_tol must be positive");
  if (max_iters < 1) throw std::invalid_argument("ocp config: max_iters must be >= 1");
  if (lbfgs_memory < 1) throw std::invalid_argument("ocp config: lbfgs_memory must be >= 1");
}

namespace {

// Partial derivative along one axis; stride 1 for x1, nx for x2.
Eigen::VectorXd axis_derivative(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& f, bool along_x2) {
  const int nx = grid.nx();
  const double h = grid.h();
  Eigen::VectorXd d(grid.size());
  for (int j = 0; j < nx; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int k = grid.index(i, j);
      const int pos = along_x2 ? j : i;
      const int stride = along_x2 ? nx : 1;
      if (pos == 0) {
        d(k) = (f(k + stride) - f(k)) / h;
      } else if (pos == nx - 1) {
        d(k) = (f(k) - f(k - stride)) / h;
      } else {
        d(k) = (f(k + stride) - f(k - stride)) / (2.0 * h);
      }
    }
  }
  return d;
}

// Transpose of axis_derivative applied to g.
Eigen::VectorXd axis_derivative_transpose(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& g,
                                          bool along_x2) {
  const int nx = grid.nx();
  const double h = grid.h();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.size());
  for (int j = 0; j < nx; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int k = grid.index(i, j);
      const int pos = along_x2 ? j : i;
      const int stride = along_x2 ? nx : 1;
      if (pos == 0) {
        out(k + stride) += g(k) / h;
        out(k) -= g(k) / h;
      } else if (pos == nx - 1) {
        out(k) += g(k) / h;
        out(k - stride) -= g(k) / h;
      } else {
        out(k + stride) += g(k) / (2.0 * h);
        out(k - stride) -= g(k) / (2.0 * h);
      }
    }
  }
  return out;
}

void check_target(const StateField& y, const StateField& target) {
  if (!(y.grid == target.grid)) throw std::invalid_argument("cost: target lives on a different grid");
}

double boundary_sum(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& y) {
  double s = 0.0;
  for (int k = 0; k < grid.size(); ++k) {
    const int faces = grid.boundary_faces(k);
    if (faces) s += faces * y(k) * y(k);
  }
  return s * grid.h();
}

}  // namespace

double gradient_energy(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& f) {
  const double h2 = grid.h() * grid.h();
  return h2 * (axis_derivative(grid, f, false).squaredNorm() + axis_derivative(grid, f, true).squaredNorm());
}

Eigen::VectorXd gradient_energy_derivative(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& f) {
  const double h2 = grid.h() * grid.h();
  return 2.0 * h2 *
         (axis_derivative_transpose(grid, axis_derivative(grid, f, false), false) +
          axis_derivative_transpose(grid, axis_derivative(grid, f, true), true));
}

CostTerms cost_terms(const Trajectory& traj, const FomConfig& fom, const OcpConfig& ocp, const StateField& target) {
  const int nt = static_cast<int>(traj.controls.size());
  if (static_cast<int>(traj.states.size()) != nt + 1) {
    throw std::invalid_argument("cost: expected one more state than controls");
  }
  const Grid& grid = target.grid;
  const double h2 = grid.h() * grid.h();
  const double dt = fom.dt;
  CostTerms terms;
  for (int j = 0; j <= nt; ++j) {
    const StateField& y = traj.states[static_cast<std::size_t>(j)];
    check_target(y, target);
    const Eigen::VectorXd diff = y.values - target.values;
    const double w = j < nt ? dt : 0.5 * dt;
    terms.tracking += 0.5 * w * h2 * mirror_symmetric_dot(grid, diff, diff);
    if (j < nt) terms.boundary += ocp.boundary_weight * dt * boundary_sum(grid, y.values);
  }
  for (const ControlField& u : traj.controls) {
    if (!(u.grid == grid)) throw std::invalid_argument("cost: control lives on a different grid");
    terms.energy += 0.5 * ocp.beta * dt * h2 *
                    (mirror_symmetric_dot(grid, u.ux, u.ux) + mirror_symmetric_dot(grid, u.uy, u.uy));
    terms.smoothing += 0.5 * ocp.beta_g * dt * (gradient_energy(grid, u.ux) + gradient_energy(grid, u.uy));
  }
  return terms;
}

double cost(const Trajectory& traj, const FomConfig& fom, const OcpConfig& ocp, const StateField& target) {
  return cost_terms(traj, fom, ocp, target).total();
}

CostGradient cost_and_gradient(const std::vector<ControlField>& controls, const StateField& y0,
                               const Scenario& scenario, const FomConfig& fom, const OcpConfig& ocp,
                               const StateField& target) {
  fom.validate();
  const int nt = fom.steps;
  if (static_cast<int>(controls.size()) != nt) throw std::invalid_argument("gradient: one control per step");
  check_target(y0, target);
  const Grid& grid = y0.grid;
  const double h = grid.h();
  const double h2 = h * h;
  const double dt = fom.dt;
  const ControlField flow = background_flow(grid, scenario);

  std::vector<StateField> states;
  std::vector<StepTape> tapes(static_cast<std::size_t>(nt));
  std::vector<ControlField> velocity;
  states.reserve(static_cast<std::size_t>(nt) + 1);
  states.push_back(y0);
  for (int j = 0; j < nt; ++j) {
    states.push_back(step(states.back(), controls[static_cast<std::size_t>(j)], flow, fom,
                          &tapes[static_cast<std::size_t>(j)]));
    velocity.push_back(controls[static_cast<std::size_t>(j)] + flow);
  }

  Trajectory traj;
  traj.states = states;
  traj.controls = controls;
  CostGradient out;
  out.cost = cost(traj, fom, ocp, target);

  // Reverse sweep: ybar holds dJ/dy_{j+1} entering step j.
  Eigen::VectorXd ybar = 0.5 * dt * h2 * (states.back().values - target.values);
  out.gradient.assign(static_cast<std::size_t>(nt), ControlField::zeros(grid));
  for (int j = nt - 1; j >= 0; --j) {
    const auto sj = static_cast<std::size_t>(j);
    ControlField& g = out.gradient[sj];
    Eigen::VectorXd prev = Eigen::VectorXd::Zero(grid.size());
    step_adjoint(grid, tapes[sj], velocity[sj].ux, velocity[sj].uy, fom, ybar, prev, g.ux, g.uy);

    const ControlField& u = controls[sj];
    g.ux += ocp.beta * dt * h2 * u.ux + 0.5 * ocp.beta_g * dt * gradient_energy_derivative(grid, u.ux);
    g.uy += ocp.beta * dt * h2 * u.uy + 0.5 * ocp.beta_g * dt * gradient_energy_derivative(grid, u.uy);

    const Eigen::VectorXd& y = states[sj].values;
    prev += dt * h2 * (y - target.values);
    if (ocp.boundary_weight != 0.0) {
      for (int k = 0; k < grid.size(); ++k) {
        const int faces = grid.boundary_faces(k);
        if (faces) prev(k) += ocp.boundary_weight * dt * h * 2.0 * faces * y(k);
      }
    }
    ybar = std::move(prev);
  }
  return out;
}

std::vector<ControlField> gradient(const std::vector<ControlField>& controls, const StateField& y0,
                                   const Scenario& scenario, const FomConfig& fom, const OcpConfig& ocp,
                                   const StateField& target) {
  return cost_and_gradient(controls, y0, scenario, fom, ocp, target).gradient;
}

Eigen::VectorXd flatten_controls(const std::vector<ControlField>& controls) {
  if (controls.empty()) return {};
  const Eigen::Index n = controls.front().ux.size();
  Eigen::VectorXd v(static_cast<Eigen::Index>(controls.size()) * 2 * n);
  for (std::size_t j = 0; j < controls.size(); ++j) {
    v.segment(static_cast<Eigen::Index>(j) * 2 * n, 2 * n) = controls[j].stacked();
  }
  return v;
}

std::vector<ControlField> unflatten_controls(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& v,
                                             int steps) {
  const Eigen::Index block = 2 * static_cast<Eigen::Index>(grid.size());
  if (v.size() != block * steps) throw std::invalid_argument("unflatten_controls: length mismatch");
  std::vector<ControlField> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int j = 0; j < steps; ++j) out.push_back(ControlField::from_stacked(grid, v.segment(j * block, block)));
  return out;
}

OcpSolution solve_ocp(const StateField& y0, const Scenario& scenario, const FomConfig& fom, const OcpConfig& ocp,
                      const StateField& target) {
  fom.validate();
  ocp.validate();
  const Grid& grid = y0.grid;
  const int nt = fom.steps;

  Objective objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const CostGradient cg = cost_and_gradient(unflatten_controls(grid, x, nt), y0, scenario, fom, ocp, target);
    g = flatten_controls(cg.gradient);
    return cg.cost;
  };

  LbfgsOptions opts;
  opts.memory = ocp.lbfgs_memory;
  opts.max_iters = ocp.max_iters;
  opts.grad_tol = ocp.opt_tol;
  opts.max_line_search = 20;
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(grid.size()) * nt);
  OptimResult res = nt > 0 ? minimize_lbfgs(objective, x0, opts) : OptimResult{};

  OcpSolution sol;
  std::vector<ControlField> controls = unflatten_controls(grid, res.x.size() ? res.x : x0, nt);
  sol.trajectory = simulate(y0, controls, scenario, fom);
  sol.trajectory.cost = cost(sol.trajectory, fom, ocp, target);
  sol.iterations = res.iterations;
  sol.grad_inf_norm = res.grad_inf_norm;
  sol.converged = res.converged || nt == 0;
  sol.warning = res.line_search_failed;
  sol.cost_history = std::move(res.history);
  if (sol.warning) {
    spdlog::warn("solve_ocp: line search failed after {} iterations (|g|inf = {:.3e}); returning best iterate",
                 sol.iterations, sol.grad_inf_norm);
  }
  return sol;
}

}  // namespace romfbk
