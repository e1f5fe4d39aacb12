#include "romfbk/fom.hpp"

#include "romfbk/error.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace romfbk {

FomConfig FomConfig::from_horizon(double nu, double dt, double T, int substeps) {
  FomConfig cfg;
  cfg.nu = nu;
  cfg.dt = dt;
  cfg.T = T;
  cfg.substeps = substeps;
  cfg.steps = static_cast<int>(std::lround(T / dt));
  cfg.validate();
  return cfg;
}

void FomConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("fom config: dt must be positive");
  if (!(nu >= 0.0)) throw std::invalid_argument("fom config: nu must be non-negative");
  if (steps < 0) throw std::invalid_argument("fom config: steps must be non-negative");
  if (substeps < 1) throw std::invalid_argument("fom config: substeps must be >= 1");
  if (std::abs(steps * dt - T) > 1e-12 * std::max(1.0, std::abs(T))) {
    throw std::invalid_argument("fom config: steps * dt must equal T");
  }
  if (!(cg_tolerance > 0.0)) throw std::invalid_argument("fom config: cg_tolerance must be positive");
}

namespace {

// Upwinded face flux; a zero face velocity carries nothing.
inline double upwind_flux(double wf, double left, double right) {
  return wf > 0.0 ? wf * left : (wf < 0.0 ? wf * right : 0.0);
}

void check_sizes(const Grid& grid, Eigen::Index a, Eigen::Index b, Eigen::Index c) {
  const Eigen::Index n = grid.size();
  if (a != n || b != n || c != n) throw std::invalid_argument("fom: field length does not match grid");
}

}  // namespace

Eigen::VectorXd upwind_divergence(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& wx,
                                  const Eigen::Ref<const Eigen::VectorXd>& wy,
                                  const Eigen::Ref<const Eigen::VectorXd>& y) {
  check_sizes(grid, wx.size(), wy.size(), y.size());
  const int nx = grid.nx();
  Eigen::VectorXd dx = Eigen::VectorXd::Zero(grid.size());
  Eigen::VectorXd dy = Eigen::VectorXd::Zero(grid.size());
  for (int j = 0; j < nx; ++j) {
    for (int i = 0; i + 1 < nx; ++i) {
      const int k = grid.index(i, j);
      const int r = k + 1;
      const double f = upwind_flux(0.5 * (wx(k) + wx(r)), y(k), y(r));
      dx(k) += f;
      dx(r) -= f;
    }
  }
  for (int j = 0; j + 1 < nx; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int k = grid.index(i, j);
      const int t = k + nx;
      const double f = upwind_flux(0.5 * (wy(k) + wy(t)), y(k), y(t));
      dy(k) += f;
      dy(t) -= f;
    }
  }
  // x and y parts are summed separately to keep the result mirror-exact.
  return (dx + dy) / grid.h();
}

Eigen::VectorXd apply_diffusion_operator(const Grid& grid, double coeff,
                                         const Eigen::Ref<const Eigen::VectorXd>& y) {
  const int nx = grid.nx();
  const double a = coeff / (grid.h() * grid.h());
  Eigen::VectorXd out(grid.size());
  for (int j = 0; j < nx; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int k = grid.index(i, j);
      const double yk = y(k);
      const double e = i + 1 < nx ? yk - y(k + 1) : 0.0;
      const double w = i > 0 ? yk - y(k - 1) : 0.0;
      const double n = j + 1 < nx ? yk - y(k + nx) : 0.0;
      const double s = j > 0 ? yk - y(k - nx) : 0.0;
      out(k) = yk + a * ((e + w) + (n + s));
    }
  }
  return out;
}

Eigen::VectorXd solve_diffusion(const Grid& grid, double coeff, const Eigen::Ref<const Eigen::VectorXd>& rhs,
                                double rel_tol) {
  Eigen::VectorXd x = rhs;
  if (coeff == 0.0) return x;
  const double bnorm = std::sqrt(mirror_symmetric_dot(grid, rhs, rhs));
  if (bnorm == 0.0) return x;

  Eigen::VectorXd r = rhs - apply_diffusion_operator(grid, coeff, x);
  Eigen::VectorXd p = r;
  double rr = mirror_symmetric_dot(grid, r, r);
  const int max_iters = 10 * grid.size();
  for (int it = 0; it < max_iters; ++it) {
    if (std::sqrt(rr) <= rel_tol * bnorm) return x;
    const Eigen::VectorXd ap = apply_diffusion_operator(grid, coeff, p);
    const double alpha = rr / mirror_symmetric_dot(grid, p, ap);
    x += alpha * p;
    r -= alpha * ap;
    const double rr_next = mirror_symmetric_dot(grid, r, r);
    p = r + (rr_next / rr) * p;
    rr = rr_next;
  }
  if (std::sqrt(rr) <= rel_tol * bnorm) return x;
  throw SolverError("diffusion solve: CG did not reach relative residual " + std::to_string(rel_tol));
}

double cfl_number(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& wx,
                  const Eigen::Ref<const Eigen::VectorXd>& wy, double dt_sub) {
  const int nx = grid.nx();
  double worst = 0.0;
  for (int j = 0; j < nx; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int k = grid.index(i, j);
      double out = 0.0;
      if (i + 1 < nx) out += std::max(0.0, 0.5 * (wx(k) + wx(k + 1)));
      if (i > 0) out += std::max(0.0, -0.5 * (wx(k) + wx(k - 1)));
      if (j + 1 < nx) out += std::max(0.0, 0.5 * (wy(k) + wy(k + nx)));
      if (j > 0) out += std::max(0.0, -0.5 * (wy(k) + wy(k - nx)));
      worst = std::max(worst, out);
    }
  }
  return worst * dt_sub / grid.h();
}

StateField step(const StateField& y, const ControlField& u, const ControlField& v, const FomConfig& cfg,
                StepTape* tape) {
  const Grid& grid = y.grid;
  if (!(u.grid == grid) || !(v.grid == grid)) throw std::invalid_argument("step: grid mismatch");
  const Eigen::VectorXd wx = u.ux + v.ux;
  const Eigen::VectorXd wy = u.uy + v.uy;
  const double ds = cfg.substep();

  const double cfl = cfl_number(grid, wx, wy, ds);
  if (cfl > 1.0) spdlog::debug("step: sub-step CFL number {:.3f} exceeds 1", cfl);

  if (tape) tape->inputs.clear();
  Eigen::VectorXd cur = y.values;
  for (int s = 0; s < cfg.substeps; ++s) {
    if (tape) tape->inputs.push_back(cur);
    const Eigen::VectorXd rhs = cur - ds * upwind_divergence(grid, wx, wy, cur);
    cur = solve_diffusion(grid, ds * cfg.nu, rhs, cfg.cg_tolerance);
  }
  return {grid, std::move(cur)};
}

void step_adjoint(const Grid& grid, const StepTape& tape, const Eigen::Ref<const Eigen::VectorXd>& wx,
                  const Eigen::Ref<const Eigen::VectorXd>& wy, const FomConfig& cfg,
                  const Eigen::Ref<const Eigen::VectorXd>& out_bar, Eigen::Ref<Eigen::VectorXd> state_bar,
                  Eigen::Ref<Eigen::VectorXd> wx_bar, Eigen::Ref<Eigen::VectorXd> wy_bar) {
  const int nx = grid.nx();
  const double ds = cfg.substep();
  const double c = ds / grid.h();
  Eigen::VectorXd ybar = out_bar;
  for (int s = cfg.substeps - 1; s >= 0; --s) {
    const Eigen::VectorXd& y = tape.inputs.at(static_cast<std::size_t>(s));
    // The diffusion system is symmetric: its transpose solve is the same solve.
    const Eigen::VectorXd zbar = solve_diffusion(grid, ds * cfg.nu, ybar, cfg.cg_tolerance);
    Eigen::VectorXd next = zbar;
    // z = y - c * (sum of face fluxes); a flux f from cell a to cell b
    // enters z_a with -c and z_b with +c.
    auto face = [&](int a, int b, double wa, double wb, Eigen::Ref<Eigen::VectorXd> wbar) {
      const double wf = 0.5 * (wa + wb);
      const double fbar = c * (zbar(b) - zbar(a));
      double wf_bar;
      if (wf > 0.0) {
        next(a) += fbar * wf;
        wf_bar = fbar * y(a);
      } else if (wf < 0.0) {
        next(b) += fbar * wf;
        wf_bar = fbar * y(b);
      } else {
        // Midpoint of the one-sided derivatives at the upwind switch.
        wf_bar = fbar * 0.5 * (y(a) + y(b));
      }
      wbar(a) += 0.5 * wf_bar;
      wbar(b) += 0.5 * wf_bar;
    };
    for (int j = 0; j < nx; ++j) {
      for (int i = 0; i + 1 < nx; ++i) {
        const int k = grid.index(i, j);
        face(k, k + 1, wx(k), wx(k + 1), wx_bar);
      }
    }
    for (int j = 0; j + 1 < nx; ++j) {
      for (int i = 0; i < nx; ++i) {
        const int k = grid.index(i, j);
        face(k, k + nx, wy(k), wy(k + nx), wy_bar);
      }
    }
    ybar = std::move(next);
  }
  state_bar += ybar;
}

Trajectory simulate(const StateField& y0, const std::vector<ControlField>& controls, const Scenario& scenario,
                    const FomConfig& cfg) {
  cfg.validate();
  if (static_cast<int>(controls.size()) != cfg.steps) {
    throw std::invalid_argument("simulate: expected one control per time step");
  }
  Trajectory traj;
  traj.scenario = scenario;
  traj.states.reserve(controls.size() + 1);
  traj.states.push_back(y0);
  traj.controls = controls;
  const ControlField flow = background_flow(y0.grid, scenario);
  for (const auto& u : controls) traj.states.push_back(step(traj.states.back(), u, flow, cfg));
  return traj;
}

}  // namespace romfbk
