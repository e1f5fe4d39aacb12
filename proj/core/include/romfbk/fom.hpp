#pragma once

#include "romfbk/grid.hpp"

#include <Eigen/Core>

#include <vector>

namespace romfbk {

/// Time discretization and physics of the controlled Fokker-Planck plant.
struct FomConfig {
  double nu = 0.001;  ///< diffusion coefficient
  double dt = 0.25;   ///< control/observation time step
  double T = 1.0;     ///< horizon
  int steps = 4;      ///< Nt, steps * dt == T
  /// Each step is split into this many semi-implicit sub-steps of dt/substeps
  /// with the control held fixed. 1 gives the plain scheme.
  int substeps = 16;
  double cg_tolerance = 1e-10;

  /// Builds a config with steps = round(T / dt); throws if T is not a whole
  /// number of steps.
  static FomConfig from_horizon(double nu, double dt, double T, int substeps = 16);
  void validate() const;
  double substep() const noexcept { return dt / substeps; }
};

/// Optimal (or simulated) state-control pair for one scenario.
struct Trajectory {
  Scenario scenario;
  Point initial_center;
  std::vector<StateField> states;      ///< t_0 .. t_Nt
  std::vector<ControlField> controls;  ///< t_0 .. t_{Nt-1}
  double cost = 0.0;
};

/// Net advective outflow per cell, (1/h) * sum over faces of the first-order
/// upwind flux. Boundary faces carry no flux.
Eigen::VectorXd upwind_divergence(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& wx,
                                  const Eigen::Ref<const Eigen::VectorXd>& wy,
                                  const Eigen::Ref<const Eigen::VectorXd>& y);

/// y + coeff * L y, where L is the Neumann 5-point Laplacian scaled by 1/h^2
/// with a positive sign convention (L constant = 0).
Eigen::VectorXd apply_diffusion_operator(const Grid& grid, double coeff,
                                         const Eigen::Ref<const Eigen::VectorXd>& y);

/// Solves (I + coeff L) x = rhs by conjugate gradients started at rhs.
/// Every iterate has the same sum as rhs, so mass is preserved irrespective
/// of the stopping tolerance.
Eigen::VectorXd solve_diffusion(const Grid& grid, double coeff, const Eigen::Ref<const Eigen::VectorXd>& rhs,
                                double rel_tol = 1e-10);

/// Largest sum of outgoing face speeds times dt_sub/h over all cells; the
/// explicit upwind sub-step preserves positivity while this is <= 1.
double cfl_number(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& wx,
                  const Eigen::Ref<const Eigen::VectorXd>& wy, double dt_sub);

/// States entering each sub-step, recorded for the reverse sweep.
struct StepTape {
  std::vector<Eigen::VectorXd> inputs;
};

/// One time step: for each sub-step solve (I + dt_s nu L) y' = y - dt_s Div(u+v, y).
StateField step(const StateField& y, const ControlField& u, const ControlField& v, const FomConfig& cfg,
                StepTape* tape = nullptr);

/// Reverse sweep of step(). Given the sensitivity of the output state, adds
/// the sensitivity with respect to the input state to state_bar and with
/// respect to the total velocity (u+v) to wx_bar / wy_bar.
void step_adjoint(const Grid& grid, const StepTape& tape, const Eigen::Ref<const Eigen::VectorXd>& wx,
                  const Eigen::Ref<const Eigen::VectorXd>& wy, const FomConfig& cfg,
                  const Eigen::Ref<const Eigen::VectorXd>& out_bar, Eigen::Ref<Eigen::VectorXd> state_bar,
                  Eigen::Ref<Eigen::VectorXd> wx_bar, Eigen::Ref<Eigen::VectorXd> wy_bar);

/// Integrates the state equation under the given controls and the scenario's
/// background flow. Requires controls.size() == cfg.steps.
Trajectory simulate(const StateField& y0, const std::vector<ControlField>& controls, const Scenario& scenario,
                    const FomConfig& cfg);

}  // namespace romfbk
