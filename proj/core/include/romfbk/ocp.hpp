#pragma once

#include "romfbk/fom.hpp"
#include "romfbk/grid.hpp"

#include <vector>

namespace romfbk {

struct OcpConfig {
  double beta = 0.2;             ///< control energy weight
  double beta_g = 0.2;           ///< control gradient weight
  double boundary_weight = 1.0;  ///< weight of the boundary penalty
  double opt_tol = 1e-6;         ///< infinity norm of the gradient
  int max_iters = 500;
  int lbfgs_memory = 10;

  void validate() const;
};

/// Individual terms of the discrete cost.
///
/// tracking  = 1/2 sum_j w_j sum_k h^2 (y_j - y_d)^2, w_j = dt for j < Nt, dt/2 for j = Nt
/// boundary  = bw  sum_{j<Nt} dt sum_faces h y^2
/// energy    = beta/2   sum_{j<Nt} dt sum_k h^2 |u_j|^2
/// smoothing = beta_g/2 sum_{j<Nt} dt sum_k h^2 |grad u_j|^2
struct CostTerms {
  double tracking = 0.0;
  double boundary = 0.0;
  double energy = 0.0;
  double smoothing = 0.0;
  double total() const noexcept { return tracking + boundary + energy + smoothing; }
};

/// sum_k h^2 |grad f|^2 with central differences inside and one-sided
/// differences in boundary cells.
double gradient_energy(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& f);
/// Derivative of gradient_energy with respect to f.
Eigen::VectorXd gradient_energy_derivative(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& f);

CostTerms cost_terms(const Trajectory& traj, const FomConfig& fom, const OcpConfig& ocp, const StateField& target);
double cost(const Trajectory& traj, const FomConfig& fom, const OcpConfig& ocp, const StateField& target);

struct CostGradient {
  double cost = 0.0;
  std::vector<ControlField> gradient;
};

/// Cost of the controlled trajectory and its exact discrete adjoint gradient
/// with respect to every control.
CostGradient cost_and_gradient(const std::vector<ControlField>& controls, const StateField& y0,
                               const Scenario& scenario, const FomConfig& fom, const OcpConfig& ocp,
                               const StateField& target);

std::vector<ControlField> gradient(const std::vector<ControlField>& controls, const StateField& y0,
                                   const Scenario& scenario, const FomConfig& fom, const OcpConfig& ocp,
                                   const StateField& target);

struct OcpSolution {
  Trajectory trajectory;
  int iterations = 0;
  double grad_inf_norm = 0.0;
  bool converged = false;
  /// The line search gave up; trajectory holds the best iterate.
  bool warning = false;
  std::vector<double> cost_history;
};

/// Open-loop optimal control from u = 0 by L-BFGS.
OcpSolution solve_ocp(const StateField& y0, const Scenario& scenario, const FomConfig& fom, const OcpConfig& ocp,
                      const StateField& target);

/// Controls flattened step by step as [ux_0; uy_0; ux_1; uy_1; ...].
Eigen::VectorXd flatten_controls(const std::vector<ControlField>& controls);
std::vector<ControlField> unflatten_controls(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& v,
                                             int steps);

}  // namespace romfbk
