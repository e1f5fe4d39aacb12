#pragma once

#include <Eigen/Core>

#include <optional>

namespace romfbk {

/// Orthonormal POD basis of a snapshot matrix (snapshots are columns).
struct PodBasis {
  Eigen::MatrixXd modes;            ///< full_dim x n_modes, orthonormal columns
  Eigen::VectorXd singular_values;  ///< every singular value, non-increasing
  std::optional<Eigen::VectorXd> mean;

  int full_dim() const noexcept { return static_cast<int>(modes.rows()); }
  int n_modes() const noexcept { return static_cast<int>(modes.cols()); }
};

struct PodOptions {
  /// Fixed mode count; when empty, the count is picked from energy_tol.
  std::optional<int> n_modes;
  /// Keep the fewest modes with captured energy >= 1 - energy_tol.
  double energy_tol = 1e-4;
  /// Subtract the snapshot mean before the SVD.
  bool center = false;
};

PodBasis compute_pod(const Eigen::Ref<const Eigen::MatrixXd>& snapshots, const PodOptions& options = {});

/// V^T (x - mean), column by column.
Eigen::MatrixXd pod_encode(const PodBasis& basis, const Eigen::Ref<const Eigen::MatrixXd>& x);
/// V z + mean.
Eigen::MatrixXd pod_decode(const PodBasis& basis, const Eigen::Ref<const Eigen::MatrixXd>& z);

/// Separate POD of the ux block (first half of the rows) and the uy block,
/// assembled block-diagonally: the first modes_per_component columns span
/// ux, the rest span uy.
PodBasis control_pod_componentwise(const Eigen::Ref<const Eigen::MatrixXd>& control_snapshots,
                                   int modes_per_component, bool center = false);

/// Mean over samples (columns) of ||truth - approx|| / ||truth||. Samples with
/// a zero-norm truth are skipped with a warning.
double relative_error(const Eigen::Ref<const Eigen::MatrixXd>& truth, const Eigen::Ref<const Eigen::MatrixXd>& approx);

}  // namespace romfbk
