#include "romfbk/pod.hpp"

#include "romfbk/error.hpp"

#include <Eigen/SVD>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace romfbk {

PodBasis compute_pod(const Eigen::Ref<const Eigen::MatrixXd>& snapshots, const PodOptions& options) {
  const Eigen::Index n_snap = snapshots.cols();
  if (n_snap < 1 || snapshots.rows() < 1) throw std::invalid_argument("compute_pod: empty snapshot matrix");
  if (options.n_modes && (*options.n_modes < 1 || *options.n_modes > n_snap || *options.n_modes > snapshots.rows())) {
    throw std::invalid_argument("compute_pod: need 1 <= n_modes <= min(full_dim, n_snap)");
  }
  if (!options.n_modes && !(options.energy_tol >= 0.0 && options.energy_tol < 1.0)) {
    throw std::invalid_argument("compute_pod: energy_tol must lie in [0, 1)");
  }

  PodBasis basis;
  Eigen::MatrixXd work = snapshots;
  if (options.center) {
    basis.mean = snapshots.rowwise().mean();
    work.colwise() -= *basis.mean;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(work, Eigen::ComputeThinU);
  if (svd.info() != Eigen::Success) throw SolverError("compute_pod: SVD did not converge");
  basis.singular_values = svd.singularValues();

  int n = 0;
  if (options.n_modes) {
    n = *options.n_modes;
  } else {
    const Eigen::VectorXd energy = basis.singular_values.array().square();
    const double total = energy.sum();
    double acc = 0.0;
    n = static_cast<int>(energy.size());
    for (Eigen::Index i = 0; i < energy.size(); ++i) {
      acc += energy(i);
      if (total == 0.0 || acc >= (1.0 - options.energy_tol) * total) {
        n = static_cast<int>(i) + 1;
        break;
      }
    }
  }
  basis.modes = svd.matrixU().leftCols(n);
  return basis;
}

Eigen::MatrixXd pod_encode(const PodBasis& basis, const Eigen::Ref<const Eigen::MatrixXd>& x) {
  if (x.rows() != basis.full_dim()) throw std::invalid_argument("pod_encode: dimension mismatch");
  if (basis.mean) return basis.modes.transpose() * (x.colwise() - *basis.mean);
  return basis.modes.transpose() * x;
}

Eigen::MatrixXd pod_decode(const PodBasis& basis, const Eigen::Ref<const Eigen::MatrixXd>& z) {
  if (z.rows() != basis.n_modes()) throw std::invalid_argument("pod_decode: dimension mismatch");
  Eigen::MatrixXd out = basis.modes * z;
  if (basis.mean) out.colwise() += *basis.mean;
  return out;
}

PodBasis control_pod_componentwise(const Eigen::Ref<const Eigen::MatrixXd>& control_snapshots,
                                   int modes_per_component, bool center) {
  if (control_snapshots.rows() % 2 != 0) throw std::invalid_argument("control POD: row count must be even");
  const Eigen::Index n = control_snapshots.rows() / 2;
  PodOptions opts;
  opts.n_modes = modes_per_component;
  opts.center = center;
  const PodBasis bx = compute_pod(control_snapshots.topRows(n), opts);
  const PodBasis by = compute_pod(control_snapshots.bottomRows(n), opts);

  PodBasis out;
  out.modes = Eigen::MatrixXd::Zero(2 * n, 2 * modes_per_component);
  out.modes.topLeftCorner(n, modes_per_component) = bx.modes;
  out.modes.bottomRightCorner(n, modes_per_component) = by.modes;
  out.singular_values.resize(bx.singular_values.size() + by.singular_values.size());
  out.singular_values << bx.singular_values, by.singular_values;
  std::sort(out.singular_values.begin(), out.singular_values.end(), std::greater<>());
  if (center) {
    out.mean = Eigen::VectorXd(2 * n);
    *out.mean << *bx.mean, *by.mean;
  }
  return out;
}

double relative_error(const Eigen::Ref<const Eigen::MatrixXd>& truth, const Eigen::Ref<const Eigen::MatrixXd>& approx) {
  if (truth.rows() != approx.rows() || truth.cols() != approx.cols()) {
    throw std::invalid_argument("relative_error: sets differ in shape");
  }
  double sum = 0.0;
  int used = 0;
  for (Eigen::Index k = 0; k < truth.cols(); ++k) {
    const double norm = truth.col(k).norm();
    if (norm == 0.0) {
      spdlog::warn("relative_error: sample {} has zero norm and is excluded", k);
      continue;
    }
    sum += (truth.col(k) - approx.col(k)).norm() / norm;
    ++used;
  }
  return used ? sum / used : 0.0;
}

}  // namespace romfbk
