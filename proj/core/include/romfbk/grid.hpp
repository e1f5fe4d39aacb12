#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

namespace romfbk {

struct Point {
  double x1 = 0.0;
  double x2 = 0.0;
};

/// Uniform cell-centered grid on (-1,1)^2. Cell k = j*nx + i sits at
/// (-1 + (i+0.5)h, -1 + (j+0.5)h).
class Grid {
 public:
  Grid() = default;
  explicit Grid(int nx);

  int nx() const noexcept { return nx_; }
  int size() const noexcept { return nx_ * nx_; }
  double h() const noexcept { return h_; }

  int index(int i, int j) const noexcept { return j * nx_ + i; }
  /// Index of the cell mirrored about x2 = 0.
  int mirror_index(int k) const noexcept {
    const int i = k % nx_;
    const int j = k / nx_;
    return index(i, nx_ - 1 - j);
  }

  /// Cell-center coordinate along one axis. Written as (i + 0.5 - nx/2) h so
  /// that mirrored cells get exactly negated coordinates.
  double coordinate(int i) const noexcept { return (i + 0.5 - 0.5 * nx_) * h_; }
  Point center(int k) const noexcept { return {coordinate(k % nx_), coordinate(k / nx_)}; }
  std::vector<Point> cell_centers() const;

  /// Number of faces of cell k lying on the domain boundary (0, 1 or 2).
  int boundary_faces(int k) const noexcept;

  friend bool operator==(const Grid& a, const Grid& b) noexcept { return a.nx_ == b.nx_; }

 private:
  int nx_ = 0;
  double h_ = 0.0;
};

/// Rejects nx < 8 and odd nx.
Grid build_grid(int nx);

/// Cell-averaged density, mass per unit area.
struct StateField {
  Grid grid;
  Eigen::VectorXd values;

  StateField() = default;
  StateField(const Grid& g, Eigen::VectorXd v);
  static StateField zeros(const Grid& g);
};

/// Velocity field collocated with the state (two components per cell).
struct ControlField {
  Grid grid;
  Eigen::VectorXd ux;
  Eigen::VectorXd uy;

  ControlField() = default;
  ControlField(const Grid& g, Eigen::VectorXd x, Eigen::VectorXd y);
  static ControlField zeros(const Grid& g);

  /// [ux; uy], length 2N.
  Eigen::VectorXd stacked() const;
  static ControlField from_stacked(const Grid& g, const Eigen::Ref<const Eigen::VectorXd>& v);

  ControlField operator+(const ControlField& other) const;
};

/// Inflow datum of the analytic background flow.
struct FlowParams {
  double gamma = 0.0;  ///< intensity
  double alpha = 0.0;  ///< angle of attack, radians
};

/// Scenario parameters: target center, optionally (gamma, alpha) of the flow.
struct Scenario {
  Point target;
  std::optional<FlowParams> flow;

  /// (mu1, mu2) or (mu1, mu2, gamma, alpha).
  Eigen::VectorXd mu() const;
  static Scenario from_mu(const Eigen::Ref<const Eigen::VectorXd>& mu);
  int dim() const noexcept { return flow ? 4 : 2; }
};

/// Axis-aligned box in parameter space.
struct ParameterBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  int dim() const noexcept { return static_cast<int>(lo.size()); }
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& mu) const;
};

/// Default sampling boxes for initial and target centers.
ParameterBox default_target_box();
ParameterBox default_initial_box();

double total_mass(const StateField& y);

/// 1/(2 pi var) exp(-|x - c|^2 / (2 var)) sampled at cell centers.
StateField gaussian_density(const Grid& grid, Point center, double variance = 0.05);

/// v(x) = ((x1+1)(1-x1) gamma sin(alpha), gamma cos(alpha)).
ControlField background_flow(const Grid& grid, double gamma, double alpha);
ControlField background_flow(const Grid& grid, const Scenario& scenario);

/// Discrete L2(Omega) norm, sqrt(sum v^2 h^2).
double l2_norm(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& v);

/// Sum of a[k]*b[k] accumulated over mirror pairs (j, nx-1-j) so that the
/// result is bitwise invariant under mirroring both arguments about x2 = 0.
double mirror_symmetric_dot(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& a,
                            const Eigen::Ref<const Eigen::VectorXd>& b);

/// Mirror about x2 = 0.
Eigen::VectorXd mirror_values(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& v);
StateField mirror(const StateField& y);
/// Mirrors positions and negates the x2 component.
ControlField mirror(const ControlField& u);
Scenario mirror(const Scenario& s);
Point mirror(Point p);

}  // namespace romfbk
