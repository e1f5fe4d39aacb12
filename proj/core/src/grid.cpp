#include "romfbk/grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace romfbk {

Grid::Grid(int nx) : nx_(nx), h_(2.0 / nx) {
  if (nx < 8 || nx % 2 != 0) {
    throw std::invalid_argument("grid: nx must be even and >= 8, got " + std::to_string(nx));
  }
}

std::vector<Point> Grid::cell_centers() const {
  std::vector<Point> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (int k = 0; k < size(); ++k) out.push_back(center(k));
  return out;
}

int Grid::boundary_faces(int k) const noexcept {
  const int i = k % nx_;
  const int j = k / nx_;
  return (i == 0) + (i == nx_ - 1) + (j == 0) + (j == nx_ - 1);
}

Grid build_grid(int nx) { return Grid(nx); }

StateField::StateField(const Grid& g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw std::invalid_argument("state: length does not match grid");
}

StateField StateField::zeros(const Grid& g) { return {g, Eigen::VectorXd::Zero(g.size())}; }

ControlField::ControlField(const Grid& g, Eigen::VectorXd x, Eigen::VectorXd y)
    : grid(g), ux(std::move(x)), uy(std::move(y)) {
  if (ux.size() != grid.size() || uy.size() != grid.size()) {
    throw std::invalid_argument("control: component length does not match grid");
  }
}

ControlField ControlField::zeros(const Grid& g) {
  return {g, Eigen::VectorXd::Zero(g.size()), Eigen::VectorXd::Zero(g.size())};
}

Eigen::VectorXd ControlField::stacked() const {
  Eigen::VectorXd out(2 * ux.size());
  out << ux, uy;
  return out;
}

ControlField ControlField::from_stacked(const Grid& g, const Eigen::Ref<const Eigen::VectorXd>& v) {
  const int n = g.size();
  if (v.size() != 2 * n) throw std::invalid_argument("control: stacked length must be 2N");
  return {g, v.head(n), v.tail(n)};
}

ControlField ControlField::operator+(const ControlField& other) const {
  if (!(grid == other.grid)) throw std::invalid_argument("control: grid mismatch");
  return {grid, ux + other.ux, uy + other.uy};
}

Eigen::VectorXd Scenario::mu() const {
  Eigen::VectorXd m(dim());
  m(0) = target.x1;
  m(1) = target.x2;
  if (flow) {
    m(2) = flow->gamma;
    m(3) = flow->alpha;
  }
  return m;
}

Scenario Scenario::from_mu(const Eigen::Ref<const Eigen::VectorXd>& mu) {
  Scenario s;
  if (mu.size() == 2) {
    s.target = {mu(0), mu(1)};
  } else if (mu.size() == 4) {
    s.target = {mu(0), mu(1)};
    s.flow = FlowParams{mu(2), mu(3)};
  } else {
    throw std::invalid_argument("scenario: parameter vector must have 2 or 4 entries");
  }
  return s;
}

bool ParameterBox::contains(const Eigen::Ref<const Eigen::VectorXd>& mu) const {
  if (mu.size() != lo.size()) return false;
  return ((mu.array() >= lo.array()) && (mu.array() <= hi.array())).all();
}

ParameterBox default_target_box() {
  return {Eigen::Vector2d(0.0, -0.5), Eigen::Vector2d(0.5, 0.5)};
}

ParameterBox default_initial_box() {
  return {Eigen::Vector2d(-0.5, -0.5), Eigen::Vector2d(0.0, 0.5)};
}

double total_mass(const StateField& y) {
  const double h = y.grid.h();
  return y.values.sum() * h * h;
}

StateField gaussian_density(const Grid& grid, Point center, double variance) {
  if (!(std::abs(center.x1) < 1.0 && std::abs(center.x2) < 1.0)) {
    throw std::invalid_argument("gaussian_density: center outside (-1,1)^2");
  }
  if (!(variance > 0.0)) throw std::invalid_argument("gaussian_density: variance must be positive");
  const double a = 1.0 / (2.0 * variance);
  const double peak = a / std::numbers::pi;
  Eigen::VectorXd v(grid.size());
  for (int k = 0; k < grid.size(); ++k) {
    const Point p = grid.center(k);
    const double d1 = p.x1 - center.x1;
    const double d2 = p.x2 - center.x2;
    v(k) = peak * std::exp(-a * d1 * d1 - a * d2 * d2);
  }
  return {grid, std::move(v)};
}

ControlField background_flow(const Grid& grid, double gamma, double alpha) {
  if (gamma < 0.0) throw std::invalid_argument("background_flow: gamma must be >= 0");
  auto out = ControlField::zeros(grid);
  if (gamma == 0.0) return out;
  const double sx = gamma * std::sin(alpha);
  const double sy = gamma * std::cos(alpha);
  for (int k = 0; k < grid.size(); ++k) {
    const double x1 = grid.center(k).x1;
    out.ux(k) = (x1 + 1.0) * (1.0 - x1) * sx;
    out.uy(k) = sy;
  }
  return out;
}

ControlField background_flow(const Grid& grid, const Scenario& scenario) {
  if (!scenario.flow) return ControlField::zeros(grid);
  return background_flow(grid, scenario.flow->gamma, scenario.flow->alpha);
}

double l2_norm(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& v) {
  return std::sqrt(mirror_symmetric_dot(grid, v, v)) * grid.h();
}

double mirror_symmetric_dot(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& a,
                            const Eigen::Ref<const Eigen::VectorXd>& b) {
  const int nx = grid.nx();
  double s = 0.0;
  for (int j = 0; j < nx / 2; ++j) {
    const int lo = j * nx;
    const int hi = (nx - 1 - j) * nx;
    for (int i = 0; i < nx; ++i) {
      s += a(lo + i) * b(lo + i) + a(hi + i) * b(hi + i);
    }
  }
  return s;
}

Eigen::VectorXd mirror_values(const Grid& grid, const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::VectorXd out(v.size());
  for (int k = 0; k < grid.size(); ++k) out(grid.mirror_index(k)) = v(k);
  return out;
}

StateField mirror(const StateField& y) { return {y.grid, mirror_values(y.grid, y.values)}; }

ControlField mirror(const ControlField& u) {
  return {u.grid, mirror_values(u.grid, u.ux), -mirror_values(u.grid, u.uy)};
}

Point mirror(Point p) { return {p.x1, -p.x2}; }

Scenario mirror(const Scenario& s) {
  Scenario out = s;
  out.target = mirror(s.target);
  if (s.flow) out.flow->alpha = std::numbers::pi - s.flow->alpha;
  return out;
}

}  // namespace romfbk
