#include "romfbk/optim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace romfbk {

namespace {

struct Point1d {
  double a = 0.0;
  double f = 0.0;
  double d = 0.0;  // directional derivative
};

struct LineSearchOutcome {
  bool ok = false;
  double alpha = 0.0;
  double f = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd g;
};

// Minimizer of the cubic interpolating (a, fa, da) and (b, fb, db), clamped
// to the interior of [a, b]; falls back to bisection.
double cubic_step(const Point1d& lo, const Point1d& hi) {
  const double left = std::min(lo.a, hi.a);
  const double right = std::max(lo.a, hi.a);
  const double margin = 0.1 * (right - left);
  const double d1 = lo.d + hi.d - 3.0 * (lo.f - hi.f) / (lo.a - hi.a);
  const double disc = d1 * d1 - lo.d * hi.d;
  double t = 0.5 * (lo.a + hi.a);
  if (disc >= 0.0 && std::isfinite(disc)) {
    const double d2 = std::copysign(std::sqrt(disc), hi.a - lo.a);
    const double denom = hi.d - lo.d + 2.0 * d2;
    if (denom != 0.0) {
      const double cand = hi.a - (hi.a - lo.a) * (hi.d + d2 - d1) / denom;
      if (std::isfinite(cand)) t = cand;
    }
  }
  return std::clamp(t, left + margin, right - margin);
}

class StrongWolfe {
 public:
  StrongWolfe(const Objective& obj, const LbfgsOptions& opt, int& evals) : obj_(obj), opt_(opt), evals_(evals) {}

  LineSearchOutcome run(const Eigen::VectorXd& x, double f0, const Eigen::VectorXd& g0, const Eigen::VectorXd& dir,
                        double alpha0) {
    x0_ = &x;
    dir_ = &dir;
    f0_ = f0;
    d0_ = g0.dot(dir);
    budget_ = opt_.max_line_search;
    best_ = {};
    best_.f = f0;
    if (!(d0_ < 0.0)) return {};

    Point1d prev{0.0, f0, d0_};
    double a = alpha0;
    for (int i = 0; budget_ > 0; ++i) {
      Point1d cur = eval(a);
      if (!(cur.f <= f0_ + opt_.c1 * a * d0_) || (i > 0 && cur.f >= prev.f)) return zoom(prev, cur);
      if (std::abs(cur.d) <= -opt_.c2 * d0_) return accept_point(cur);
      if (cur.d >= 0.0) return zoom(cur, prev);
      prev = cur;
      a *= 2.0;
    }
    return fallback();
  }

 private:
  Point1d eval(double a) {
    --budget_;
    ++evals_;
    last_x_ = *x0_ + a * *dir_;
    last_g_.resize(last_x_.size());
    double f = obj_(last_x_, last_g_);
    if (!std::isfinite(f)) f = std::numeric_limits<double>::infinity();
    Point1d p{a, f, std::isfinite(f) ? last_g_.dot(*dir_) : 0.0};
    if (f < best_.f) {
      best_.f = f;
      best_.alpha = a;
      best_.x = last_x_;
      best_.g = last_g_;
      best_.ok = true;
    }
    return p;
  }

  LineSearchOutcome zoom(Point1d lo, Point1d hi) {
    while (budget_ > 0) {
      const double a = std::isfinite(hi.f) ? cubic_step(lo, hi) : 0.5 * (lo.a + hi.a);
      Point1d cur = eval(a);
      if (!(cur.f <= f0_ + opt_.c1 * a * d0_) || cur.f >= lo.f) {
        hi = cur;
      } else {
        if (std::abs(cur.d) <= -opt_.c2 * d0_) return accept_point(cur);
        if (cur.d * (hi.a - lo.a) >= 0.0) hi = lo;
        lo = cur;
      }
      if (std::abs(hi.a - lo.a) <= 1e-16 * std::max(1.0, std::abs(lo.a))) break;
    }
    return fallback();
  }

  LineSearchOutcome accept_point(const Point1d& p) {
    LineSearchOutcome out;
    out.ok = true;
    out.alpha = p.a;
    out.x = last_x_;
    out.g = last_g_;
    out.f = p.f;
    return out;
  }

  // Budget exhausted: accept the best point with sufficient decrease, if any.
  LineSearchOutcome fallback() {
    if (best_.ok && best_.f <= f0_ + opt_.c1 * best_.alpha * d0_) return best_;
    return {};
  }

  const Objective& obj_;
  const LbfgsOptions& opt_;
  int& evals_;
  const Eigen::VectorXd* x0_ = nullptr;
  const Eigen::VectorXd* dir_ = nullptr;
  double f0_ = 0.0;
  double d0_ = 0.0;
  int budget_ = 0;
  Eigen::VectorXd last_x_;
  Eigen::VectorXd last_g_;
  LineSearchOutcome best_;
};

}  // namespace

OptimResult minimize_lbfgs(const Objective& objective, Eigen::VectorXd x0, const LbfgsOptions& options) {
  OptimResult res;
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd g(x.size());
  double f = objective(x, g);
  res.evaluations = 1;
  res.history.push_back(f);

  std::deque<Eigen::VectorXd> s_hist;
  std::deque<Eigen::VectorXd> y_hist;
  std::deque<double> rho_hist;
  StrongWolfe ls(objective, options, res.evaluations);

  auto two_loop = [&](const Eigen::VectorXd& grad) {
    Eigen::VectorXd q = grad;
    const std::size_t m = s_hist.size();
    std::vector<double> alpha(m);
    for (std::size_t i = m; i-- > 0;) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (m > 0) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t i = 0; i < m; ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    return Eigen::VectorXd(-q);
  };

  bool restarted = false;
  while (true) {
    res.grad_inf_norm = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    if (res.grad_inf_norm < options.grad_tol) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      break;
    }
    if (res.iterations >= options.max_iters) {
      res.message = "iteration limit reached";
      break;
    }

    Eigen::VectorXd dir = two_loop(g);
    if (!(dir.dot(g) < 0.0)) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -g;
    }
    const double alpha0 = s_hist.empty() ? std::min(1.0, 1.0 / g.norm()) : 1.0;
    LineSearchOutcome step = ls.run(x, f, g, dir, alpha0);
    if (!step.ok) {
      if (restarted || s_hist.empty()) {
        // Steepest descent already tried from this point.
        res.line_search_failed = true;
        res.message = "line search failed";
        break;
      }
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      restarted = true;
      continue;
    }
    restarted = false;

    Eigen::VectorXd s = step.x - x;
    Eigen::VectorXd yv = step.g - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * yv.squaredNorm() && sy > 0.0) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yv));
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > options.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }
    const double f_old = f;
    x = std::move(step.x);
    g = std::move(step.g);
    f = step.f;
    ++res.iterations;
    res.history.push_back(f);
    if (options.f_rel_tol > 0.0 && f_old - f <= options.f_rel_tol * std::max(std::abs(f), 1.0)) {
      res.grad_inf_norm = g.cwiseAbs().maxCoeff();
      res.converged = true;
      res.message = "relative decrease below tolerance";
      break;
    }
  }
  res.x = std::move(x);
  res.value = f;
  return res;
}

OptimResult minimize_adam(const Objective& objective, Eigen::VectorXd x0, const AdamOptions& options) {
  OptimResult res;
  Eigen::VectorXd x = std::move(x0);
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd m = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(x.size());
  double best_f = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_x = x;
  double best_gnorm = 0.0;
  double b1t = 1.0;
  double b2t = 1.0;
  for (int it = 0;; ++it) {
    const double f = objective(x, g);
    ++res.evaluations;
    res.history.push_back(f);
    const double gnorm = g.size() ? g.cwiseAbs().maxCoeff() : 0.0;
    if (f < best_f) {
      best_f = f;
      best_x = x;
      best_gnorm = gnorm;
    }
    if (gnorm <= options.grad_tol) {
      res.converged = true;
      res.message = "gradient tolerance reached";
      break;
    }
    if (it >= options.max_iters) {
      res.message = "iteration limit reached";
      break;
    }
    b1t *= options.beta1;
    b2t *= options.beta2;
    m = options.beta1 * m + (1.0 - options.beta1) * g;
    v = options.beta2 * v + (1.0 - options.beta2) * g.cwiseProduct(g);
    const double lr = options.learning_rate * std::sqrt(1.0 - b2t) / (1.0 - b1t);
    x.array() -= lr * m.array() / (v.array().sqrt() + options.epsilon);
    res.iterations = it + 1;
  }
  res.x = std::move(best_x);
  res.value = best_f;
  res.grad_inf_norm = best_gnorm;
  return res;
}

}  // namespace romfbk
