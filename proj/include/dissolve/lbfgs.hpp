#ifndef DISSOLVE_LBFGS_HPP
#define DISSOLVE_LBFGS_HPP

#include "dissolve/types.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

namespace dissolve {

struct LbfgsOptions {
  int max_iter = 500;
  double grad_tol = 1e-6;  // on the infinity norm of the gradient
  int history_size = 10;
  double c1 = 1e-4;  // sufficient decrease
  double c2 = 0.9;   // curvature
  int max_linesearch = 40;
};

enum class LbfgsStop { GradientTolerance, MaxIterations, LineSearchFailed };

struct LbfgsResult {
  double initial_value = 0.0;
  double value = 0.0;
  int iterations = 0;
  int evaluations = 0;
  LbfgsStop stop = LbfgsStop::MaxIterations;

  bool converged() const { return stop == LbfgsStop::GradientTolerance; }
};

namespace detail {

template <typename Scalar>
struct LinePoint {
  Scalar step = 0;
  Scalar value = 0;
  Scalar slope = 0;  // directional derivative g . d
  VectorX<Scalar> x;
  VectorX<Scalar> grad;
};

// Minimizer of the cubic through (a, fa, da) and (b, fb, db); NaN when the
// cubic has no real minimizer.
template <typename Scalar>
Scalar cubic_minimizer(Scalar a, Scalar fa, Scalar da, Scalar b, Scalar fb, Scalar db) {
  const Scalar d1 = da + db - Scalar(3) * (fa - fb) / (a - b);
  const Scalar disc = d1 * d1 - da * db;
  if (!(disc >= Scalar(0))) return std::numeric_limits<Scalar>::quiet_NaN();
  const Scalar d2 = (b > a ? Scalar(1) : Scalar(-1)) * std::sqrt(disc);
  const Scalar denom = db - da + Scalar(2) * d2;
  if (denom == Scalar(0)) return std::numeric_limits<Scalar>::quiet_NaN();
  return b - (b - a) * (db + d2 - d1) / denom;
}

}  // namespace detail

/// Limited-memory BFGS with a strong-Wolfe line search (bracketing phase plus
/// cubic-interpolation zoom). `fg(x, grad)` returns the objective at x and
/// writes its gradient. Accepted steps always satisfy sufficient decrease, so
/// the objective never increases. Throws NonFiniteLoss if the starting point
/// evaluates to a non-finite objective.
template <typename Scalar, typename Objective>
LbfgsResult lbfgs_minimize(Objective&& fg, VectorX<Scalar>& x, const LbfgsOptions& opt) {
  using Vec = VectorX<Scalar>;
  using Point = detail::LinePoint<Scalar>;

  LbfgsResult result;
  Vec grad(x.size());
  Scalar value = fg(x, grad);
  ++result.evaluations;
  if (!std::isfinite(static_cast<double>(value)) || !grad.allFinite()) {
    throw NonFiniteLoss("objective is not finite at the starting point");
  }
  result.initial_value = static_cast<double>(value);
  result.value = result.initial_value;

  std::deque<Vec> s_hist;
  std::deque<Vec> y_hist;
  std::deque<Scalar> rho_hist;

  auto evaluate = [&](const Vec& origin, const Vec& dir, Scalar step) {
    Point p;
    p.step = step;
    p.x = origin + step * dir;
    p.grad.resize(origin.size());
    p.value = fg(p.x, p.grad);
    ++result.evaluations;
    if (!std::isfinite(static_cast<double>(p.value)) || !p.grad.allFinite()) {
      p.value = std::numeric_limits<Scalar>::infinity();
      p.slope = std::numeric_limits<Scalar>::quiet_NaN();
    } else {
      p.slope = p.grad.dot(dir);
    }
    return p;
  };

  // Returns false when no step with sufficient decrease was found.
  auto line_search = [&](const Vec& dir, Scalar step0, Point& accepted) {
    Point origin;
    origin.step = 0;
    origin.value = value;
    origin.slope = grad.dot(dir);
    origin.x = x;
    origin.grad = grad;
    const Scalar f0 = value;
    const Scalar d0 = origin.slope;
    auto armijo_ok = [&](const Point& p) { return p.value <= f0 + Scalar(opt.c1) * p.step * d0; };
    auto curvature_ok = [&](const Point& p) { return std::abs(p.slope) <= -Scalar(opt.c2) * d0; };

    auto zoom = [&](Point lo, Point hi, int budget) {
      for (int j = 0; j < budget; ++j) {
        const Scalar a = lo.step, b = hi.step;
        const Scalar width = std::abs(b - a);
        Scalar trial = std::numeric_limits<Scalar>::quiet_NaN();
        if (std::isfinite(static_cast<double>(hi.value)) &&
            std::isfinite(static_cast<double>(hi.slope))) {
          trial = detail::cubic_minimizer(a, lo.value, lo.slope, b, hi.value, hi.slope);
        }
        const Scalar left = std::min(a, b) + Scalar(0.1) * width;
        const Scalar right = std::max(a, b) - Scalar(0.1) * width;
        if (!std::isfinite(static_cast<double>(trial)) || trial < left || trial > right) {
          trial = (a + b) / Scalar(2);
        }
        if (width <= std::numeric_limits<Scalar>::epsilon() * std::max(Scalar(1), std::abs(a))) {
          break;
        }
        Point p = evaluate(x, dir, trial);
        if (!armijo_ok(p) || p.value >= lo.value) {
          hi = std::move(p);
        } else {
          if (curvature_ok(p)) {
            accepted = std::move(p);
            return true;
          }
          if (p.slope * (hi.step - lo.step) >= Scalar(0)) hi = lo;
          lo = std::move(p);
        }
      }
      // Budget exhausted: the low end still satisfies sufficient decrease.
      if (lo.step > Scalar(0) && lo.value < f0) {
        accepted = std::move(lo);
        return true;
      }
      return false;
    };

    Point prev = origin;
    Scalar step = step0;
    for (int i = 0; i < opt.max_linesearch; ++i) {
      Point p = evaluate(x, dir, step);
      if (!armijo_ok(p) || (i > 0 && p.value >= prev.value)) {
        return zoom(std::move(prev), std::move(p), opt.max_linesearch - i);
      }
      if (curvature_ok(p)) {
        accepted = std::move(p);
        return true;
      }
      if (p.slope >= Scalar(0)) return zoom(std::move(p), std::move(prev), opt.max_linesearch - i);
      prev = std::move(p);
      step *= Scalar(2);
    }
    if (prev.step > Scalar(0) && prev.value < f0) {
      accepted = std::move(prev);
      return true;
    }
    return false;
  };

  auto grad_small = [&]() { return grad.template lpNorm<Eigen::Infinity>() <= Scalar(opt.grad_tol); };

  if (grad_small()) {
    result.stop = LbfgsStop::GradientTolerance;
    return result;
  }

  for (int iter = 0; iter < opt.max_iter; ++iter) {
    // Two-loop recursion for d = -H g.
    Vec dir = -grad;
    const auto m = static_cast<int>(s_hist.size());
    std::vector<Scalar> alpha(static_cast<std::size_t>(m));
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(dir);
      dir -= alpha[i] * y_hist[i];
    }
    if (m > 0) dir *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (int i = 0; i < m; ++i) {
      const Scalar beta = rho_hist[i] * y_hist[i].dot(dir);
      dir += (alpha[i] - beta) * s_hist[i];
    }

    bool steepest = (m == 0);
    if (!(grad.dot(dir) < Scalar(0))) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -grad;
      steepest = true;
    }

    Scalar step0 = steepest ? std::min(Scalar(1), Scalar(1) / grad.norm()) : Scalar(1);
    Point next;
    bool ok = line_search(dir, step0, next);
    if (!ok && !steepest) {
      // Retry once from a fresh steepest-descent direction.
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -grad;
      step0 = std::min(Scalar(1), Scalar(1) / grad.norm());
      ok = line_search(dir, step0, next);
    }
    if (!ok) {
      result.stop = LbfgsStop::LineSearchFailed;
      return result;
    }

    Vec s = next.x - x;
    Vec y = next.grad - grad;
    const Scalar sy = s.dot(y);
    x = std::move(next.x);
    grad = std::move(next.grad);
    value = next.value;
    result.value = static_cast<double>(value);
    result.iterations = iter + 1;

    if (sy > std::numeric_limits<Scalar>::epsilon() * y.squaredNorm()) {
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(y));
      rho_hist.push_back(Scalar(1) / sy);
      if (static_cast<int>(s_hist.size()) > opt.history_size) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    if (grad_small()) {
      result.stop = LbfgsStop::GradientTolerance;
      return result;
    }
  }
  result.stop = LbfgsStop::MaxIterations;
  return result;
}

}  // namespace dissolve

#endif  // DISSOLVE_LBFGS_HPP
