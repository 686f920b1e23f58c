#pragma once

#include "common.hpp"

#include <functional>

namespace uavslice {

// Small dense log-barrier solver for
//   minimize f(x)  s.t.  a_k^T x <= b_k,  ||x[i:i+2] - c||^2 <= r^2
// Newton centering with backtracking; the objective Hessian comes from the
// caller or from central differences of the gradient.

struct LinearCon {
  Vec a;
  double b;
};

struct BallCon {
  int i0;  // first of two coordinates
  Vec2 c;
  double r2;
};

struct BarrierProblem {
  int n = 0;
  std::function<double(const Vec&, Vec*)> f;
  std::function<void(const Vec&, Mat&)> hess;  // optional
  std::vector<LinearCon> lin;
  std::vector<BallCon> balls;

  int m() const { return static_cast<int>(lin.size() + balls.size()); }
};

struct BarrierOptions {
  double gap_tol = 1e-8;
  double mu = 20.0;
  double t0 = 1.0;
  int max_newton = 200;
  int max_outer = 60;
  double fd_step = 1e-5;
};

struct BarrierResult {
  Vec x;
  double f = 0.0;
  double kkt_residual = 0.0;
  int newton_steps = 0;
  bool ok = false;
};

namespace detail {

inline double con_value(const BarrierProblem& p, int k, const Vec& x) {
  const int nl = static_cast<int>(p.lin.size());
  if (k < nl) return p.lin[k].a.dot(x) - p.lin[k].b;
  const auto& b = p.balls[k - nl];
  return (x.segment<2>(b.i0) - b.c).squaredNorm() - b.r2;
}

inline void con_grad(const BarrierProblem& p, int k, const Vec& x, Vec& g) {
  const int nl = static_cast<int>(p.lin.size());
  if (k < nl) {
    g = p.lin[k].a;
    return;
  }
  const auto& b = p.balls[k - nl];
  g = Vec::Zero(x.size());
  g.segment<2>(b.i0) = 2.0 * (x.segment<2>(b.i0) - b.c);
}

inline bool strictly_feasible(const BarrierProblem& p, const Vec& x, double margin = 0.0) {
  for (int k = 0; k < p.m(); ++k)
    if (!(con_value(p, k, x) < -margin)) return false;
  return true;
}

inline void objective_hessian(const BarrierProblem& p, const Vec& x, Mat& H, double h) {
  if (p.hess) {
    p.hess(x, H);
    return;
  }
  const int n = static_cast<int>(x.size());
  H.resize(n, n);
  Vec gp(n), gm(n);
  for (int i = 0; i < n; ++i) {
    Vec xp = x, xm = x;
    const double s = h * std::max(1.0, std::abs(x[i]));
    xp[i] += s;
    xm[i] -= s;
    p.f(xp, &gp);
    p.f(xm, &gm);
    H.col(i) = (gp - gm) / (2.0 * s);
  }
  H = 0.5 * (H + H.transpose()).eval();
}

}  // namespace detail

// phi_t(x) = t f(x) - sum log(-g_k(x))
inline BarrierResult barrier_minimize(const BarrierProblem& p, Vec x, const BarrierOptions& o) {
  BarrierResult res;
  const int n = p.n, m = p.m();
  if (!detail::strictly_feasible(p, x)) return res;
  double t = o.t0;
  Vec gf(n), gk(n), grad(n);
  Mat Hf, H;
  auto phi = [&](const Vec& y, double tt, bool& inside) {
    inside = true;
    double v = tt * p.f(y, nullptr);
    for (int k = 0; k < m; ++k) {
      const double g = detail::con_value(p, k, y);
      if (!(g < 0.0)) {
        inside = false;
        return std::numeric_limits<double>::infinity();
      }
      v -= std::log(-g);
    }
    return v;
  };
  for (int outer = 0; outer < o.max_outer; ++outer) {
    for (int it = 0; it < o.max_newton; ++it) {
      p.f(x, &gf);
      detail::objective_hessian(p, x, Hf, o.fd_step);
      grad = t * gf;
      H = t * Hf;
      for (int k = 0; k < m; ++k) {
        const double g = detail::con_value(p, k, x);
        detail::con_grad(p, k, x, gk);
        grad -= gk / g;
        H += gk * gk.transpose() / (g * g);
        const int nl = static_cast<int>(p.lin.size());
        if (k >= nl) {
          const int i0 = p.balls[k - nl].i0;
          H(i0, i0) -= 2.0 / g;
          H(i0 + 1, i0 + 1) -= 2.0 / g;
        }
      }
      // make the Newton system positive definite if the objective is not
      // locally convex
      Vec dx;
      double reg = 0.0;
      for (int tries = 0; tries < 60; ++tries) {
        Mat Hr = H;
        if (reg > 0.0) Hr.diagonal().array() += reg;
        Eigen::LLT<Mat> llt(Hr);
        if (llt.info() == Eigen::Success) {
          dx = -llt.solve(grad);
          if (dx.allFinite()) break;
        }
        reg = reg == 0.0 ? 1e-10 * std::max(1.0, H.diagonal().cwiseAbs().maxCoeff()) : reg * 10.0;
      }
      if (dx.size() != n) break;
      const double dec2 = -grad.dot(dx);
      ++res.newton_steps;
      if (dec2 * 0.5 <= 1e-12) break;
      bool inside;
      const double phi0 = phi(x, t, inside);
      double s = 1.0;
      Vec xn;
      bool moved = false;
      for (int ls = 0; ls < 80; ++ls) {
        xn = x + s * dx;
        const double v = phi(xn, t, inside);
        if (inside && v <= phi0 - 0.25 * s * dec2) {
          moved = true;
          break;
        }
        s *= 0.5;
      }
      if (!moved) break;
      x = xn;
    }
    if (m == 0 || static_cast<double>(m) / t < o.gap_tol) break;
    t *= o.mu;
  }
  res.x = x;
  res.f = p.f(x, &gf);
  // dual estimates from the central path
  Vec st = gf;
  for (int k = 0; k < m; ++k) {
    const double g = detail::con_value(p, k, x);
    detail::con_grad(p, k, x, gk);
    st += (1.0 / (-t * g)) * gk;
  }
  const double scale = std::max(1.0, gf.cwiseAbs().maxCoeff());
  res.kkt_residual = std::max(st.cwiseAbs().maxCoeff() / scale, m > 0 ? m / t : 0.0);
  res.ok = res.x.allFinite();
  return res;
}

// Finds a strictly feasible point. Ball coordinates are first pulled inside
// their balls; then the largest linear violation s is minimized with the
// balls kept as hard constraints.
inline bool phase_one(const BarrierProblem& p, Vec& x, double margin = 1e-9) {
  if (detail::strictly_feasible(p, x, margin)) return true;
  for (const auto& b : p.balls) {
    const Vec2 d = x.segment<2>(b.i0) - b.c;
    const double r = std::sqrt(b.r2);
    if (d.norm() >= 0.999 * r) x.segment<2>(b.i0) = b.c + d * (0.999 * r / std::max(d.norm(), 1e-300));
  }
  if (detail::strictly_feasible(p, x, margin)) return true;
  const int n = p.n;
  BarrierProblem q;
  q.n = n + 1;
  q.f = [n](const Vec& y, Vec* g) {
    if (g) {
      g->setZero(n + 1);
      (*g)[n] = 1.0;
    }
    return y[n];
  };
  q.hess = [n](const Vec&, Mat& H) { H.setZero(n + 1, n + 1); };
  double smax = 0.0;
  for (const auto& l : p.lin) {
    Vec a(n + 1);
    a << l.a, -1.0;
    q.lin.push_back({a, l.b});
    smax = std::max(smax, l.a.dot(x) - l.b);
  }
  Vec lo = Vec::Zero(n + 1);
  lo[n] = -1.0;
  q.lin.push_back({lo, 1.0});  // s >= -1 keeps the problem bounded
  q.balls = p.balls;
  Vec y(n + 1);
  y << x, smax + 1.0;
  if (!detail::strictly_feasible(q, y)) return false;
  BarrierOptions o;
  o.gap_tol = 1e-10;
  auto r = barrier_minimize(q, y, o);
  if (!r.ok) return false;
  x = r.x.head(n);
  return detail::strictly_feasible(p, x, margin);
}

}  // namespace uavslice
