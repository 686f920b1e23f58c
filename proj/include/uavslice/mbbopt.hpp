#pragma once

#include "common.hpp"
#include "convex.hpp"
#include "matching.hpp"

#include <string>

namespace uavslice {

// Controller view of one slot: predicted user positions, estimated channel
// coefficients and the queue-derived weights.
struct MbbInstance {
  std::vector<Vec2> users;
  Vec user_h;            // user antenna heights, m
  double uav_alt = 50.0;
  Mat theta;             // users x UAVs, estimated coefficients
  double n0 = 0.0;       // W/Hz
  double w_e = 0.0;      // Hz
  Vec weight;            // [Q]^+ + [Z]^+ per user (fallback applied by caller)
  Vec power_cost;        // V rho + [H_j]^+ per UAV

  int n_users() const { return static_cast<int>(users.size()); }
  int n_uavs() const { return static_cast<int>(theta.cols()); }
  double dg2(int i) const {
    const double d = uav_alt - user_h[i];
    return d * d;
  }
};

struct MbbCaps {
  std::vector<Vec2> prev_pos;  // movement-ball centers X(t-1)
  double e_max = 50.0;
  double d_min = 5.0;
  double p_max = 1.63;  // p_hat - p_c, W
  Area area;
  bool move = true;
  int r_max = 1000;
  double rel_tol = 1e-5;
  double gap_tol = 1e-9;
};

struct SlotDecision {
  AcceptMatrix accept;
  std::vector<Vec2> uav_pos;
  Vec powers;
  double w_u = 0.0;
  double w_e = 0.0;
  Vec gamma;
  Vec eta;
  Mat b_slack;
  std::vector<double> merit_trace;
  int iterations = 0;
  int solver_fallbacks = 0;
};

inline Mat gain_matrix(const MbbInstance& in, const std::vector<Vec2>& X) {
  Mat h(in.n_users(), in.n_uavs());
  for (int i = 0; i < in.n_users(); ++i)
    for (int k = 0; k < in.n_uavs(); ++k)
      h(i, k) = in.theta(i, k) / (in.dg2(i) + (X[k] - in.users[i]).squaredNorm());
  return h;
}

inline double sinr(int i, int j, const Vec& p, const Mat& h, double n0, double w_e) {
  double interf = n0 * w_e;
  for (Eigen::Index k = 0; k < h.cols(); ++k)
    if (k != j) interf += p[k] * h(i, k);
  return p[j] * h(i, j) / interf;
}

inline double user_rate(int i, const AcceptMatrix& a, const Vec& p, const Mat& h, double n0,
                        double w_e) {
  double r = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    if (a(i, j)) r += units::rate_mbps(w_e, sinr(i, static_cast<int>(j), p, h, n0, w_e));
  return r;
}

inline Vec all_rates(const AcceptMatrix& a, const Vec& p, const Mat& h, double n0, double w_e) {
  Vec u(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) u[i] = user_rate(static_cast<int>(i), a, p, h, n0, w_e);
  return u;
}

// Gamma = sum_j (V rho + [H_j]^+) p_j - sum_i w_i u_i, estimated gains
inline double merit(const MbbInstance& in, const AcceptMatrix& a, const std::vector<Vec2>& X,
                    const Vec& p) {
  const Mat h = gain_matrix(in, X);
  return in.power_cost.dot(p) - in.weight.dot(all_rates(a, p, h, in.n0, in.w_e));
}

inline Mat matching_weights(const MbbInstance& in, const std::vector<Vec2>& X, const Vec& p) {
  const Mat h = gain_matrix(in, X);
  Mat c(in.n_users(), in.n_uavs());
  for (int i = 0; i < in.n_users(); ++i)
    for (int j = 0; j < in.n_uavs(); ++j)
      c(i, j) = in.weight[i] * units::rate_mbps(in.w_e, sinr(i, j, p, h, in.n0, in.w_e));
  return c;
}

inline int serving_uav(const AcceptMatrix& a, int i) {
  for (Eigen::Index j = 0; j < a.cols(); ++j)
    if (a(i, j)) return static_cast<int>(j);
  return -1;
}

// ---------------------------------------------------------------------------
// Location subproblem

struct ScaLinearization {
  std::vector<Vec2> anchor_pos;
  Vec anchor_pow;
  Vec D;  // per user, log2 of total received power plus noise at the anchor
  Mat E;  // users x UAVs
  Mat F;  // users x UAVs, log2 of interference plus noise at the power anchor
  Mat G;  // users x UAVs
  Mat d2;  // squared horizontal distances at the anchor
};

inline ScaLinearization linearize_location(const MbbInstance& in, const std::vector<Vec2>& Xr,
                                           const Vec& p) {
  ScaLinearization L;
  L.anchor_pos = Xr;
  L.anchor_pow = p;
  const int N = in.n_users(), J = in.n_uavs();
  L.D.resize(N);
  L.E.resize(N, J);
  L.d2.resize(N, J);
  const double nw = in.n0 * in.w_e;
  for (int i = 0; i < N; ++i) {
    double s = nw;
    for (int k = 0; k < J; ++k) {
      L.d2(i, k) = (Xr[k] - in.users[i]).squaredNorm();
      s += p[k] * in.theta(i, k) / (in.dg2(i) + L.d2(i, k));
    }
    L.D[i] = std::log2(s);
    for (int k = 0; k < J; ++k) {
      const double a = in.dg2(i) + L.d2(i, k);
      L.E(i, k) = p[k] * in.theta(i, k) / (a * a * s * M_LN2);
    }
  }
  return L;
}

// linear minorant of ||v_k - x_i||^2 around the anchor
inline double b_minorant(const ScaLinearization& L, const MbbInstance& in, int i, int k,
                         const Vec2& vk) {
  const Vec2 c = L.anchor_pos[k] - in.users[i];
  return -L.d2(i, k) + 2.0 * c.dot(vk - in.users[i]);
}

// minorant of user i's rate (Mbps) when served by j, as a function of X
inline double location_minorant(const ScaLinearization& L, const MbbInstance& in, int i, int j,
                                const std::vector<Vec2>& X, Vec2* grad = nullptr) {
  const int J = in.n_uavs();
  const Vec& p = L.anchor_pow;
  double f = L.D[i];
  for (int k = 0; k < J; ++k) {
    const double dk = (X[k] - in.users[i]).squaredNorm();
    f -= L.E(i, k) * (dk - L.d2(i, k));
    if (grad) grad[k] = -2.0 * L.E(i, k) * (X[k] - in.users[i]);
  }
  double interf = in.n0 * in.w_e;
  std::vector<double> term(J, 0.0);
  for (int k = 0; k < J; ++k) {
    if (k == j) continue;
    const double b = std::max(b_minorant(L, in, i, k, X[k]), 0.0);
    const double a = in.dg2(i) + b;
    interf += p[k] * in.theta(i, k) / a;
    term[k] = p[k] * in.theta(i, k) / (a * a);
  }
  f -= std::log2(interf);
  if (grad) {
    for (int k = 0; k < J; ++k) {
      if (k == j || b_minorant(L, in, i, k, X[k]) <= 0.0) continue;
      const Vec2 c = L.anchor_pos[k] - in.users[i];
      grad[k] += (term[k] / (interf * M_LN2)) * 2.0 * c;
    }
  }
  const double w = in.w_e * units::mbps_per_bps;
  if (grad)
    for (int k = 0; k < J; ++k) grad[k] *= w;
  return w * f;
}

// true rate of user i served by j (Mbps) as a function of X
inline double location_true_rate(const MbbInstance& in, const Vec& p, int i, int j,
                                 const std::vector<Vec2>& X) {
  double s = in.n0 * in.w_e, interf = s;
  for (int k = 0; k < in.n_uavs(); ++k) {
    const double h = in.theta(i, k) / (in.dg2(i) + (X[k] - in.users[i]).squaredNorm());
    s += p[k] * h;
    if (k != j) interf += p[k] * h;
  }
  return in.w_e * units::mbps_per_bps * (std::log2(s) - std::log2(interf));
}

// Power minorant coefficients at anchor P^(r) with positions fixed. F is
// kept for every candidate serving UAV; G uses the actual serving UAV.
inline void linearize_power(ScaLinearization& L, const MbbInstance& in, const AcceptMatrix& a,
                            const std::vector<Vec2>& X, const Vec& pr) {
  const int N = in.n_users(), J = in.n_uavs();
  const Mat h = gain_matrix(in, X);
  L.anchor_pow = pr;
  L.F.resize(N, J);
  L.G = Mat::Zero(N, J);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < J; ++j) {
      double s = in.n0 * in.w_e;
      for (int k = 0; k < J; ++k)
        if (k != j) s += pr[k] * h(i, k);
      L.F(i, j) = std::log2(s);
    }
  for (int i = 0; i < N; ++i) {
    const int j = serving_uav(a, i);
    if (j < 0) continue;
    for (int k = 0; k < J; ++k)
      if (k != j) L.G(i, k) = h(i, k) / (std::exp2(L.F(i, j)) * M_LN2);
  }
}

inline double power_minorant(const MbbInstance& in, const Mat& h, const Vec& pr, int i, int j,
                             const Vec& p, Vec* grad = nullptr) {
  const int J = in.n_uavs();
  double s = in.n0 * in.w_e, sr = s;
  for (int k = 0; k < J; ++k) {
    s += p[k] * h(i, k);
    if (k != j) sr += pr[k] * h(i, k);
  }
  const double F = std::log2(sr);
  double f = std::log2(s) - F;
  for (int k = 0; k < J; ++k)
    if (k != j) f -= h(i, k) / (sr * M_LN2) * (p[k] - pr[k]);
  const double w = in.w_e * units::mbps_per_bps;
  if (grad) {
    grad->resize(J);
    for (int k = 0; k < J; ++k) {
      (*grad)[k] = h(i, k) / (s * M_LN2);
      if (k != j) (*grad)[k] -= h(i, k) / (sr * M_LN2);
    }
    *grad *= w;
  }
  return w * f;
}

struct LocationResult {
  std::vector<Vec2> pos;
  Vec eta;
  Mat b_slack;
  double kkt = 0.0;
  bool fallback = false;
};

inline std::vector<Vec2> jitter_coincident(std::vector<Vec2> X) {
  for (std::size_t j = 0; j < X.size(); ++j)
    for (std::size_t k = j + 1; k < X.size(); ++k)
      if ((X[j] - X[k]).norm() < 1e-9) {
        const double ang = 2.399963 * static_cast<double>(k);
        X[k] += 0.1 * Vec2(std::cos(ang), std::sin(ang));
      }
  return X;
}

inline LocationResult solve_location(const MbbInstance& in, const AcceptMatrix& a,
                                     const std::vector<Vec2>& Xr, const Vec& p,
                                     const MbbCaps& caps) {
  const int N = in.n_users(), J = in.n_uavs();
  const ScaLinearization L = linearize_location(in, Xr, p);
  std::vector<int> serve(N);
  for (int i = 0; i < N; ++i) serve[i] = serving_uav(a, i);

  LocationResult out;
  out.pos = Xr;
  out.eta = Vec::Zero(N);
  out.b_slack = Mat::Zero(N, J);
  auto fill_slacks = [&](const std::vector<Vec2>& X) {
    for (int i = 0; i < N; ++i) {
      if (serve[i] < 0) continue;
      out.eta[i] = location_minorant(L, in, i, serve[i], X);
      for (int k = 0; k < J; ++k)
        if (k != serve[i]) out.b_slack(i, k) = std::max(b_minorant(L, in, i, k, X[k]), 0.0);
    }
  };

  double base = 0.0;
  bool any = false;
  for (int i = 0; i < N; ++i)
    if (serve[i] >= 0 && in.weight[i] > 0.0) {
      base += in.weight[i] * location_minorant(L, in, i, serve[i], Xr);
      any = true;
    }
  if (!any) {
    fill_slacks(Xr);
    return out;
  }
  const double scale = 1.0 / std::max(1.0, std::abs(base));

  auto unpack = [J](const Vec& x) {
    std::vector<Vec2> X(J);
    for (int k = 0; k < J; ++k) X[k] = x.segment<2>(2 * k);
    return X;
  };
  BarrierProblem prob;
  prob.n = 2 * J;
  prob.f = [&](const Vec& x, Vec* g) {
    const auto X = unpack(x);
    std::vector<Vec2> gk(J);
    double v = 0.0;
    if (g) g->setZero(2 * J);
    for (int i = 0; i < N; ++i) {
      if (serve[i] < 0 || in.weight[i] <= 0.0) continue;
      v -= in.weight[i] * location_minorant(L, in, i, serve[i], X, g ? gk.data() : nullptr);
      if (g)
        for (int k = 0; k < J; ++k) g->segment<2>(2 * k) -= in.weight[i] * gk[k];
    }
    if (g) *g *= scale;
    return v * scale;
  };
  for (int k = 0; k < J; ++k) {
    prob.balls.push_back({2 * k, caps.prev_pos[k], caps.e_max * caps.e_max});
    for (int ax = 0; ax < 2; ++ax) {
      const double hi = ax == 0 ? caps.area.width : caps.area.height;
      Vec e = Vec::Zero(2 * J);
      e[2 * k + ax] = 1.0;
      prob.lin.push_back({e, hi});
      prob.lin.push_back({-e, 0.0});
    }
  }
  // collision minorants: -||dr||^2 + 2 dr^T (v_j - v_k) >= d_min^2
  for (int j = 0; j < J; ++j)
    for (int k = j + 1; k < J; ++k) {
      const Vec2 dr = Xr[j] - Xr[k];
      Vec a_(Vec::Zero(2 * J));
      a_.segment<2>(2 * j) = -2.0 * dr;
      a_.segment<2>(2 * k) = 2.0 * dr;
      prob.lin.push_back({a_, -caps.d_min * caps.d_min - dr.squaredNorm()});
    }
  // the B slacks stay nonnegative: linear minorant >= 0
  for (int i = 0; i < N; ++i) {
    if (serve[i] < 0 || in.weight[i] <= 0.0) continue;
    for (int k = 0; k < J; ++k) {
      if (k == serve[i] || p[k] <= 0.0 || L.d2(i, k) < 1e-6) continue;
      const Vec2 c = Xr[k] - in.users[i];
      Vec a_(Vec::Zero(2 * J));
      a_.segment<2>(2 * k) = -2.0 * c;
      prob.lin.push_back({a_, -L.d2(i, k) - 2.0 * c.dot(in.users[i])});
    }
  }

  Vec x0(2 * J);
  for (int k = 0; k < J; ++k) x0.segment<2>(2 * k) = Xr[k];
  Vec xs = x0;
  if (!phase_one(prob, xs)) {
    out.fallback = true;
    fill_slacks(Xr);
    return out;
  }
  BarrierOptions o;
  o.gap_tol = caps.gap_tol;
  const auto r = barrier_minimize(prob, xs, o);
  if (!r.ok) {
    out.fallback = true;
    fill_slacks(Xr);
    return out;
  }
  auto X = unpack(r.x);
  // accept only if the true merit does not get worse
  double m_old = 0.0, m_new = 0.0;
  for (int i = 0; i < N; ++i) {
    if (serve[i] < 0) continue;
    m_old += in.weight[i] * location_true_rate(in, p, i, serve[i], Xr);
    m_new += in.weight[i] * location_true_rate(in, p, i, serve[i], X);
  }
  bool collide = false;
  for (int j = 0; j < J; ++j)
    for (int k = j + 1; k < J; ++k)
      if ((X[j] - X[k]).norm() < caps.d_min) collide = true;
  if (m_new < m_old || collide) {
    out.fallback = collide;
    fill_slacks(Xr);
    return out;
  }
  out.pos = X;
  out.kkt = r.kkt_residual;
  fill_slacks(X);
  return out;
}

// ---------------------------------------------------------------------------
// Power subproblem

struct PowerResult {
  Vec p;
  Vec eta;
  double kkt = 0.0;
  bool fallback = false;
};

inline PowerResult solve_power(const MbbInstance& in, const AcceptMatrix& a,
                               const std::vector<Vec2>& X, const Vec& pr, const MbbCaps& caps) {
  const int N = in.n_users(), J = in.n_uavs();
  const Mat h = gain_matrix(in, X);
  std::vector<int> serve(N);
  for (int i = 0; i < N; ++i) serve[i] = serving_uav(a, i);
  PowerResult out;
  out.p = pr;
  out.eta = Vec::Zero(N);

  auto surrogate = [&](const Vec& p, Vec* g) {
    double v = in.power_cost.dot(p);
    if (g) *g = in.power_cost;
    Vec gi;
    for (int i = 0; i < N; ++i) {
      if (serve[i] < 0 || in.weight[i] <= 0.0) continue;
      v -= in.weight[i] * power_minorant(in, h, pr, i, serve[i], p, g ? &gi : nullptr);
      if (g) *g -= in.weight[i] * gi;
    }
    return v;
  };
  const double scale = 1.0 / std::max(1.0, std::abs(surrogate(pr, nullptr)));

  BarrierProblem prob;
  prob.n = J;
  prob.f = [&](const Vec& p, Vec* g) {
    const double v = surrogate(p, g) * scale;
    if (g) *g *= scale;
    return v;
  };
  prob.hess = [&](const Vec& p, Mat& H) {
    H.setZero(J, J);
    const double w = in.w_e * units::mbps_per_bps;
    for (int i = 0; i < N; ++i) {
      if (serve[i] < 0 || in.weight[i] <= 0.0) continue;
      double s = in.n0 * in.w_e;
      for (int k = 0; k < J; ++k) s += p[k] * h(i, k);
      const Vec hi = h.row(i).transpose();
      H += (in.weight[i] * w / (M_LN2 * s * s)) * hi * hi.transpose();
    }
    H *= scale;
  };
  for (int k = 0; k < J; ++k) {
    Vec e = Vec::Zero(J);
    e[k] = 1.0;
    prob.lin.push_back({e, caps.p_max});
    prob.lin.push_back({-e, 0.0});
  }
  const double margin = 1e-7 * caps.p_max;
  Vec x0 = pr.cwiseMax(margin).cwiseMin(caps.p_max - margin);
  BarrierOptions o;
  o.gap_tol = caps.gap_tol;
  const auto r = barrier_minimize(prob, x0, o);
  if (!r.ok) {
    out.fallback = true;
    return out;
  }
  Vec p = r.x.cwiseMax(0.0).cwiseMin(caps.p_max);
  const double g_old = in.power_cost.dot(pr) - in.weight.dot(all_rates(a, pr, h, in.n0, in.w_e));
  const double g_new = in.power_cost.dot(p) - in.weight.dot(all_rates(a, p, h, in.n0, in.w_e));
  if (g_new > g_old) return out;
  out.p = p;
  out.kkt = r.kkt_residual;
  for (int i = 0; i < N; ++i)
    if (serve[i] >= 0) out.eta[i] = power_minorant(in, h, pr, i, serve[i], p);
  return out;
}

// ---------------------------------------------------------------------------
// Alternating optimization over (A, X, P)

inline SlotDecision alternate(const MbbInstance& in, const std::vector<Vec2>& X0, const Vec& P0,
                              const MbbCaps& caps, const AcceptMatrix* A0 = nullptr) {
  const int N = in.n_users(), J = in.n_uavs();
  SlotDecision d;
  d.uav_pos = caps.move ? jitter_coincident(X0) : X0;
  d.powers = P0;
  d.accept = A0 ? *A0 : AcceptMatrix::Zero(N, J);
  d.w_e = in.w_e;
  d.eta = Vec::Zero(N);
  d.b_slack = Mat::Zero(N, J);
  double g = merit(in, d.accept, d.uav_pos, d.powers);
  d.merit_trace.push_back(g);
  for (int r = 0; r < caps.r_max; ++r) {
    d.accept = match_requests(matching_weights(in, d.uav_pos, d.powers));
    if (caps.move) {
      auto loc = solve_location(in, d.accept, d.uav_pos, d.powers, caps);
      d.uav_pos = loc.pos;
      d.b_slack = loc.b_slack;
      d.solver_fallbacks += loc.fallback;
    }
    auto pw = solve_power(in, d.accept, d.uav_pos, d.powers, caps);
    d.powers = pw.p;
    d.eta = pw.eta;
    d.solver_fallbacks += pw.fallback;
    const double gn = merit(in, d.accept, d.uav_pos, d.powers);
    d.merit_trace.push_back(gn);
    ++d.iterations;
    const bool small = std::abs(g - gn) < caps.rel_tol * std::max(std::abs(g), 1e-12);
    g = gn;
    if (small) break;
  }
  return d;
}

// Checks the per-slot constraint set; returns an empty string when valid.
inline std::string validate(const SlotDecision& d, const MbbCaps& caps, double w_tot,
                            double tol = 1e-6) {
  for (Eigen::Index i = 0; i < d.accept.rows(); ++i)
    if (d.accept.row(i).sum() > 1) return "user served by more than one UAV";
  for (Eigen::Index j = 0; j < d.accept.cols(); ++j)
    if (d.accept.col(j).sum() > 1) return "UAV serving more than one user";
  for (Eigen::Index j = 0; j < d.powers.size(); ++j)
    if (d.powers[j] < -tol || d.powers[j] > caps.p_max * (1 + tol)) return "power out of range";
  const int J = static_cast<int>(d.uav_pos.size());
  for (int j = 0; j < J; ++j) {
    if ((d.uav_pos[j] - caps.prev_pos[j]).norm() > caps.e_max + tol) return "UAV moved too far";
    if (!caps.area.contains(d.uav_pos[j], tol)) return "UAV outside the area";
    for (int k = j + 1; k < J; ++k)
      if ((d.uav_pos[j] - d.uav_pos[k]).norm() < caps.d_min - tol) return "UAVs too close";
  }
  if (d.w_u < 0.0 || d.w_e < 0.0 || d.w_u + d.w_e > w_tot * (1 + 1e-12)) return "bandwidth split invalid";
  return {};
}

}  // namespace uavslice
