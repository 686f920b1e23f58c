#pragma once

#include "common.hpp"

#include <tuple>

namespace uavslice {

// Users carry exactly one MBB request, so (i,s) collapses to the user index.
struct QueueState {
  Vec q;  // rate-requirement queues, Mbps
  Vec z;  // auxiliary-rate queues, Mbps
  Vec h;  // power queues, W
  int t = 0;

  QueueState() = default;
  QueueState(int n_users, int n_uavs)
      : q(Vec::Zero(n_users)), z(Vec::Zero(n_users)), h(Vec::Zero(n_uavs)) {}
};

struct LyapParams {
  double V = 2.0;
  double rho = 0.01;
  Vec c_th;      // per user, Mbps
  double p_tilde = 1.5;  // W
  double p_hat = 1.65;   // W
  double p_c = 0.02;     // W
};

inline void update_queues(QueueState& s, const Vec& u, const Vec& gamma, const Vec& p_tot,
                          const LyapParams& p) {
  if (u.size() != s.q.size() || gamma.size() != s.z.size() || p_tot.size() != s.h.size() ||
      p.c_th.size() != s.q.size())
    throw std::invalid_argument("update_queues: size mismatch between state and inputs");
  s.q += p.c_th - u;
  s.z += gamma - u;
  s.h.array() += p_tot.array() - p.p_tilde;
  ++s.t;
}

inline double max_pos(const Vec& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, v[i]);
  return m;
}

inline std::tuple<double, double, double> stability_metrics(const QueueState& s) {
  if (s.t < 1) throw domain_error("stability_metrics: t must be >= 1");
  const double t = s.t;
  return {max_pos(s.q) / t, max_pos(s.z) / t, max_pos(s.h) / t};
}

inline double bound_constant(const Vec& u_max, const Vec& p_hat) {
  return u_max.squaredNorm() + 0.5 * p_hat.squaredNorm();
}

inline Vec positive(const Vec& v) { return v.cwiseMax(0.0); }

inline double lyapunov(const QueueState& s) {
  return 0.5 * (positive(s.q).squaredNorm() + positive(s.z).squaredNorm() +
                positive(s.h).squaredNorm());
}

inline double utility(const Vec& gamma) {
  double g = 0.0;
  for (Eigen::Index i = 0; i < gamma.size(); ++i) g += std::log2(1.0 + gamma[i]);
  return g;
}

// per-slot quantities entering the drift-plus-penalty bound
struct DriftInputs {
  Vec u;      // realized or planned rates, Mbps
  Vec gamma;  // auxiliary rates, Mbps
  Vec p;      // transmit powers, W (without circuit power)
  Vec u_max;  // per user caps
};

inline double drift_penalty_value(const QueueState& s, const DriftInputs& d,
                                  const LyapParams& p) {
  const Vec qp = positive(s.q), zp = positive(s.z), hp = positive(s.h);
  const double J = static_cast<double>(s.h.size());
  const double B = bound_constant(d.u_max, Vec::Constant(s.h.size(), p.p_hat));
  double r = B;
  r += qp.dot(p.c_th);
  r -= hp.sum() * (p.p_tilde - p.p_c);
  r += p.V * p.rho * J * p.p_c;
  r -= p.V * utility(d.gamma);
  r += zp.dot(d.gamma);
  r += ((p.V * p.rho) * Vec::Ones(s.h.size()) + hp).dot(d.p);
  r -= (qp + zp).dot(d.u);
  return r;
}

// Delta(t) - V (g - rho sum p_tot) computed from the actual queue update
inline double direct_drift_penalty(const QueueState& s, const DriftInputs& d,
                                   const LyapParams& p) {
  QueueState n = s;
  const Vec p_tot = d.p.array() + p.p_c;
  update_queues(n, d.u, d.gamma, p_tot, p);
  return lyapunov(n) - lyapunov(s) - p.V * (utility(d.gamma) - p.rho * p_tot.sum());
}

// maximizes V log2(1+g) - [Z]^+ g over [0, u_max] per user
inline Vec solve_gamma(const Vec& z, const Vec& u_max, double V) {
  Vec g(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double zp = pos_part(z[i]);
    if (zp == 0.0)
      g[i] = u_max[i];
    else
      g[i] = std::min(pos_part(V / (zp * M_LN2) - 1.0), u_max[i]);
  }
  return g;
}

// interference-free cap on a user's rate from one UAV, Mbps
inline double u_max_single(double w_tot_hz, double p_tx_w, double theta, double n0,
                           double dg_m) {
  return units::rate_mbps(w_tot_hz, p_tx_w * theta / (n0 * w_tot_hz * dg_m * dg_m));
}

}  // namespace uavslice
