#pragma once

#include "common.hpp"

namespace uavslice {

// upper tail of the standard normal
inline double q_func(double x) { return 0.5 * std::erfc(x / M_SQRT2); }

inline double q_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) throw domain_error("q_inv: p must lie in (0,1)");
  if (p == 0.5) return 0.0;
  if (p > 0.5) return -q_inv(1.0 - p);
  // bracket, then Newton on log Q with bisection safeguard
  double lo = 0.0, hi = 1.0;
  while (q_func(hi) > p) hi *= 2.0;
  double x = 0.5 * (lo + hi);
  const double lp = std::log(p);
  for (int it = 0; it < 200; ++it) {
    const double q = q_func(x);
    const double f = std::log(q) - lp;
    if (f > 0.0) lo = x; else hi = x;
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    double xn = x + f * q / pdf;  // d/dx log Q = -pdf/Q
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) <= 1e-16 * std::max(1.0, std::abs(x))) {
      x = xn;
      break;
    }
    x = xn;
  }
  return x;
}

struct UrllcSliceReq {
  double tau_req = 5e-3;  // s
  double eps_req = 1e-7;
  double b_req = 160.0;  // bits
};

// exponent b ln2/(tau w) + Qinv(eps)/sqrt(tau w) of the required SNR
inline double urllc_exponent(double w, const UrllcSliceReq& r) {
  return r.b_req * M_LN2 / (r.tau_req * w) + q_inv(r.eps_req) / std::sqrt(r.tau_req * w);
}

inline double log_required_power(double h, double w, const UrllcSliceReq& r, double n0) {
  const double x = urllc_exponent(w, r);
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  const double lx = x > 30.0 ? x + std::log1p(-std::exp(-x)) : std::log(std::expm1(x));
  return std::log(n0 * w / h) + lx;
}

inline double required_power(double h, double w, const UrllcSliceReq& r, double n0) {
  if (!(h > 0.0) || !(w > 0.0)) throw domain_error("required_power: gain and bandwidth must be > 0");
  const double x = urllc_exponent(w, r);
  return n0 * w / h * std::expm1(x);
}

// sign-carrying factor of d p / d w: p'(w) = (n0/h) e^x g(w)
inline double required_power_slope_factor(double w, const UrllcSliceReq& r) {
  const double a = r.b_req * M_LN2 / r.tau_req;
  const double c = q_inv(r.eps_req) / std::sqrt(r.tau_req);
  const double x = a / w + c / std::sqrt(w);
  const double dx = -a / (w * w) - 0.5 * c / (w * std::sqrt(w));
  return -std::expm1(-x) + w * dx;
}

inline double required_power_derivative(double h, double w, const UrllcSliceReq& r, double n0) {
  const double x = urllc_exponent(w, r);
  return n0 / h * std::exp(x) * required_power_slope_factor(w, r);
}

// equal split of w_u across the UAVs
inline double total_power_curve(const std::vector<double>& h, double w_u, const UrllcSliceReq& r,
                                double n0) {
  double s = 0.0;
  const double w = w_u / static_cast<double>(h.size());
  for (double hj : h) s += required_power(hj, w, r, n0);
  return s;
}

inline double log_total_power(const std::vector<double>& h, double w_u, const UrllcSliceReq& r,
                              double n0) {
  const double w = w_u / static_cast<double>(h.size());
  double m = -std::numeric_limits<double>::infinity();
  std::vector<double> l;
  for (double hj : h) {
    l.push_back(log_required_power(hj, w, r, n0));
    m = std::max(m, l.back());
  }
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : l) s += std::exp(v - m);
  return m + std::log(s);
}

inline double total_power_derivative(const std::vector<double>& h, double w_u,
                                     const UrllcSliceReq& r, double n0) {
  const double J = static_cast<double>(h.size());
  double s = 0.0;
  for (double hj : h) s += required_power_derivative(hj, w_u / J, r, n0) / J;
  return s;
}

struct UrllcAlloc {
  double w_u = 0.0;                // Hz
  std::vector<double> p_b;         // W per UAV
  bool feasible = false;
  double w_th = 0.0;               // stationary point of the power curve
  double w_ub = 0.0;
  double closing_gap = 0.0;        // max |closing rule - allocated| / p_max
};

inline std::vector<double> closing_powers(const std::vector<double>& h, double p_max) {
  double s = 0.0;
  for (double hj : h) s += 1.0 / (hj * hj);
  std::vector<double> p;
  for (double hj : h) p.push_back(p_max / (hj * hj * s));
  return p;
}

inline UrllcAlloc min_bandwidth(const std::vector<double>& h, const UrllcSliceReq& r, double n0,
                                double p_max, double w_tot, double tol = 1.0) {
  if (!(tol > 0.0)) throw config_error("min_bandwidth: tol must be > 0");
  if (h.empty()) throw config_error("min_bandwidth: no UAVs");
  UrllcAlloc a;
  const double J = static_cast<double>(h.size());
  // first search: zero of the derivative, which is shared by all UAVs under
  // an equal split
  if (required_power_slope_factor(w_tot / J, r) <= 0.0) {
    a.w_th = w_tot;
  } else {
    double lo = 0.0, hi = w_tot;
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (required_power_slope_factor(mid / J, r) < 0.0) lo = mid; else hi = mid;
    }
    a.w_th = 0.5 * (lo + hi);
  }
  a.w_ub = std::min(a.w_th, w_tot);
  const double lpmax = std::log(p_max);
  if (log_total_power(h, a.w_ub, r, n0) > lpmax) {
    a.feasible = false;
    a.w_u = w_tot;
    return a;
  }
  double lo = 0.0, hi = a.w_ub;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (log_total_power(h, mid, r, n0) <= lpmax) hi = mid; else lo = mid;
  }
  a.w_u = hi;
  a.feasible = true;
  const double total = total_power_curve(h, a.w_u, r, n0);
  for (double hj : h) a.p_b.push_back(required_power(hj, a.w_u / J, r, n0) * p_max / total);
  const auto cp = closing_powers(h, p_max);
  for (std::size_t j = 0; j < h.size(); ++j)
    a.closing_gap = std::max(a.closing_gap, std::abs(cp[j] - a.p_b[j]) / p_max);
  return a;
}

// finite-blocklength achievable rate in bit/s (dispersion taken as 1)
inline double fb_rate(double p, double w, double h, const UrllcSliceReq& r, double n0) {
  const double snr = p * h / (n0 * w);
  return w / M_LN2 * (std::log1p(snr) - q_inv(r.eps_req) / std::sqrt(r.tau_req * w));
}

}  // namespace uavslice
