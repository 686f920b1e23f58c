#pragma once

#include "common.hpp"
#include "mobility.hpp"

#include <json.hpp>

#include <optional>

namespace uavslice {

struct EsnHyper {
  int Q = 6;
  int K = 10;
  double xi = 1e-3;
  double lambda = 1.0;
  double eta = 1.0;
  int r_max = 100;
  double tol = 1e-6;
  double spectral_radius = 0.9;
  int n_r = 300;
};

// Fixed random reservoir shared by all agents; states are kept per user.
struct Reservoir {
  Mat w_in;   // n_r x 2
  Mat w_rec;  // n_r x n_r
  std::map<int, Vec> state_per_user;

  int size() const { return static_cast<int>(w_rec.rows()); }
};

// power iteration; the reservoir matrix is entrywise positive so the Perron
// root dominates and this converges quickly
inline double spectral_radius_estimate(const Mat& a, int iters = 2000) {
  Vec v = Vec::Ones(a.rows()) / std::sqrt(static_cast<double>(a.rows()));
  double lam = 0.0;
  for (int k = 0; k < iters; ++k) {
    Vec w = a * v;
    const double n = w.norm();
    if (n == 0.0) return 0.0;
    w /= n;
    const double diff = (w - v).norm();
    v = w;
    lam = n;
    if (diff < 1e-14) break;
  }
  return lam;
}

inline Reservoir make_reservoir(int n_r, int n_i, double rho, std::uint64_t seed) {
  Rng rng = make_stream(seed, 0xE5A);
  Reservoir r;
  r.w_in.resize(n_r, n_i);
  r.w_rec.resize(n_r, n_r);
  for (int c = 0; c < n_i; ++c)
    for (int i = 0; i < n_r; ++i) r.w_in(i, c) = uniform01(rng);
  for (int c = 0; c < n_r; ++c)
    for (int i = 0; i < n_r; ++i) r.w_rec(i, c) = uniform01(rng);
  const double sr = spectral_radius_estimate(r.w_rec);
  if (sr > 0.0) r.w_rec *= rho / sr;
  return r;
}

inline Vec reservoir_next(const Reservoir& res, const Vec& q_prev, const Vec2& x) {
  return (res.w_in * x + res.w_rec * q_prev).array().tanh().matrix();
}

inline Vec reservoir_step(Reservoir& res, int user, const Vec2& x) {
  auto it = res.state_per_user.find(user);
  const Vec q_prev = it == res.state_per_user.end() ? Vec::Zero(res.size()) : it->second;
  Vec q = reservoir_next(res, q_prev, x);
  res.state_per_user[user] = q;
  return q;
}

// Positions on the slot grid [t_end - Q, t_end], forward-filled from the
// latest sample at or before each slot. Empty when the window is not covered.
inline std::vector<Vec2> window_positions(const std::deque<BeaconSample>& s, int t_end, int Q) {
  std::vector<Vec2> out;
  if (s.empty() || s.front().slot > t_end - Q) return out;
  std::size_t k = 0;
  for (int slot = t_end - Q; slot <= t_end; ++slot) {
    while (k + 1 < s.size() && s[k + 1].slot <= slot) ++k;
    out.push_back(s[k].pos);
  }
  return out;
}

struct LocalSystem {
  Mat X;  // Q x (2 + n_r)
  Mat Y;  // Q x 2
  bool cold = true;
};

// Rows are [x(s) q(s)] for s = t-1 ... t-Q with targets x(s+1); the
// reservoir is replayed from a zero state over the window. Positions are
// scaled by `scale` (meters to km by default).
inline LocalSystem build_local_system(const std::deque<BeaconSample>* samples,
                                      const Reservoir& res, int Q, double scale = 1e-3) {
  LocalSystem ls;
  if (!samples || samples->empty()) return ls;
  const int t = samples->back().slot;
  const auto win = window_positions(*samples, t, Q);
  if (win.empty()) return ls;
  const int n_r = res.size();
  std::vector<Vec> q(Q + 1);
  Vec prev = Vec::Zero(n_r);
  for (int k = 0; k <= Q; ++k) {
    prev = reservoir_next(res, prev, win[k] * scale);
    q[k] = prev;
  }
  ls.X.resize(Q, 2 + n_r);
  ls.Y.resize(Q, 2);
  for (int r = 0; r < Q; ++r) {
    const int k = Q - 1 - r;  // window index of slot t-1-r
    ls.X.row(r).head<2>() = (win[k] * scale).transpose();
    ls.X.row(r).tail(n_r) = q[k].transpose();
    ls.Y.row(r) = (win[k + 1] * scale).transpose();
  }
  ls.cold = false;
  return ls;
}

struct OutputWeights {
  std::vector<Mat> w_j;
  std::vector<Mat> a_j;
  Mat w_hat;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

namespace detail {
// (X^T X + lam I)^{-1} R via the Q x Q system, Q being much smaller than the
// feature count
struct AgentSolver {
  const Mat* X;
  Mat xty;
  Eigen::LDLT<Mat> small;
  double lam;

  AgentSolver(const Mat& x, const Mat& y, double lambda) : X(&x), lam(lambda) {
    xty = x.transpose() * y;
    Mat g = x * x.transpose();
    g.diagonal().array() += lambda;
    small.compute(g);
    if (small.info() != Eigen::Success) throw std::runtime_error("ADMM local factorization failed");
  }
  Mat solve(const Mat& r) const {
    Mat xr = (*X) * r;
    return (r - X->transpose() * small.solve(xr)) / lam;
  }
};
}  // namespace detail

inline OutputWeights init_weights(std::size_t n_agents, Eigen::Index n_feat, Eigen::Index n_out) {
  OutputWeights w;
  w.w_j.assign(n_agents, Mat::Zero(n_feat, n_out));
  w.a_j.assign(n_agents, Mat::Zero(n_feat, n_out));
  w.w_hat = Mat::Zero(n_feat, n_out);
  return w;
}

inline void admm_round_with(const std::vector<detail::AgentSolver>& solvers, OutputWeights& w,
                            const EsnHyper& h) {
  const std::size_t J = solvers.size();
  Mat a_sum = Mat::Zero(w.w_hat.rows(), w.w_hat.cols());
  Mat w_sum = a_sum;
  for (std::size_t j = 0; j < J; ++j) {
    w.w_j[j] = solvers[j].solve(solvers[j].xty + h.lambda * w.w_hat - w.a_j[j]);
    a_sum += w.a_j[j];
    w_sum += w.w_j[j];
  }
  w.w_hat = (a_sum + h.lambda * w_sum) / (h.xi + h.lambda * static_cast<double>(J));
  double res = 0.0;
  for (std::size_t j = 0; j < J; ++j) {
    const Mat d = w.w_j[j] - w.w_hat;
    w.a_j[j] += h.eta * d;
    res = std::max(res, d.norm());
  }
  w.residual = res;
  ++w.iterations;
}

inline OutputWeights admm_round(const std::vector<std::pair<Mat, Mat>>& locals,
                                OutputWeights w, const EsnHyper& h) {
  std::vector<detail::AgentSolver> s;
  s.reserve(locals.size());
  for (const auto& [x, y] : locals) s.emplace_back(x, y, h.lambda);
  admm_round_with(s, w, h);
  return w;
}

// augmented Lagrangian of the consensus problem
inline double admm_lagrangian(const std::vector<std::pair<Mat, Mat>>& locals,
                              const OutputWeights& w, const EsnHyper& h) {
  double l = 0.5 * h.xi * w.w_hat.squaredNorm();
  for (std::size_t j = 0; j < locals.size(); ++j) {
    const Mat d = w.w_j[j] - w.w_hat;
    l += 0.5 * (locals[j].first * w.w_j[j] - locals[j].second).squaredNorm();
    l += (w.a_j[j].array() * d.array()).sum() + 0.5 * h.lambda * d.squaredNorm();
  }
  return l;
}

inline OutputWeights train_consensus(const std::vector<std::pair<Mat, Mat>>& locals,
                                     const EsnHyper& h,
                                     std::vector<double>* residual_trace = nullptr) {
  if (locals.empty()) throw config_error("train_consensus: no agents");
  OutputWeights w = init_weights(locals.size(), locals[0].first.cols(), locals[0].second.cols());
  std::vector<detail::AgentSolver> s;
  s.reserve(locals.size());
  for (const auto& [x, y] : locals) s.emplace_back(x, y, h.lambda);
  for (int r = 0; r < h.r_max; ++r) {
    admm_round_with(s, w, h);
    if (residual_trace) residual_trace->push_back(w.residual);
    if (!std::isfinite(w.residual)) break;
    if (w.residual <= h.tol) {
      w.converged = true;
      break;
    }
  }
  return w;
}

inline Mat stacked_ridge(const std::vector<std::pair<Mat, Mat>>& locals, double xi) {
  const auto n = locals[0].first.cols();
  Mat a = Mat::Identity(n, n) * xi;
  Mat b = Mat::Zero(n, locals[0].second.cols());
  for (const auto& [x, y] : locals) {
    a += x.transpose() * x;
    b += x.transpose() * y;
  }
  return a.ldlt().solve(b);
}

// Closed-loop rollout: q_t is the state after ingesting x_t.
inline std::vector<Vec2> predict_k(const Reservoir& res, const Mat& w_hat, Vec q_t, Vec2 x_t,
                                   int K) {
  std::vector<Vec2> out;
  out.reserve(K);
  const int n_r = res.size();
  for (int k = 0; k < K; ++k) {
    Vec2 y = w_hat.topRows(2).transpose() * x_t + w_hat.bottomRows(n_r).transpose() * q_t;
    out.push_back(y);
    q_t = reservoir_next(res, q_t, y);
    x_t = y;
  }
  return out;
}

struct Prediction {
  std::vector<Vec2> positions;  // meters, slots latest+1 ... latest+n
  bool cold = true;
  bool known = false;  // any beacon ever received for the user
  int latest_slot = -1;
  int agents = 0;
  int admm_iterations = 0;
  double admm_residual = 0.0;
};

// Per-user consensus: each UAV whose log covers the window contributes one
// local system; the BS side aggregates into one readout for that user.
inline Prediction predict_user(Reservoir& res, const BeaconLog& log, int user, int steps,
                               const EsnHyper& h, const Area& area,
                               std::optional<Vec2> last_known = std::nullopt,
                               int last_known_slot = -1) {
  Prediction p;
  std::vector<std::pair<Mat, Mat>> locals;
  const std::deque<BeaconSample>* newest = nullptr;
  for (std::size_t j = 0; j < log.per_uav.size(); ++j) {
    const auto* s = log.samples(static_cast<int>(j), user);
    if (!s || s->empty()) continue;
    if (!newest || s->back().slot > newest->back().slot) newest = s;
    auto ls = build_local_system(s, res, h.Q);
    if (!ls.cold) locals.emplace_back(std::move(ls.X), std::move(ls.Y));
  }
  Vec2 x_t;
  if (newest) {
    x_t = newest->back().pos;
    p.latest_slot = newest->back().slot;
    p.known = true;
  } else if (last_known) {
    x_t = *last_known;
    p.latest_slot = last_known_slot;
    p.known = true;
  } else {
    x_t = Vec2(area.width / 2, area.height / 2);
  }
  p.agents = static_cast<int>(locals.size());
  std::vector<Vec2> win;
  if (newest) win = window_positions(*newest, newest->back().slot, h.Q);
  if (locals.empty() || win.empty() || steps <= 0) {
    p.positions.assign(std::max(steps, 0), x_t);
    return p;
  }
  auto w = train_consensus(locals, h);
  p.admm_iterations = w.iterations;
  p.admm_residual = w.residual;
  if (!w.w_hat.allFinite()) {
    p.positions.assign(steps, x_t);
    return p;
  }
  Vec q = Vec::Zero(res.size());
  for (const auto& x : win) q = reservoir_next(res, q, x * 1e-3);
  res.state_per_user[user] = q;
  auto km = predict_k(res, w.w_hat, q, x_t * 1e-3, steps);
  for (auto& y : km) p.positions.push_back(area.clip(y * 1e3));
  p.cold = false;
  return p;
}

inline nlohmann::json matrix_to_json(const Mat& m) {
  nlohmann::json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> v(m.data(), m.data() + m.size());
  j["col_major"] = v;
  return j;
}

inline Mat matrix_from_json(const nlohmann::json& j) {
  Mat m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  const auto v = j.at("col_major").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(v.size()) != m.size()) throw parse_error("matrix size mismatch");
  std::copy(v.begin(), v.end(), m.data());
  return m;
}

}  // namespace uavslice
