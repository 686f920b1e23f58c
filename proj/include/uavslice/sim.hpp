#pragma once

#include "mbbopt.hpp"
#include "scenario.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace uavslice {

// stream tags
namespace tag {
inline constexpr std::uint64_t traces = 1, classes = 2, deploy = 3, fading = 4, measure = 5,
                               pretrain = 6, online = 7, net_init = 8, reservoir = 9;
}

inline double jain_index(const Vec& u, bool* flagged = nullptr) {
  const double s = u.sum(), s2 = u.squaredNorm();
  if (flagged) *flagged = s2 <= 0.0;
  if (s2 <= 0.0) return 0.0;
  return s * s / (static_cast<double>(u.size()) * s2);
}

inline double energy_efficiency(const Vec& mean_rates, const Vec& mean_p_tot, double rho) {
  double phi = 0.0;
  for (Eigen::Index i = 0; i < mean_rates.size(); ++i) phi += std::log2(1.0 + mean_rates[i]);
  return phi - rho * mean_p_tot.sum();
}

// log10 of the free-space coefficient (lambda / 4 pi)^2, used to center the
// learned log-domain targets
inline double free_space_log10(const RadioParams& r) {
  return 2.0 * std::log10(units::speed_of_light / (4.0 * M_PI * r.carrier_hz));
}

inline std::vector<Vec2> random_deployment(const Scenario& s) {
  Rng rng = make_stream(s.seed, tag::deploy);
  std::vector<Vec2> X;
  int guard = 0;
  while (static_cast<int>(X.size()) < s.n_uavs) {
    Vec2 p(uniform(rng, 0.0, s.area.width), uniform(rng, 0.0, s.area.height));
    bool ok = true;
    for (const auto& q : X) ok = ok && (p - q).norm() >= 2.0 * s.d_min;
    if (ok || ++guard > 100000) X.push_back(p);
  }
  return X;
}

inline double cct_radius(const Scenario& s, int j) {
  const double J = s.n_uavs;
  return (1.0 / (4.0 * J) + j / (2.0 * J)) * s.area.width;
}

inline double cct_angular_step(const Scenario& s, int j) {
  const double r = cct_radius(s, j);
  const double want = s.cct_speed * s.slot_seconds / r;
  const double cap = 2.0 * std::asin(std::min(1.0, s.e_max / (2.0 * r)));
  return std::min(want, cap);
}

// waypoint after `step` slots of flight; step 0 is the line deployment
inline std::vector<Vec2> cct_positions(const Scenario& s, int step) {
  const Vec2 c(s.area.width / 2, s.area.height / 2);
  std::vector<Vec2> X;
  for (int j = 0; j < s.n_uavs; ++j) {
    const double r = cct_radius(s, j), a = cct_angular_step(s, j) * step;
    X.push_back(c + r * Vec2(std::cos(a), std::sin(a)));
  }
  return X;
}

struct Pretrained {
  std::vector<CgNet> btu, utg;
  std::vector<ReplayBuffer> btu_buf, utg_buf;
  std::vector<double> btu_last_loss, utg_last_loss;
};

struct World {
  BuildingMap map;
  std::vector<UserTrace> traces;
  Vec c_th;
  Vec user_h;
  int pre_slots = 0;  // trace slots consumed by the ESN pre-train phase
};

inline World make_world(const Scenario& s) {
  World w;
  w.map = generate_buildings(s.itu, s.area, s.seed, s.building_height_cap);
  TraceOptions opt;
  opt.slot_seconds = s.slot_seconds;
  w.pre_slots = s.esn_pretrain_episodes;
  opt.n_slots = w.pre_slots + s.horizon + s.esn.K + 2;
  opt.n_classes = static_cast<int>(s.rate_classes_mbps.size());
  opt.user_height_m = s.radio.user_height_m;
  if (s.trace_path.empty()) {
    w.traces = synthetic_traces(s.area, s.n_users, opt, s.synthetic, s.seed);
  } else {
    Rng crng = make_stream(s.seed, tag::classes);
    w.traces = load_traces(s.trace_path, s.area, s.n_users, opt, crng);
  }
  w.c_th.resize(s.n_users);
  w.user_h.resize(s.n_users);
  for (int i = 0; i < s.n_users; ++i) {
    w.c_th[i] = s.rate_classes_mbps[w.traces[i].rate_class];
    w.user_h[i] = w.traces[i].height_m;
  }
  return w;
}

inline Vec3 uav3(const Scenario& s, const Vec2& v) { return lift(v, s.radio.uav_altitude_m); }

// Pre-training on random geometries of the run's environment. Depends only
// on the seed, the environment and the UAV count.
inline Pretrained pretrain_cgnets(const Scenario& s, const BuildingMap& map) {
  Pretrained pt;
  const double off = free_space_log10(s.radio);
  const InputScaling sc{s.area.width, s.area.height, 100.0};
  for (int j = 0; j < s.n_uavs; ++j) {
    Rng init = make_stream(s.seed, tag::net_init, j);
    pt.btu.push_back(make_cgnet(s.cg_widths, init, s.cg_lr, off));
    pt.utg.push_back(make_cgnet(s.cg_widths, init, s.cg_lr, off));
    pt.btu_buf.emplace_back(s.cg_capacity, s.cg_minibatch);
    pt.utg_buf.emplace_back(s.cg_capacity, s.cg_minibatch);
    Rng geo = make_stream(s.seed, tag::pretrain, 2 * j);
    Rng mb = make_stream(s.seed, tag::pretrain, 2 * j + 1);
    double last = 0.0;
    for (int e = 0; e < s.cg_pretrain_btu; ++e) {
      Vec3 v = uav3(s, Vec2(uniform(geo, 0, s.area.width), uniform(geo, 0, s.area.height)));
      if ((v - s.radio.bs_pos).norm() < 1.0) continue;
      auto m = sample_true_channel(LinkKind::BtU, s.radio.bs_pos, v, map, s.radio, geo,
                                   s.cg_measure_samples);
      observe(pt.btu_buf[j], pt.btu[j], make_cg_input(v, s.radio.bs_pos, m.los, sc), m.coeff);
      if (auto l = train_step(pt.btu[j], pt.btu_buf[j], mb)) last = *l;
    }
    pt.btu_last_loss.push_back(last);
    for (int e = 0; e < s.cg_pretrain_utg; ++e) {
      Vec3 v = uav3(s, Vec2(uniform(geo, 0, s.area.width), uniform(geo, 0, s.area.height)));
      Vec3 x = lift(Vec2(uniform(geo, 0, s.area.width), uniform(geo, 0, s.area.height)),
                    s.radio.user_height_m);
      auto m = sample_true_channel(LinkKind::UtG, v, x, map, s.radio, geo, s.cg_measure_samples);
      observe(pt.utg_buf[j], pt.utg[j], make_cg_input(x, v, m.los, sc), m.coeff);
      if (auto l = train_step(pt.utg[j], pt.utg_buf[j], mb)) last = *l;
    }
    pt.utg_last_loss.push_back(last);
  }
  return pt;
}

struct SlotRow {
  int t = 0;
  Vec u;      // realized rates, Mbps
  Vec p_tot;  // W
  std::vector<Vec2> uav_pos;
  std::vector<Vec2> user_pos, user_pred;
  std::vector<int> serving;  // UAV index per user, -1 if unserved
  Vec uav_power;
  double s_q = 0, s_z = 0, s_h = 0;
  double max_q = 0, max_z = 0, max_h = 0;
  double w_u = 0, w_e = 0;
  double merit = 0;
  int alt_iters = 0;
  int matched = 0;
  bool urllc_feasible = true;
  int urllc_closure_fail = 0;  // controller gains
  int urllc_true_viol = 0;     // true gains
  double urllc_closing_gap = 0;
  double loss_btu = std::numeric_limits<double>::quiet_NaN();
  double loss_utg = std::numeric_limits<double>::quiet_NaN();
  double pred_mse_km2 = std::numeric_limits<double>::quiet_NaN();
  bool valid = true;
  std::vector<double> merit_trace;
};

struct RunSummary {
  double energy_efficiency = 0;
  double jain = 0;
  Vec mean_rate;
  Vec mean_p_tot;
  int invalid_slots = 0;
  int urllc_infeasible_slots = 0;
  int urllc_closure_failures = 0;
  double urllc_true_violation_frac = 0;
  double pred_mse_km2 = 0;
  double final_s_q = 0, final_s_z = 0, final_s_h = 0;
  int solver_fallbacks = 0;
  double runtime_s = 0;
  // wall-clock split of runtime_s
  double pretrain_s = 0, predict_s = 0, optimize_s = 0, learn_s = 0;
};

struct RunMetrics {
  Scenario scenario;
  std::vector<SlotRow> rows;
  RunSummary summary;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Controller {
  const Scenario& s;
  const World& w;
  Pretrained nets;
  Reservoir res;
  BeaconLog log;
  QueueState qs;
  InputScaling sc;
  Rng fading, measure, online;
  double n0;
  std::vector<SlotDecision> dec;  // index = slot, 0 is the deployment
  std::vector<std::vector<Vec2>> predicted;
  std::vector<Vec> est_u;  // controller-view rates of each decided slot
  int solver_fallbacks = 0;
  double predict_s = 0, optimize_s = 0;

  Controller(const Scenario& sc_, const World& w_, Pretrained pt)
      : s(sc_), w(w_), nets(std::move(pt)),
        res(make_reservoir(sc_.esn.n_r, 2, sc_.esn.spectral_radius,
                           sc_.seed ^ (tag::reservoir << 32))),
        log(sc_.n_uavs, sc_.esn.Q + 1), qs(sc_.n_users, sc_.n_uavs),
        sc{sc_.area.width, sc_.area.height, 100.0},
        fading(make_stream(sc_.seed, tag::fading)), measure(make_stream(sc_.seed, tag::measure)),
        online(make_stream(sc_.seed, tag::online)), n0(sc_.radio.n0_w_per_hz()) {}

  int g(int t) const { return w.pre_slots + t - 1; }  // trace slot of sim slot t

  std::vector<Vec2> deployment() const {
    return s.algorithm == Algorithm::Cct ? cct_positions(s, 0) : random_deployment(s);
  }

  // latest beacon position per user, area center if never heard
  Vec2 last_known(int i) const {
    const BeaconSample* best = nullptr;
    for (std::size_t j = 0; j < log.per_uav.size(); ++j) {
      const auto* q = log.samples(static_cast<int>(j), i);
      if (q && !q->empty() && (!best || q->back().slot > best->slot)) best = &q->back();
    }
    return best ? best->pos : Vec2(s.area.width / 2, s.area.height / 2);
  }

  int latest_slot(int i) const {
    int best = -1;
    for (std::size_t j = 0; j < log.per_uav.size(); ++j) {
      const auto* q = log.samples(static_cast<int>(j), i);
      if (q && !q->empty()) best = std::max(best, q->back().slot);
    }
    return best;
  }

  Mat estimate_theta(const std::vector<Vec2>& users, const std::vector<Vec2>& X) const {
    Mat th(s.n_users, s.n_uavs);
    for (int i = 0; i < s.n_users; ++i) {
      const Vec3 x = lift(users[i], w.user_h[i]);
      for (int k = 0; k < s.n_uavs; ++k) {
        const Vec3 v = uav3(s, X[k]);
        th(i, k) = forward(nets.utg[k], make_cg_input(x, v, is_los(w.map, v, x), sc));
      }
    }
    return th;
  }

  std::vector<double> estimate_btu(const std::vector<Vec2>& X) const {
    std::vector<double> h;
    for (int k = 0; k < s.n_uavs; ++k) {
      const Vec3 v = uav3(s, X[k]);
      const double d = (v - s.radio.bs_pos).norm();
      h.push_back(estimate_gain(nets.btu[k], make_cg_input(v, s.radio.bs_pos,
                                                           is_los(w.map, s.radio.bs_pos, v), sc),
                                d));
    }
    return h;
  }

  Vec u_max(const Mat& theta) const {
    Vec um(s.n_users);
    for (int i = 0; i < s.n_users; ++i) {
      const double dg = s.radio.uav_altitude_m - w.user_h[i];
      double m = 0.0;
      for (int k = 0; k < s.n_uavs; ++k)
        m = std::max(m, u_max_single(s.w_tot, s.p_hat - s.p_c, theta(i, k), n0, dg));
      um[i] = m;
    }
    return um;
  }

  void urllc(SlotDecision& d, const std::vector<Vec2>& X, int* closure_fail, double* gap) const {
    const auto hb = estimate_btu(X);
    const auto a = min_bandwidth(hb, s.urllc, n0, s.p_b_max, s.w_tot, s.urllc_tol_hz);
    if (!a.feasible) {
      d.w_u = s.w_tot;
      d.w_e = 0.0;
      return;
    }
    d.w_u = a.w_u;
    d.w_e = s.w_tot - a.w_u;
    if (gap) *gap = a.closing_gap;
    if (closure_fail) {
      const double need = s.urllc.b_req / s.urllc.tau_req;
      for (int k = 0; k < s.n_uavs; ++k)
        if (fb_rate(a.p_b[k], a.w_u / s.n_uavs, hb[k], s.urllc, n0) < need * (1 - 1e-9))
          ++*closure_fail;
    }
  }

  SlotDecision idle(const std::vector<Vec2>& X) const {
    SlotDecision d;
    d.accept = AcceptMatrix::Zero(s.n_users, s.n_uavs);
    d.uav_pos = X;
    d.powers = Vec::Zero(s.n_uavs);
    d.eta = Vec::Zero(s.n_users);
    d.b_slack = Mat::Zero(s.n_users, s.n_uavs);
    d.gamma = Vec::Zero(s.n_users);
    return d;
  }

  MbbCaps caps(const std::vector<Vec2>& prev, bool move) const {
    MbbCaps c;
    c.prev_pos = prev;
    c.e_max = s.e_max;
    c.d_min = s.d_min;
    c.p_max = s.p_hat - s.p_c;
    c.area = s.area;
    c.move = move;
    c.r_max = s.alt_r_max;
    c.rel_tol = s.alt_rel_tol;
    return c;
  }

  // queues expected at the start of tau: the realized state after slot
  // `now` plus the planned increments of the slots already decided
  QueueState forecast(int now, int tau) const {
    QueueState f = qs;
    for (int k = now + 1; k < tau; ++k) {
      if (est_u[k].size() == 0) continue;
      const SlotDecision& d = dec[k];
      f.q += w.c_th - est_u[k];
      f.z += d.gamma - est_u[k];
      f.h.array() += d.powers.array() + s.p_c - s.p_tilde;
    }
    return f;
  }

  void record_estimate(int tau, const MbbInstance* in) {
    const SlotDecision& d = dec[tau];
    if (!in || d.w_e <= 0.0) {
      est_u[tau] = Vec::Zero(s.n_users);
      return;
    }
    est_u[tau] = all_rates(d.accept, d.powers, gain_matrix(*in, d.uav_pos), n0, d.w_e);
  }

  // plan slot tau from information available after slot now
  void plan(int tau, int now, SlotRow* diag_row) {
    const QueueState fq = s.predictive_queues ? forecast(now, tau) : qs;
    const SlotDecision& prev = dec[tau - 1];
    // predicted user positions at tau
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<Vec2> users(s.n_users);
    for (int i = 0; i < s.n_users; ++i) {
      users[i] = last_known(i);
      const int steps = g(tau) - latest_slot(i);
      if (latest_slot(i) < 0 || steps <= 0) continue;
      auto p = predict_user(res, log, i, steps, s.esn, s.area);
      if (!p.cold) users[i] = p.positions.back();
    }
    if (s.oracle_positions) users = positions_at(w.traces, g(tau));
    predicted[tau] = users;
    predict_s += seconds_since(t0);
    const auto t1 = std::chrono::steady_clock::now();

    std::vector<Vec2> X0 = prev.uav_pos;
    bool move = s.algorithm == Algorithm::Re2fs;
    std::vector<Vec2> prev_pos = prev.uav_pos;
    if (s.algorithm == Algorithm::Cct) X0 = cct_positions(s, tau - s.esn.K);

    SlotDecision d;
    int closure = 0;
    double gap = 0;
    d.w_u = 0;
    urllc(d, prev.uav_pos, &closure, &gap);
    const Mat theta = estimate_theta(users, X0);
    const Vec um = u_max(theta);
    const Vec gamma = solve_gamma(fq.z, um, s.V);
    if (d.w_e <= 0.0) {
      SlotDecision z = idle(X0);
      z.w_u = d.w_u;
      z.w_e = 0.0;
      z.gamma = gamma;
      dec[tau] = z;
      record_estimate(tau, nullptr);
    } else {
      MbbInstance in;
      in.users = users;
      in.user_h = w.user_h;
      in.uav_alt = s.radio.uav_altitude_m;
      in.theta = theta;
      in.n0 = n0;
      in.w_e = d.w_e;
      in.weight = positive(fq.q) + positive(fq.z);
      if (in.weight.maxCoeff() <= 0.0) in.weight.setOnes();  // first-slot weights
      in.power_cost = Vec::Constant(s.n_uavs, s.V * s.rho) + positive(fq.h);
      Vec P0 = prev.powers.cwiseMax(s.power_restart_frac * (s.p_hat - s.p_c));
      auto c = caps(prev_pos, move);
      if (s.algorithm == Algorithm::Cct) c.prev_pos = X0;  // prescribed motion
      SlotDecision a = alternate(in, X0, P0, c);
      a.w_u = d.w_u;
      a.w_e = d.w_e;
      a.gamma = gamma;
      solver_fallbacks += a.solver_fallbacks;
      dec[tau] = std::move(a);
      record_estimate(tau, &in);
    }
    optimize_s += seconds_since(t1);
    if (diag_row) {
      diag_row->urllc_closure_fail = closure;
      diag_row->urllc_closing_gap = gap;
    }
  }
};

}  // namespace detail

inline RunMetrics run(const Scenario& s, const Pretrained* cached = nullptr,
                      const World* world_in = nullptr) {
  check_scenario(s);
  const auto t_start = std::chrono::steady_clock::now();
  std::unique_ptr<World> own;
  if (!world_in) own = std::make_unique<World>(make_world(s));
  const World& w = world_in ? *world_in : *own;
  Pretrained pt = cached ? *cached : pretrain_cgnets(s, w.map);
  const double pretrain_s = detail::seconds_since(t_start);
  double learn_s = 0;
  detail::Controller c(s, w, std::move(pt));
  const int T = s.horizon, K = s.esn.K, J = s.n_uavs, N = s.n_users;

  c.dec.resize(T + 1);
  c.predicted.assign(T + 1, {});
  c.est_u.assign(T + 1, Vec());
  const auto X0 = c.deployment();
  for (int t = 0; t <= std::min(K, T); ++t) c.dec[t] = c.idle(X0);

  // ESN pre-train phase: UAVs hover at the deployment and collect beacons
  std::vector<Vec3> x3(J);
  for (int j = 0; j < J; ++j) x3[j] = uav3(s, X0[j]);
  std::vector<double> hv(w.user_h.data(), w.user_h.data() + N);
  for (int e = 0; e < w.pre_slots; ++e)
    beacon_refresh(c.log, positions_at(w.traces, e), hv, x3, e, s.beacon_period,
                   s.coverage_radius_m);

  LyapParams lp;
  lp.V = s.V;
  lp.rho = s.rho;
  lp.c_th = w.c_th;
  lp.p_tilde = s.p_tilde;
  lp.p_hat = s.p_hat;
  lp.p_c = s.p_c;

  RunMetrics out;
  out.scenario = s;
  std::vector<SlotRow> pending(T + 1);
  const double need = s.urllc.b_req / s.urllc.tau_req;
  int true_viol = 0, true_checks = 0;
  double mse_sum = 0;
  int mse_n = 0;

  for (int t = 1; t <= T; ++t) {
    const int gt = c.g(t);
    SlotRow& row = pending[t];
    // nothing was planned for the first K slots: hover at the deployment
    if (t <= K) {
      SlotDecision d = c.idle(X0);
      int closure = 0;
      double gap = 0;
      c.urllc(d, X0, &closure, &gap);
      std::vector<Vec2> users(N);
      for (int i = 0; i < N; ++i) users[i] = c.last_known(i);
      d.gamma = solve_gamma(c.qs.z, c.u_max(c.estimate_theta(users, X0)), s.V);
      row.urllc_closure_fail = closure;
      row.urllc_closing_gap = gap;
      c.dec[t] = d;
    }
    const SlotDecision& d = c.dec[t];
    const auto pos = positions_at(w.traces, gt);
    for (int j = 0; j < J; ++j) x3[j] = uav3(s, d.uav_pos[j]);
    beacon_refresh(c.log, pos, hv, x3, gt, s.beacon_period, s.coverage_radius_m);

    // realized slot with true gains, one fading draw per link
    Mat h(N, J);
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < J; ++k)
        h(i, k) = sample_true_channel(LinkKind::UtG, x3[k], lift(pos[i], w.user_h[i]), w.map,
                                      s.radio, c.fading)
                      .gain;
    const Vec u = d.w_e > 0 ? all_rates(d.accept, d.powers, h, c.n0, d.w_e) : Vec(Vec::Zero(N));
    const Vec p_tot = d.powers.array() + s.p_c;
    update_queues(c.qs, u, d.gamma, p_tot, lp);

    if (d.w_e > 0 || d.w_u > 0) {
      // URLLC link check with true gains, reported only
      const auto hb_hat = c.estimate_btu(d.uav_pos);
      auto a = min_bandwidth(hb_hat, s.urllc, c.n0, s.p_b_max, s.w_tot, s.urllc_tol_hz);
      if (a.feasible)
        for (int k = 0; k < J; ++k) {
          const double hb = sample_true_channel(LinkKind::BtU, s.radio.bs_pos, x3[k], w.map,
                                                s.radio, c.fading)
                                .gain;
          ++true_checks;
          if (fb_rate(a.p_b[k], a.w_u / J, hb, s.urllc, c.n0) < need) {
            ++true_viol;
            ++row.urllc_true_viol;
          }
        }
    }

    row.t = t;
    row.u = u;
    row.p_tot = p_tot;
    row.uav_pos = d.uav_pos;
    row.user_pos = pos;
    row.user_pred = c.predicted[t];
    row.uav_power = d.powers;
    row.serving.assign(N, -1);
    for (int i = 0; i < N; ++i)
      for (int k = 0; k < J; ++k)
        if (d.accept(i, k)) row.serving[i] = k;
    std::tie(row.s_q, row.s_z, row.s_h) = stability_metrics(c.qs);
    row.max_q = max_pos(c.qs.q);
    row.max_z = max_pos(c.qs.z);
    row.max_h = max_pos(c.qs.h);
    row.w_u = d.w_u;
    row.w_e = d.w_e;
    row.merit = d.merit_trace.empty() ? 0.0 : d.merit_trace.back();
    row.merit_trace = d.merit_trace;
    row.alt_iters = d.iterations;
    row.matched = d.accept.sum();
    row.urllc_feasible = d.w_e > 0;
    if (!c.predicted[t].empty()) {
      double e = 0;
      for (int i = 0; i < N; ++i) e += (c.predicted[t][i] - pos[i]).squaredNorm() * 1e-6;
      row.pred_mse_km2 = e / N;
      mse_sum += row.pred_mse_km2;
      ++mse_n;
    }
    {
      auto cp = c.caps(c.dec[t - 1].uav_pos, true);
      if (s.algorithm == Algorithm::Cct && t > K + 1) cp.prev_pos = c.dec[t - 1].uav_pos;
      if (s.algorithm == Algorithm::Cct && t == K + 1) cp.prev_pos = d.uav_pos;
      row.valid = validate(d, cp, s.w_tot).empty();
    }

    // online learning from this slot's measurements
    const auto t_learn = std::chrono::steady_clock::now();
    double lb = 0, lu = 0;
    int nb = 0, nu = 0;
    for (int k = 0; k < J; ++k) {
      auto m = sample_true_channel(LinkKind::BtU, s.radio.bs_pos, x3[k], w.map, s.radio,
                                   c.measure, s.cg_measure_samples);
      observe(c.nets.btu_buf[k], c.nets.btu[k], make_cg_input(x3[k], s.radio.bs_pos, m.los, c.sc),
              m.coeff);
      if (auto l = train_step(c.nets.btu[k], c.nets.btu_buf[k], c.online)) {
        lb += *l;
        ++nb;
      }
      for (int i = 0; i < N; ++i) {
        if (!d.accept(i, k)) continue;
        const Vec3 x = lift(pos[i], w.user_h[i]);
        auto mu = sample_true_channel(LinkKind::UtG, x3[k], x, w.map, s.radio, c.measure,
                                      s.cg_measure_samples);
        observe(c.nets.utg_buf[k], c.nets.utg[k], make_cg_input(x, x3[k], mu.los, c.sc), mu.coeff);
      }
      if (auto l = train_step(c.nets.utg[k], c.nets.utg_buf[k], c.online)) {
        lu += *l;
        ++nu;
      }
    }
    if (nb) row.loss_btu = lb / nb;
    if (nu) row.loss_utg = lu / nu;
    learn_s += detail::seconds_since(t_learn);

    if (t + K <= T) c.plan(t + K, t, &pending[t + K]);
  }

  // summary
  Vec mean_u = Vec::Zero(N), mean_p = Vec::Zero(J);
  for (int t = 1; t <= T; ++t) {
    mean_u += pending[t].u;
    mean_p += pending[t].p_tot;
  }
  mean_u /= T;
  mean_p /= T;
  auto& sm = out.summary;
  sm.mean_rate = mean_u;
  sm.mean_p_tot = mean_p;
  sm.energy_efficiency = energy_efficiency(mean_u, mean_p, s.rho);
  sm.jain = jain_index(mean_u);
  for (int t = 1; t <= T; ++t) {
    sm.invalid_slots += !pending[t].valid;
    sm.urllc_infeasible_slots += !pending[t].urllc_feasible;
    sm.urllc_closure_failures += pending[t].urllc_closure_fail;
  }
  sm.urllc_true_violation_frac = true_checks ? static_cast<double>(true_viol) / true_checks : 0.0;
  sm.pred_mse_km2 = mse_n ? mse_sum / mse_n : 0.0;
  sm.final_s_q = pending[T].s_q;
  sm.final_s_z = pending[T].s_z;
  sm.final_s_h = pending[T].s_h;
  sm.solver_fallbacks = c.solver_fallbacks;
  sm.runtime_s = detail::seconds_since(t_start);
  sm.pretrain_s = pretrain_s;
  sm.predict_s = c.predict_s;
  sm.optimize_s = c.optimize_s;
  sm.learn_s = learn_s;
  out.rows.assign(pending.begin() + 1, pending.end());
  return out;
}

inline RunMetrics run_baseline_suav(Scenario s, const Pretrained* cached = nullptr,
                                    const World* world = nullptr) {
  s.algorithm = Algorithm::Suav;
  return run(s, cached, world);
}

inline RunMetrics run_baseline_cct(Scenario s, const Pretrained* cached = nullptr,
                                   const World* world = nullptr) {
  s.algorithm = Algorithm::Cct;
  return run(s, cached, world);
}

// ---------------------------------------------------------------------------
// outputs

namespace detail {
inline std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace detail

inline void write_metrics_csv(const RunMetrics& m, std::ostream& o) {
  using detail::num;
  const int N = m.scenario.n_users, J = m.scenario.n_uavs;
  o << "t,S_Q,S_Z,S_H,w_u_hz,w_e_hz,merit,alt_iters,matched,urllc_feasible,"
       "urllc_closure_fail,urllc_true_viol,loss_btu,loss_utg,pred_mse_km2,valid,sum_rate_mbps";
  for (int i = 0; i < N; ++i) o << ",u_" << i;
  for (int j = 0; j < J; ++j) o << ",p_tot_" << j;
  o << "\n";
  for (const auto& r : m.rows) {
    o << r.t << ',' << num(r.s_q) << ',' << num(r.s_z) << ',' << num(r.s_h) << ',' << num(r.w_u)
      << ',' << num(r.w_e) << ',' << num(r.merit) << ',' << r.alt_iters << ',' << r.matched << ','
      << r.urllc_feasible << ',' << r.urllc_closure_fail << ',' << r.urllc_true_viol << ','
      << num(r.loss_btu) << ',' << num(r.loss_utg) << ',' << num(r.pred_mse_km2) << ','
      << r.valid << ',' << num(r.u.sum());
    for (int i = 0; i < N; ++i) o << ',' << num(r.u[i]);
    for (int j = 0; j < J; ++j) o << ',' << num(r.p_tot[j]);
    o << "\n";
  }
}

inline nlohmann::json summary_json(const RunMetrics& m) {
  const auto& s = m.summary;
  nlohmann::json j;
  j["algorithm"] = to_string(m.scenario.algorithm);
  j["seed"] = m.scenario.seed;
  j["users"] = m.scenario.n_users;
  j["uavs"] = m.scenario.n_uavs;
  j["horizon"] = m.scenario.horizon;
  j["energy_efficiency"] = s.energy_efficiency;
  j["jain_index"] = s.jain;
  j["mean_rate_mbps"] = std::vector<double>(s.mean_rate.data(), s.mean_rate.data() + s.mean_rate.size());
  j["mean_p_tot_w"] = std::vector<double>(s.mean_p_tot.data(), s.mean_p_tot.data() + s.mean_p_tot.size());
  j["invalid_slots"] = s.invalid_slots;
  j["urllc_infeasible_slots"] = s.urllc_infeasible_slots;
  j["urllc_closure_failures"] = s.urllc_closure_failures;
  j["urllc_true_violation_frac"] = s.urllc_true_violation_frac;
  j["prediction_mse_km2"] = s.pred_mse_km2;
  j["final_S"] = {s.final_s_q, s.final_s_z, s.final_s_h};
  j["solver_fallbacks"] = s.solver_fallbacks;
  j["runtime_s"] = s.runtime_s;
  j["runtime_split_s"] = {{"pretrain", s.pretrain_s},
                          {"predict", s.predict_s},
                          {"optimize", s.optimize_s},
                          {"learn", s.learn_s}};
  return j;
}

inline void write_outputs(const RunMetrics& m, const std::filesystem::path& dir) {
  using detail::num;
  std::filesystem::create_directories(dir);
  {
    std::ofstream o(dir / "metrics.csv");
    write_metrics_csv(m, o);
  }
  {
    std::ofstream o(dir / "summary.json");
    o << summary_json(m).dump(2) << "\n";
  }
  {
    std::ofstream o(dir / "queues.csv");
    o << "t,S_Q,S_Z,S_H,max_Q,max_Z,max_H\n";
    for (const auto& r : m.rows)
      o << r.t << ',' << num(r.s_q) << ',' << num(r.s_z) << ',' << num(r.s_h) << ','
        << num(r.max_q) << ',' << num(r.max_z) << ',' << num(r.max_h) << "\n";
  }
  {
    std::ofstream o(dir / "gamma_trace.csv");
    o << "t,iteration,merit\n";
    for (const auto& r : m.rows)
      for (std::size_t k = 0; k < r.merit_trace.size(); ++k)
        o << r.t << ',' << k << ',' << num(r.merit_trace[k]) << "\n";
  }
  {
    std::ofstream o(dir / "uav_tracks.csv");
    o << "t,uav,x_m,y_m\n";
    for (const auto& r : m.rows)
      for (std::size_t j = 0; j < r.uav_pos.size(); ++j)
        o << r.t << ',' << j << ',' << num(r.uav_pos[j].x()) << ',' << num(r.uav_pos[j].y())
          << "\n";
  }
}

}  // namespace uavslice
