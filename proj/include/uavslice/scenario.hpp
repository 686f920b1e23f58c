#pragma once

#include "cgnet.hpp"
#include "env.hpp"
#include "esn.hpp"
#include "lyap.hpp"
#include "mobility.hpp"
#include "urllc.hpp"

#include <json.hpp>

namespace uavslice {

enum class Algorithm { Re2fs, Suav, Cct };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Re2fs: return "re2fs";
    case Algorithm::Suav: return "suav";
    case Algorithm::Cct: return "cct";
  }
  return "?";
}

inline Algorithm algorithm_from_string(const std::string& s) {
  if (s == "re2fs") return Algorithm::Re2fs;
  if (s == "suav") return Algorithm::Suav;
  if (s == "cct") return Algorithm::Cct;
  throw config_error("unknown algorithm '" + s + "'");
}

struct Scenario {
  std::uint64_t seed = 1;
  Algorithm algorithm = Algorithm::Re2fs;
  int horizon = 500;
  int n_users = 16;
  int n_uavs = 3;
  double slot_seconds = 200.0;
  Area area;

  // environment
  ItuParams itu;
  double building_height_cap = 40.0;
  RadioParams radio;

  // mobility
  std::string trace_path;  // empty: synthetic pedestrians
  SyntheticMobility synthetic;
  int beacon_period = 1;
  double coverage_radius_m = 500.0;
  std::vector<double> rate_classes_mbps{1.0, 2.0, 4.0};

  // slices
  UrllcSliceReq urllc;
  double p_b_max = 50.0;  // W
  double w_tot = 10e6;    // Hz
  double urllc_tol_hz = 1.0;

  // learning
  EsnHyper esn;
  int esn_pretrain_episodes = 500;
  std::vector<int> cg_widths{7, 512, 256, 1};
  double cg_lr = 1e-3;
  int cg_minibatch = 64;
  int cg_capacity = 1000000;
  int cg_pretrain_btu = 3000;
  int cg_pretrain_utg = 1000;
  int cg_measure_samples = 16;

  // Lyapunov
  double V = 2.0;
  double rho = 0.01;
  double p_c = 0.02;
  double p_hat = 1.65;
  double p_tilde = 1.5;
  bool predictive_queues = true;  // plan on queues forecast to the target slot
  bool oracle_positions = false;  // ablation: plan on true future user positions

  // MBB optimization
  double e_max = 50.0;
  double d_min = 5.0;
  int alt_r_max = 1000;
  double alt_rel_tol = 1e-5;
  double power_restart_frac = 0.1;

  // CCT baseline
  double cct_speed = 10.0;  // m/s
};

inline Scenario default_scenario() { return Scenario{}; }

inline nlohmann::json to_json(const Scenario& s) {
  using nlohmann::json;
  json j;
  j["seed"] = s.seed;
  j["algorithm"] = to_string(s.algorithm);
  j["horizon"] = s.horizon;
  j["users"] = s.n_users;
  j["uavs"] = s.n_uavs;
  j["slot_seconds"] = s.slot_seconds;
  j["area"] = {{"width_m", s.area.width}, {"height_m", s.area.height}};
  j["environment"] = {
      {"itu", {{"alpha", s.itu.alpha}, {"beta_per_km2", s.itu.beta}, {"sigma_m", s.itu.sigma}}},
      {"height_cap_m", s.building_height_cap},
      {"radio",
       {{"carrier_hz", s.radio.carrier_hz},
        {"noise_psd_dbm_hz", s.radio.noise_psd_dbm_hz},
        {"rician_k_db", s.radio.rician_k_db},
        {"bs_pos", {s.radio.bs_pos.x(), s.radio.bs_pos.y(), s.radio.bs_pos.z()}},
        {"bs_array_elements", s.radio.bs_array_elements},
        {"bs_beamwidth_deg", s.radio.bs_beamwidth_deg},
        {"bs_element_gain_dbi", s.radio.bs_element_gain_dbi},
        {"bs_downtilt_deg", s.radio.bs_downtilt_deg},
        {"bs_azimuth_deg", s.radio.bs_azimuth_deg},
        {"uav_gain_dbi", s.radio.uav_gain_dbi},
        {"rx_gain_dbi", s.radio.rx_gain_dbi},
        {"user_height_m", s.radio.user_height_m},
        {"uav_altitude_m", s.radio.uav_altitude_m}}}};
  j["mobility"] = {{"trace_path", s.trace_path},
                   {"beacon_period", s.beacon_period},
                   {"coverage_radius_m", s.coverage_radius_m},
                   {"rate_classes_mbps", s.rate_classes_mbps},
                   {"synthetic",
                    {{"speed_min", s.synthetic.speed_min},
                     {"speed_max", s.synthetic.speed_max},
                     {"pause_max_s", s.synthetic.pause_max_s},
                     {"hotspot_prob", s.synthetic.hotspot_prob},
                     {"hotspot_lo", {s.synthetic.hotspot_lo.x(), s.synthetic.hotspot_lo.y()}},
                     {"hotspot_hi", {s.synthetic.hotspot_hi.x(), s.synthetic.hotspot_hi.y()}},
                     {"zoom", s.synthetic.zoom}}}};
  j["urllc"] = {{"tau_s", s.urllc.tau_req},   {"eps", s.urllc.eps_req},
                {"bits", s.urllc.b_req},      {"p_b_max_w", s.p_b_max},
                {"w_tot_hz", s.w_tot},        {"tol_hz", s.urllc_tol_hz}};
  j["esn"] = {{"Q", s.esn.Q},
              {"K", s.esn.K},
              {"xi", s.esn.xi},
              {"lambda", s.esn.lambda},
              {"eta", s.esn.eta},
              {"r_max", s.esn.r_max},
              {"tol", s.esn.tol},
              {"spectral_radius", s.esn.spectral_radius},
              {"n_r", s.esn.n_r},
              {"pretrain_episodes", s.esn_pretrain_episodes}};
  j["cgnet"] = {{"widths", s.cg_widths},
                {"lr", s.cg_lr},
                {"minibatch", s.cg_minibatch},
                {"capacity", s.cg_capacity},
                {"pretrain_btu", s.cg_pretrain_btu},
                {"pretrain_utg", s.cg_pretrain_utg},
                {"measure_samples", s.cg_measure_samples}};
  j["lyapunov"] = {{"V", s.V},         {"rho", s.rho},         {"p_c_w", s.p_c},
                   {"p_hat_w", s.p_hat}, {"p_tilde_w", s.p_tilde},
                   {"predictive_queues", s.predictive_queues},
                   {"oracle_positions", s.oracle_positions}};
  j["mbb"] = {{"e_max_m", s.e_max},
              {"d_min_m", s.d_min},
              {"r_max", s.alt_r_max},
              {"rel_tol", s.alt_rel_tol},
              {"power_restart_frac", s.power_restart_frac}};
  j["cct"] = {{"speed_mps", s.cct_speed}};
  return j;
}

namespace detail {
template <class T>
void read(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}
inline void read_vec3(const nlohmann::json& j, const char* key, Vec3& out) {
  if (!j.contains(key)) return;
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 3) throw config_error(std::string(key) + " must have 3 entries");
  out = Vec3(v[0], v[1], v[2]);
}
inline void read_vec2(const nlohmann::json& j, const char* key, Vec2& out) {
  if (!j.contains(key)) return;
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 2) throw config_error(std::string(key) + " must have 2 entries");
  out = Vec2(v[0], v[1]);
}
}  // namespace detail

// Missing keys keep their defaults.
inline Scenario scenario_from_json(const nlohmann::json& j, Scenario s = default_scenario()) {
  using detail::read;
  try {
    read(j, "seed", s.seed);
    if (j.contains("algorithm")) s.algorithm = algorithm_from_string(j.at("algorithm").get<std::string>());
    read(j, "horizon", s.horizon);
    read(j, "users", s.n_users);
    read(j, "uavs", s.n_uavs);
    read(j, "slot_seconds", s.slot_seconds);
    if (j.contains("area")) {
      read(j["area"], "width_m", s.area.width);
      read(j["area"], "height_m", s.area.height);
    }
    if (j.contains("environment")) {
      const auto& e = j["environment"];
      if (e.contains("itu")) {
        read(e["itu"], "alpha", s.itu.alpha);
        read(e["itu"], "beta_per_km2", s.itu.beta);
        read(e["itu"], "sigma_m", s.itu.sigma);
      }
      read(e, "height_cap_m", s.building_height_cap);
      if (e.contains("radio")) {
        const auto& r = e["radio"];
        read(r, "carrier_hz", s.radio.carrier_hz);
        read(r, "noise_psd_dbm_hz", s.radio.noise_psd_dbm_hz);
        read(r, "rician_k_db", s.radio.rician_k_db);
        detail::read_vec3(r, "bs_pos", s.radio.bs_pos);
        read(r, "bs_array_elements", s.radio.bs_array_elements);
        read(r, "bs_beamwidth_deg", s.radio.bs_beamwidth_deg);
        read(r, "bs_element_gain_dbi", s.radio.bs_element_gain_dbi);
        read(r, "bs_downtilt_deg", s.radio.bs_downtilt_deg);
        read(r, "bs_azimuth_deg", s.radio.bs_azimuth_deg);
        read(r, "uav_gain_dbi", s.radio.uav_gain_dbi);
        read(r, "rx_gain_dbi", s.radio.rx_gain_dbi);
        read(r, "user_height_m", s.radio.user_height_m);
        read(r, "uav_altitude_m", s.radio.uav_altitude_m);
      }
    }
    if (j.contains("mobility")) {
      const auto& m = j["mobility"];
      read(m, "trace_path", s.trace_path);
      read(m, "beacon_period", s.beacon_period);
      read(m, "coverage_radius_m", s.coverage_radius_m);
      read(m, "rate_classes_mbps", s.rate_classes_mbps);
      if (m.contains("synthetic")) {
        const auto& y = m["synthetic"];
        read(y, "speed_min", s.synthetic.speed_min);
        read(y, "speed_max", s.synthetic.speed_max);
        read(y, "pause_max_s", s.synthetic.pause_max_s);
        read(y, "hotspot_prob", s.synthetic.hotspot_prob);
        detail::read_vec2(y, "hotspot_lo", s.synthetic.hotspot_lo);
        detail::read_vec2(y, "hotspot_hi", s.synthetic.hotspot_hi);
        read(y, "zoom", s.synthetic.zoom);
      }
    }
    if (j.contains("urllc")) {
      const auto& u = j["urllc"];
      read(u, "tau_s", s.urllc.tau_req);
      read(u, "eps", s.urllc.eps_req);
      read(u, "bits", s.urllc.b_req);
      read(u, "p_b_max_w", s.p_b_max);
      read(u, "w_tot_hz", s.w_tot);
      read(u, "tol_hz", s.urllc_tol_hz);
    }
    if (j.contains("esn")) {
      const auto& e = j["esn"];
      read(e, "Q", s.esn.Q);
      read(e, "K", s.esn.K);
      read(e, "xi", s.esn.xi);
      read(e, "lambda", s.esn.lambda);
      read(e, "eta", s.esn.eta);
      read(e, "r_max", s.esn.r_max);
      read(e, "tol", s.esn.tol);
      read(e, "spectral_radius", s.esn.spectral_radius);
      read(e, "n_r", s.esn.n_r);
      read(e, "pretrain_episodes", s.esn_pretrain_episodes);
    }
    if (j.contains("cgnet")) {
      const auto& c = j["cgnet"];
      read(c, "widths", s.cg_widths);
      read(c, "lr", s.cg_lr);
      read(c, "minibatch", s.cg_minibatch);
      read(c, "capacity", s.cg_capacity);
      read(c, "pretrain_btu", s.cg_pretrain_btu);
      read(c, "pretrain_utg", s.cg_pretrain_utg);
      read(c, "measure_samples", s.cg_measure_samples);
    }
    if (j.contains("lyapunov")) {
      const auto& l = j["lyapunov"];
      read(l, "V", s.V);
      read(l, "rho", s.rho);
      read(l, "p_c_w", s.p_c);
      read(l, "p_hat_w", s.p_hat);
      read(l, "p_tilde_w", s.p_tilde);
      read(l, "predictive_queues", s.predictive_queues);
      read(l, "oracle_positions", s.oracle_positions);
    }
    if (j.contains("mbb")) {
      const auto& m = j["mbb"];
      read(m, "e_max_m", s.e_max);
      read(m, "d_min_m", s.d_min);
      read(m, "r_max", s.alt_r_max);
      read(m, "rel_tol", s.alt_rel_tol);
      read(m, "power_restart_frac", s.power_restart_frac);
    }
    if (j.contains("cct")) read(j["cct"], "speed_mps", s.cct_speed);
  } catch (const nlohmann::json::exception& e) {
    throw config_error(std::string("scenario: ") + e.what());
  }
  return s;
}

inline void check_scenario(const Scenario& s) {
  if (s.horizon < 1) throw config_error("horizon must be >= 1");
  if (s.n_users < 1 || s.n_uavs < 1) throw config_error("need at least one user and one UAV");
  if (s.esn.Q < 2 || s.esn.K < 1 || s.esn.xi <= 0 || s.esn.lambda <= 0 || s.esn.eta <= 0)
    throw config_error("ESN hyperparameters out of range");
  if (s.V < 0 || s.rho < 0) throw config_error("V and rho must be nonnegative");
  if (s.p_hat <= s.p_c) throw config_error("p_hat must exceed p_c");
  if (s.cg_widths.size() < 2 || s.cg_widths.front() != kCgInputDim || s.cg_widths.back() != 1)
    throw config_error("cgnet widths must start at 7 and end at 1");
  if (s.rate_classes_mbps.empty()) throw config_error("no MBB rate classes");
  if (s.urllc.eps_req <= 0 || s.urllc.eps_req >= 0.5 || s.urllc.tau_req <= 0 || s.urllc.b_req < 1)
    throw config_error("URLLC requirement out of range");
  if (s.synthetic.speed_min <= 0 || s.synthetic.speed_max < s.synthetic.speed_min ||
      s.synthetic.speed_max > 1.5 || s.synthetic.zoom < 1)
    throw config_error("synthetic pedestrians need 0 < speed_min <= speed_max <= 1.5 m/s, zoom >= 1");
}

}  // namespace uavslice
