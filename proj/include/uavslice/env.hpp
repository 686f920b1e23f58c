#pragma once

#include "common.hpp"

#include <json.hpp>

#include <complex>
#include <limits>

namespace uavslice {

struct ItuParams {
  double alpha = 0.3;   // built-up area ratio
  double beta = 300.0;  // buildings per km^2
  double sigma = 30.0;  // mean building height (Rayleigh), m
};

struct Building {
  double x0, y0, x1, y1;  // footprint, meters
  double height;
};

struct BuildingMap {
  std::vector<Building> buildings;
  Area area;
  ItuParams itu;
  double height_cap = 40.0;
};

inline BuildingMap generate_buildings(const ItuParams& itu, const Area& area,
                                      std::uint64_t seed,
                                      double height_cap = 40.0) {
  if (area.width <= 0.0 || area.height <= 0.0)
    throw config_error("area dimensions must be positive");
  if (!(itu.alpha > 0.0 && itu.alpha < 1.0) || itu.beta <= 0.0 ||
      itu.sigma <= 0.0)
    throw config_error("ITU parameters out of range");

  BuildingMap map;
  map.area = area;
  map.itu = itu;
  map.height_cap = height_cap;

  // one candidate building per grid cell; cell size follows from beta
  const double cell = units::m_per_km / std::sqrt(itu.beta);
  const long nx = std::lround(area.width / cell);
  const long ny = std::lround(area.height / cell);
  if (nx <= 0 || ny <= 0) return map;
  const double cw = area.width / static_cast<double>(nx);
  const double ch = area.height / static_cast<double>(ny);
  const double area_km2 = area.width * area.height / 1e6;
  const double expected = itu.beta * area_km2;
  const double occupancy = std::min(1.0, expected / static_cast<double>(nx * ny));
  // side so that expected footprint total equals alpha * area
  double side = std::sqrt(itu.alpha * area.width * area.height / expected);
  side = std::min({side, cw, ch});
  const double rayleigh_scale = itu.sigma / std::sqrt(M_PI / 2.0);

  Rng rng = make_stream(seed, 0xB01D);
  for (long iy = 0; iy < ny; ++iy) {
    for (long ix = 0; ix < nx; ++ix) {
      const double u_occ = uniform01(rng);
      const double u_x = uniform01(rng);
      const double u_y = uniform01(rng);
      const double u_h = uniform01(rng);
      if (u_occ >= occupancy) continue;
      const double x0 = ix * cw + u_x * (cw - side);
      const double y0 = iy * ch + u_y * (ch - side);
      double h = rayleigh_scale * std::sqrt(-2.0 * std::log1p(-u_h));
      h = std::clamp(h, 1e-3, height_cap);
      map.buildings.push_back({x0, y0, x0 + side, y0 + side, h});
    }
  }
  return map;
}

// True when the open segment p1-p2 passes through the interior of no
// building. Grazing a face or touching a rooftop does not block.
inline bool is_los(const BuildingMap& map, const Vec3& p1, const Vec3& p2) {
  const Vec3 d = p2 - p1;
  const double low = std::min(p1.z(), p2.z());
  for (const auto& b : map.buildings) {
    if (low >= b.height) continue;
    double lo[3] = {b.x0, b.y0, 0.0};
    double hi[3] = {b.x1, b.y1, b.height};
    double t0 = 0.0, t1 = 1.0;
    bool miss = false;
    for (int a = 0; a < 3 && !miss; ++a) {
      if (std::abs(d[a]) < 1e-12) {
        if (p1[a] <= lo[a] || p1[a] >= hi[a]) miss = true;
        continue;
      }
      double ta = (lo[a] - p1[a]) / d[a];
      double tb = (hi[a] - p1[a]) / d[a];
      if (ta > tb) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t1 - t0 <= 1e-12) miss = true;
    }
    if (!miss) return false;
  }
  return true;
}

struct RadioParams {
  double carrier_hz = 2e9;
  double noise_psd_dbm_hz = -235.0;
  double rician_k_db = 15.0;
  Vec3 bs_pos{25.0, 37.5, 25.0};
  int bs_array_elements = 8;
  double bs_beamwidth_deg = 65.0;
  double bs_element_gain_dbi = 8.0;
  double bs_downtilt_deg = 0.0;
  double bs_azimuth_deg = 44.23;  // boresight toward the area center
  double uav_gain_dbi = 1.0;
  double rx_gain_dbi = 1.0;
  double user_height_m = 1.8;
  double uav_altitude_m = 50.0;

  double n0_w_per_hz() const { return units::dbm_to_w(noise_psd_dbm_hz); }
};

// Urban-macro LoS/NLoS path loss. Heights are those of the two link ends;
// the higher one plays the base-station role in the formula.
inline double path_loss_db(const RadioParams& p, double d3d, bool los,
                           double h_a, double h_b) {
  if (!(d3d > 0.0)) throw domain_error("path_loss_db: distance must be > 0");
  const double fc_ghz = p.carrier_hz / 1e9;
  const double h_bs = std::max(h_a, h_b);
  const double h_ut = std::min(h_a, h_b);
  const double dh = h_bs - h_ut;
  const double d2d = std::sqrt(std::max(d3d * d3d - dh * dh, 0.0));
  // effective antenna heights with a 1 m environment height
  const double hb_e = std::max(h_bs - 1.0, 0.1);
  const double hu_e = std::max(h_ut - 1.0, 0.1);
  const double d_bp = 4.0 * hb_e * hu_e * p.carrier_hz / units::speed_of_light;

  auto pl1 = [&](double d) { return 28.0 + 22.0 * std::log10(d) + 20.0 * std::log10(fc_ghz); };
  auto pl2 = [&](double d) {
    return 28.0 + 40.0 * std::log10(d) + 20.0 * std::log10(fc_ghz) -
           9.0 * std::log10(d_bp * d_bp + dh * dh);
  };
  double pl_los;
  if (d2d <= d_bp) {
    pl_los = pl1(d3d);
  } else {
    // the two branches do not meet exactly; hold the level at the break
    const double d3_bp = std::sqrt(d_bp * d_bp + dh * dh);
    pl_los = std::max(pl2(d3d), pl1(d3_bp));
  }
  if (los) return pl_los;
  const double pl_nlos = 13.54 + 39.08 * std::log10(d3d) +
                         20.0 * std::log10(fc_ghz) - 0.6 * (h_ut - 1.5);
  return std::max(pl_los, pl_nlos);
}

// element pattern in dB relative to isotropic; angles in degrees, zenith 90
// is the horizon and azimuth is measured from boresight
inline double element_gain_db(const RadioParams& p, double zenith_deg,
                              double az_deg) {
  const double bw = p.bs_beamwidth_deg;
  const double av = -std::min(12.0 * std::pow((zenith_deg - 90.0) / bw, 2), 30.0);
  const double ah = -std::min(12.0 * std::pow(az_deg / bw, 2), 30.0);
  return p.bs_element_gain_dbi - std::min(-(av + ah), 30.0);
}

inline double array_factor(const RadioParams& p, double zenith_deg) {
  const int n = p.bs_array_elements;
  const double steer = (90.0 + p.bs_downtilt_deg) * M_PI / 180.0;
  const double psi = M_PI * (std::cos(zenith_deg * M_PI / 180.0) - std::cos(steer));
  std::complex<double> s = 0.0;
  for (int k = 0; k < n; ++k) s += std::polar(1.0, psi * k);
  return std::norm(s) / n;
}

inline double bs_antenna_gain(const RadioParams& p, const Vec3& uav_pos) {
  const Vec3 d = uav_pos - p.bs_pos;
  const double r = d.norm();
  if (r <= 0.0) throw domain_error("bs_antenna_gain: UAV at the BS");
  const double zen = std::acos(std::clamp(d.z() / r, -1.0, 1.0)) * 180.0 / M_PI;
  double az = std::atan2(d.y(), d.x()) * 180.0 / M_PI - p.bs_azimuth_deg;
  while (az > 180.0) az -= 360.0;
  while (az < -180.0) az += 360.0;
  return units::db_to_lin(element_gain_db(p, zen, az)) * array_factor(p, zen);
}

enum class LinkKind { BtU, UtG };

struct TrueChannelSample {
  double gain;
  double coeff;
  bool los;
  double distance_m;
};

// unit-mean-power small-scale fading |f|^2
inline double fading_power(bool los, double k_db, Rng& rng) {
  const double g1 = gauss(rng), g2 = gauss(rng);
  if (!los) return 0.5 * (g1 * g1 + g2 * g2);
  const double k = units::db_to_lin(k_db);
  const double a = std::sqrt(k / (k + 1.0));
  const double s = std::sqrt(1.0 / (2.0 * (k + 1.0)));
  const double re = a + s * g1, im = s * g2;
  return re * re + im * im;
}

// Link gain excluding fading: antenna gains times 10^(-PL/10).
inline double mean_link_gain(LinkKind kind, const Vec3& tx, const Vec3& rx,
                             bool los, const RadioParams& p) {
  const double d = (tx - rx).norm();
  const double pl = path_loss_db(p, d, los, tx.z(), rx.z());
  double g;
  if (kind == LinkKind::BtU)
    g = bs_antenna_gain(p, rx) * units::db_to_lin(p.uav_gain_dbi);
  else
    g = units::db_to_lin(p.uav_gain_dbi) * units::db_to_lin(p.rx_gain_dbi);
  return g * std::pow(10.0, -pl / 10.0);
}

// n_avg > 1 averages the fading power over several fresh draws, the way a
// reference-signal power measurement averages over resource elements
inline TrueChannelSample sample_true_channel(LinkKind kind, const Vec3& tx,
                                             const Vec3& rx,
                                             const BuildingMap& map,
                                             const RadioParams& p, Rng& rng,
                                             int n_avg = 1) {
  const double d = (tx - rx).norm();
  if (!(d > 0.0)) throw domain_error("sample_true_channel: coincident ends");
  TrueChannelSample s;
  s.los = is_los(map, tx, rx);
  s.distance_m = d;
  double f = 0.0;
  for (int k = 0; k < n_avg; ++k) f += fading_power(s.los, p.rician_k_db, rng);
  f /= n_avg;
  s.gain = mean_link_gain(kind, tx, rx, s.los, p) * f;
  s.gain = std::max(s.gain, std::numeric_limits<double>::min());
  s.coeff = s.gain * (d * d);
  return s;
}

inline nlohmann::json to_json(const BuildingMap& m) {
  nlohmann::json j;
  j["area"] = {{"width_m", m.area.width}, {"height_m", m.area.height}};
  j["itu"] = {{"alpha", m.itu.alpha}, {"beta_per_km2", m.itu.beta}, {"sigma_m", m.itu.sigma}};
  j["height_cap_m"] = m.height_cap;
  auto& arr = j["buildings"] = nlohmann::json::array();
  for (const auto& b : m.buildings)
    arr.push_back({{"x0", b.x0}, {"y0", b.y0}, {"x1", b.x1}, {"y1", b.y1}, {"height", b.height}});
  return j;
}

inline BuildingMap building_map_from_json(const nlohmann::json& j) {
  BuildingMap m;
  m.area = {j.at("area").at("width_m").get<double>(), j.at("area").at("height_m").get<double>()};
  m.itu = {j.at("itu").at("alpha").get<double>(), j.at("itu").at("beta_per_km2").get<double>(),
           j.at("itu").at("sigma_m").get<double>()};
  m.height_cap = j.at("height_cap_m").get<double>();
  for (const auto& b : j.at("buildings"))
    m.buildings.push_back({b.at("x0").get<double>(), b.at("y0").get<double>(),
                           b.at("x1").get<double>(), b.at("y1").get<double>(),
                           b.at("height").get<double>()});
  return m;
}

}  // namespace uavslice
