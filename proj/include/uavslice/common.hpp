#pragma once

#include <Eigen/Dense>

#include <algorithm>

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace uavslice {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Rng = std::mt19937_64;

struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct domain_error : std::domain_error {
  using std::domain_error::domain_error;
};
struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Units used across the library. Rates are carried in Mbps and powers in
// watts; bandwidths are in Hz and distances in meters.
namespace units {
inline constexpr double mbps_per_bps = 1e-6;
inline constexpr double w_per_mw = 1e-3;
inline constexpr double m_per_km = 1000.0;
inline constexpr double speed_of_light = 299792458.0;

inline double dbm_to_w(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double db_to_lin(double db) { return std::pow(10.0, db / 10.0); }
inline double lin_to_db(double x) { return 10.0 * std::log10(x); }
// Shannon rate in Mbps for bandwidth in Hz
inline double rate_mbps(double w_hz, double sinr) {
  return w_hz * std::log2(1.0 + sinr) * mbps_per_bps;
}
}  // namespace units

struct Area {
  double width = 1000.0;
  double height = 1000.0;

  bool contains(const Vec2& p, double tol = 1e-9) const {
    return p.x() >= -tol && p.y() >= -tol && p.x() <= width + tol &&
           p.y() <= height + tol;
  }
  Vec2 clip(const Vec2& p) const {
    return {std::clamp(p.x(), 0.0, width), std::clamp(p.y(), 0.0, height)};
  }
};

inline Vec3 lift(const Vec2& p, double z) { return {p.x(), p.y(), z}; }

inline double pos_part(double x) { return x > 0.0 ? x : 0.0; }

// Independent streams derived from one run seed. Each consumer asks for its
// own tag so adding a draw in one place does not shift another stream.
inline Rng make_stream(std::uint64_t seed, std::uint64_t tag,
                       std::uint64_t sub = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag),
                    static_cast<std::uint32_t>(sub),
                    static_cast<std::uint32_t>(sub >> 32)};
  return Rng(seq);
}

// mt19937_64 based uniform in [0,1). std::uniform_real_distribution is fine
// too but this keeps the exact bit pattern independent of the stdlib.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
inline double uniform(Rng& rng, double a, double b) {
  return a + (b - a) * uniform01(rng);
}
inline double gauss(Rng& rng) {
  // Box-Muller, one value per call
  double u1 = uniform01(rng);
  double u2 = uniform01(rng);
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

}  // namespace uavslice
