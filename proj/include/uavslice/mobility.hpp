#pragma once

#include "common.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>

namespace uavslice {

struct UserTrace {
  std::int64_t user_id = 0;
  std::vector<Vec2> samples;  // one position per slot, index = slot
  int rate_class = 0;         // index into the MBB class table
  double height_m = 1.8;
};

struct RawSample {
  double t;
  Vec2 pos;
};

// piecewise-linear resample at t0 + k*dt, held constant outside the record
inline std::vector<Vec2> resample_trace(std::vector<RawSample> raw, double t0,
                                        double dt, int n_slots) {
  if (raw.empty()) throw config_error("resample_trace: empty trace");
  std::stable_sort(raw.begin(), raw.end(),
                   [](const RawSample& a, const RawSample& b) { return a.t < b.t; });
  std::vector<Vec2> out;
  out.reserve(n_slots);
  std::size_t k = 0;
  for (int s = 0; s < n_slots; ++s) {
    const double t = t0 + dt * s;
    while (k + 1 < raw.size() && raw[k + 1].t <= t) ++k;
    if (t <= raw.front().t) {
      out.push_back(raw.front().pos);
    } else if (k + 1 >= raw.size()) {
      out.push_back(raw.back().pos);
    } else {
      const double span = raw[k + 1].t - raw[k].t;
      const double w = span > 0.0 ? (t - raw[k].t) / span : 0.0;
      out.push_back((1.0 - w) * raw[k].pos + w * raw[k + 1].pos);
    }
  }
  return out;
}

// affine map of the joint bounding box onto the area, per axis
inline void rescale_traces(std::vector<UserTrace>& traces, const Area& area) {
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& tr : traces)
    for (const auto& p : tr.samples) {
      xmin = std::min(xmin, p.x());
      xmax = std::max(xmax, p.x());
      ymin = std::min(ymin, p.y());
      ymax = std::max(ymax, p.y());
    }
  auto map_axis = [](double v, double lo, double hi, double len) {
    if (hi - lo <= 0.0) return 0.5 * len;
    return std::clamp((v - lo) / (hi - lo) * len, 0.0, len);
  };
  for (auto& tr : traces)
    for (auto& p : tr.samples)
      p = Vec2(map_axis(p.x(), xmin, xmax, area.width),
               map_axis(p.y(), ymin, ymax, area.height));
}

inline void assign_rate_classes(std::vector<UserTrace>& traces, int n_classes,
                                Rng& rng) {
  for (auto& tr : traces) tr.rate_class = static_cast<int>(uniform_index(rng, n_classes));
}

struct TraceOptions {
  double slot_seconds = 200.0;
  int n_slots = 0;
  bool rescale = true;
  int n_classes = 3;
  double user_height_m = 1.8;
};

inline std::map<std::int64_t, std::vector<RawSample>> parse_trace_csv(std::istream& in) {
  std::map<std::int64_t, std::vector<RawSample>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (lineno == 1 && line.find("user_id") != std::string::npos) continue;
    std::stringstream ss(line);
    std::string f[4];
    int n = 0;
    while (n < 4 && std::getline(ss, f[n], ',')) ++n;
    std::string extra;
    if (n != 4 || std::getline(ss, extra, ','))
      throw parse_error("trace csv line " + std::to_string(lineno) + ": expected 4 fields");
    try {
      std::size_t used = 0;
      const auto id = std::stoll(f[0], &used);
      const double t = std::stod(f[1]);
      const double x = std::stod(f[2]);
      const double y = std::stod(f[3]);
      if (!std::isfinite(t) || !std::isfinite(x) || !std::isfinite(y)) throw std::invalid_argument("nan");
      rows[id].push_back({t, Vec2(x, y)});
    } catch (const std::exception&) {
      throw parse_error("trace csv line " + std::to_string(lineno) + ": malformed value");
    }
  }
  return rows;
}

inline std::vector<UserTrace> load_traces(const std::string& path, const Area& area,
                                          int n_users, const TraceOptions& opt,
                                          Rng& class_rng) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open trace file " + path);
  auto rows = parse_trace_csv(in);
  if (static_cast<int>(rows.size()) < n_users)
    throw config_error("trace file has " + std::to_string(rows.size()) +
                       " users, " + std::to_string(n_users) + " requested");
  double t0 = 1e300;
  int taken = 0;
  for (const auto& [id, r] : rows) {
    if (taken++ == n_users) break;
    for (const auto& s : r) t0 = std::min(t0, s.t);
  }
  std::vector<UserTrace> out;
  for (const auto& [id, r] : rows) {
    if (static_cast<int>(out.size()) == n_users) break;
    UserTrace tr;
    tr.user_id = id;
    tr.height_m = opt.user_height_m;
    tr.samples = resample_trace(r, t0, opt.slot_seconds, opt.n_slots);
    out.push_back(std::move(tr));
  }
  if (opt.rescale) rescale_traces(out, area);
  assign_rate_classes(out, opt.n_classes, class_rng);
  return out;
}

struct SyntheticMobility {
  double speed_min = 0.1;  // m/s
  double speed_max = 1.0;  // m/s, pedestrians stay below 1.5
  double pause_max_s = 1200.0;
  double hotspot_prob = 0.5;  // share of waypoints drawn in the hotspot
  Vec2 hotspot_lo{600.0, 600.0};
  Vec2 hotspot_hi{1000.0, 1000.0};
  // walks are generated on a region this many times larger than the area and
  // zoomed onto it, the way recorded city-scale traces are
  double zoom = 5.0;
};

// random-waypoint pedestrians sampled once per slot
inline std::vector<UserTrace> synthetic_traces(const Area& area, int n_users,
                                               const TraceOptions& opt,
                                               const SyntheticMobility& sm,
                                               std::uint64_t seed) {
  std::vector<UserTrace> out;
  const double dt = opt.slot_seconds;
  auto waypoint = [&](Rng& rng) {
    if (uniform01(rng) < sm.hotspot_prob)
      return Vec2(uniform(rng, sm.hotspot_lo.x(), sm.hotspot_hi.x()),
                  uniform(rng, sm.hotspot_lo.y(), sm.hotspot_hi.y()));
    return Vec2(uniform(rng, 0.0, area.width), uniform(rng, 0.0, area.height));
  };
  for (int i = 0; i < n_users; ++i) {
    Rng rng = make_stream(seed, 0x7A1C, i);
    UserTrace tr;
    tr.user_id = i;
    tr.height_m = opt.user_height_m;
    Vec2 pos = waypoint(rng);
    Vec2 target = waypoint(rng);
    double speed = uniform(rng, sm.speed_min, sm.speed_max);
    double pause = uniform(rng, 0.0, sm.pause_max_s);
    for (int s = 0; s < opt.n_slots; ++s) {
      tr.samples.push_back(area.clip(pos));
      double budget = dt;
      while (budget > 1e-9) {
        if (pause > 0.0) {
          const double w = std::min(pause, budget);
          pause -= w;
          budget -= w;
          continue;
        }
        const Vec2 d = target - pos;
        const double dist = d.norm();
        const double reach = speed / sm.zoom * budget;
        if (reach < dist) {
          pos += d * (reach / dist);
          budget = 0.0;
        } else {
          pos = target;
          budget -= dist * sm.zoom / speed;
          target = waypoint(rng);
          speed = uniform(rng, sm.speed_min, sm.speed_max);
          pause = uniform(rng, 0.0, sm.pause_max_s);
        }
      }
    }
    out.push_back(std::move(tr));
  }
  Rng crng = make_stream(seed, 0xC1A5);
  assign_rate_classes(out, opt.n_classes, crng);
  return out;
}

inline std::vector<Vec2> positions_at(const std::vector<UserTrace>& traces, int t) {
  std::vector<Vec2> out;
  out.reserve(traces.size());
  for (const auto& tr : traces) {
    if (t < 0 || t >= static_cast<int>(tr.samples.size()))
      throw domain_error("positions_at: slot " + std::to_string(t) + " outside the horizon");
    out.push_back(tr.samples[t]);
  }
  return out;
}

struct BeaconSample {
  Vec2 pos;
  int slot;
};

// Per-UAV store of received user beacons, newest at the back.
struct BeaconLog {
  int capacity = 7;
  std::vector<std::map<int, std::deque<BeaconSample>>> per_uav;

  BeaconLog() = default;
  BeaconLog(int n_uavs, int cap) : capacity(cap), per_uav(n_uavs) {}

  const std::deque<BeaconSample>* samples(int uav, int user) const {
    auto it = per_uav[uav].find(user);
    return it == per_uav[uav].end() ? nullptr : &it->second;
  }
  void push(int uav, int user, const BeaconSample& s) {
    auto& dq = per_uav[uav][user];
    dq.push_back(s);
    while (static_cast<int>(dq.size()) > capacity) dq.pop_front();
  }
};

inline void beacon_refresh(BeaconLog& log, const std::vector<Vec2>& user_pos,
                           const std::vector<double>& user_h,
                           const std::vector<Vec3>& uav_pos, int t, int t_p,
                           double radius_m) {
  if (t_p < 1) throw config_error("beacon period must be >= 1");
  if (t % t_p != 0) return;
  for (std::size_t j = 0; j < uav_pos.size(); ++j)
    for (std::size_t i = 0; i < user_pos.size(); ++i) {
      const double d = (uav_pos[j] - lift(user_pos[i], user_h[i])).norm();
      if (d <= radius_m) log.push(static_cast<int>(j), static_cast<int>(i), {user_pos[i], t});
    }
}

}  // namespace uavslice
