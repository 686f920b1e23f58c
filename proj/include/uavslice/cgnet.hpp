#pragma once

#include "common.hpp"

#include <json.hpp>

#include <optional>

namespace uavslice {

inline constexpr int kCgInputDim = 7;
using CgInput = Eigen::Matrix<double, kCgInputDim, 1>;

// Coordinates in [0,1] by area extents (z by a fixed height scale) plus the
// LoS flag. BtU: [uav; bs; los], UtG: [user; uav; los].
struct InputScaling {
  double width = 1000.0;
  double height = 1000.0;
  double z_scale = 100.0;
};

inline CgInput make_cg_input(const Vec3& a, const Vec3& b, bool los, const InputScaling& s) {
  CgInput in;
  in << a.x() / s.width, a.y() / s.height, a.z() / s.z_scale, b.x() / s.width,
      b.y() / s.height, b.z() / s.z_scale, los ? 1.0 : 0.0;
  return in;
}

struct CgNet {
  std::vector<int> widths;  // e.g. {7, 512, 256, 1}
  std::vector<Mat> W;
  std::vector<Vec> b;
  // Adam state
  std::vector<Mat> mW, vW;
  std::vector<Vec> mb, vb;
  long step = 0;
  double lr = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  // trained output is log10(theta) - target_offset
  double target_offset = 0.0;
  double theta_floor = 1e-12;

  int layers() const { return static_cast<int>(W.size()); }
};

inline CgNet make_cgnet(const std::vector<int>& widths, Rng& rng, double lr = 1e-3,
                        double target_offset = 0.0) {
  CgNet n;
  n.widths = widths;
  n.lr = lr;
  n.target_offset = target_offset;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in = widths[l], out = widths[l + 1];
    const double lim = std::sqrt(6.0 / (in + out));
    Mat w(out, in);
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = uniform(rng, -lim, lim);
    n.W.push_back(w);
    n.b.push_back(Vec::Zero(out));
    n.mW.push_back(Mat::Zero(out, in));
    n.vW.push_back(Mat::Zero(out, in));
    n.mb.push_back(Vec::Zero(out));
    n.vb.push_back(Vec::Zero(out));
  }
  return n;
}

// raw network output for a batch of column inputs
inline Mat forward_batch(const CgNet& net, const Mat& x, std::vector<Mat>* acts = nullptr) {
  Mat a = x;
  if (acts) acts->assign(1, a);
  for (int l = 0; l < net.layers(); ++l) {
    Mat z = net.W[l] * a;
    z.colwise() += net.b[l];
    if (l + 1 < net.layers()) z = z.cwiseMax(0.0);
    a = std::move(z);
    if (acts) acts->push_back(a);
  }
  return a;
}

inline double forward_raw(const CgNet& net, const CgInput& in) {
  return forward_batch(net, Mat(in))(0, 0);
}

// coefficient estimate (linear), floored
inline double forward(const CgNet& net, const CgInput& in) {
  const double lg = forward_raw(net, in) + net.target_offset;
  return std::max(std::pow(10.0, lg), net.theta_floor);
}

inline double estimate_gain(const CgNet& net, const CgInput& in, double distance_m) {
  if (!(distance_m > 0.0)) throw domain_error("estimate_gain: distance must be > 0");
  return forward(net, in) / (distance_m * distance_m);
}

struct Gradients {
  std::vector<Mat> dW;
  std::vector<Vec> db;
};

// mean squared error over the batch and its parameter gradients
inline double loss_and_grad(const CgNet& net, const Mat& x, const Eigen::RowVectorXd& y,
                            Gradients* g) {
  std::vector<Mat> acts;
  const Mat out = forward_batch(net, x, &acts);
  const double B = static_cast<double>(x.cols());
  const Eigen::RowVectorXd err = out.row(0) - y;
  const double loss = err.squaredNorm() / B;
  if (!g) return loss;
  const int L = net.layers();
  g->dW.resize(L);
  g->db.resize(L);
  Mat delta = (2.0 / B) * err;  // 1 x B
  for (int l = L - 1; l >= 0; --l) {
    g->dW[l].noalias() = delta * acts[l].transpose();
    g->db[l] = delta.rowwise().sum();
    if (l > 0) {
      Mat back = net.W[l].transpose() * delta;
      delta = (acts[l].array() > 0.0).select(back, 0.0);
    }
  }
  return loss;
}

inline void adam_update(CgNet& net, const Gradients& g) {
  ++net.step;
  const double c1 = 1.0 - std::pow(net.beta1, static_cast<double>(net.step));
  const double c2 = 1.0 - std::pow(net.beta2, static_cast<double>(net.step));
  const double a = net.lr * std::sqrt(c2) / c1;
  for (int l = 0; l < net.layers(); ++l) {
    net.mW[l] = net.beta1 * net.mW[l] + (1.0 - net.beta1) * g.dW[l];
    net.vW[l] = net.beta2 * net.vW[l] + (1.0 - net.beta2) * g.dW[l].cwiseAbs2();
    net.W[l].array() -= a * net.mW[l].array() / (net.vW[l].array().sqrt() + net.adam_eps);
    net.mb[l] = net.beta1 * net.mb[l] + (1.0 - net.beta1) * g.db[l];
    net.vb[l] = net.beta2 * net.vb[l] + (1.0 - net.beta2) * g.db[l].cwiseAbs2();
    net.b[l].array() -= a * net.mb[l].array() / (net.vb[l].array().sqrt() + net.adam_eps);
  }
}

// FIFO ring of (input, trained-domain target)
struct ReplayBuffer {
  std::size_t capacity = 1000000;
  std::size_t minibatch = 64;
  std::vector<CgInput> inputs;
  std::vector<double> targets;
  std::size_t head = 0;  // next slot to overwrite once full

  ReplayBuffer() = default;
  ReplayBuffer(std::size_t cap, std::size_t mb) : capacity(cap), minibatch(mb) {}
  std::size_t size() const { return inputs.size(); }
};

inline void push_target(ReplayBuffer& buf, const CgInput& in, double target) {
  if (buf.inputs.size() < buf.capacity) {
    buf.inputs.push_back(in);
    buf.targets.push_back(target);
  } else {
    buf.inputs[buf.head] = in;
    buf.targets[buf.head] = target;
    buf.head = (buf.head + 1) % buf.capacity;
  }
}

// returns false (nothing stored) for a nonpositive coefficient
inline bool observe(ReplayBuffer& buf, const CgNet& net, const CgInput& in, double coeff) {
  if (!(coeff > 0.0) || !std::isfinite(coeff)) return false;
  push_target(buf, in, std::log10(coeff) - net.target_offset);
  return true;
}

inline std::optional<double> train_step(CgNet& net, const ReplayBuffer& buf, Rng& rng) {
  if (buf.size() < buf.minibatch || buf.minibatch == 0) return std::nullopt;
  const auto B = static_cast<Eigen::Index>(buf.minibatch);
  Mat x(kCgInputDim, B);
  Eigen::RowVectorXd y(B);
  for (Eigen::Index k = 0; k < B; ++k) {
    const std::size_t idx = uniform_index(rng, buf.size());
    x.col(k) = buf.inputs[idx];
    y(k) = buf.targets[idx];
  }
  Gradients g;
  const double loss = loss_and_grad(net, x, y, &g);
  adam_update(net, g);
  return loss;
}

inline nlohmann::json to_json(const CgNet& n) {
  nlohmann::json j;
  j["widths"] = n.widths;
  j["target_offset"] = n.target_offset;
  j["lr"] = n.lr;
  j["step"] = n.step;
  auto& layers = j["layers"] = nlohmann::json::array();
  for (int l = 0; l < n.layers(); ++l) {
    std::vector<double> w(n.W[l].data(), n.W[l].data() + n.W[l].size());
    std::vector<double> b(n.b[l].data(), n.b[l].data() + n.b[l].size());
    layers.push_back({{"W_col_major", w}, {"b", b}});
  }
  return j;
}

inline CgNet cgnet_from_json(const nlohmann::json& j) {
  Rng dummy(0);
  CgNet n = make_cgnet(j.at("widths").get<std::vector<int>>(), dummy, j.at("lr").get<double>(),
                       j.at("target_offset").get<double>());
  n.step = j.at("step").get<long>();
  const auto& layers = j.at("layers");
  for (int l = 0; l < n.layers(); ++l) {
    const auto w = layers[l].at("W_col_major").get<std::vector<double>>();
    const auto b = layers[l].at("b").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(w.size()) != n.W[l].size() ||
        static_cast<Eigen::Index>(b.size()) != n.b[l].size())
      throw parse_error("cgnet snapshot: layer size mismatch");
    std::copy(w.begin(), w.end(), n.W[l].data());
    std::copy(b.begin(), b.end(), n.b[l].data());
  }
  return n;
}

}  // namespace uavslice
