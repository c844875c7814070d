// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 The vrsplit authors

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "vrsplit/rng.hpp"

namespace vrsplit {

// Radio-level parameters of the downlink: M transmit antennas, K single
// antenna users, N subcarriers of bandwidth B each, total power budget P and
// per-receiver noise power sigma2. beta holds per-user path gains.
struct SystemConfig {
  int antennas = 0;          // M
  int users = 0;             // K
  int subcarriers = 0;       // N
  double bandwidth_hz = 0;   // B
  double power_w = 0;        // P
  double noise_w = 0;        // sigma^2
  std::vector<double> pathloss;  // beta_k, size K

  SystemConfig() = default;
  SystemConfig(int m, int k, int n, double b, double p, double sigma2,
               std::vector<double> beta = {})
      : antennas(m), users(k), subcarriers(n), bandwidth_hz(b), power_w(p),
        noise_w(sigma2), pathloss(std::move(beta)) {
    if (pathloss.empty()) pathloss.assign(static_cast<std::size_t>(k), 1.0);
    validate();
  }

  void validate() const {
    if (antennas <= 0 || users <= 0 || subcarriers <= 0)
      throw std::invalid_argument("SystemConfig: dimensions must be positive");
    if (bandwidth_hz <= 0 || power_w <= 0 || noise_w <= 0)
      throw std::invalid_argument("SystemConfig: B, P, sigma2 must be positive");
    if (pathloss.size() != static_cast<std::size_t>(users))
      throw std::invalid_argument("SystemConfig: pathloss size mismatch");
    for (double b : pathloss)
      if (b < 0) throw std::invalid_argument("SystemConfig: negative pathloss");
  }
};

// Block-fading downlink channel: one complex M-vector per (user, subcarrier).
struct ChannelState {
  int antennas = 0;
  int users = 0;
  int subcarriers = 0;
  std::uint64_t seed = 0;
  std::vector<Eigen::VectorXcd> h;  // indexed k * subcarriers + n

  const Eigen::VectorXcd& at(int k, int n) const {
    return h[static_cast<std::size_t>(k) * subcarriers + n];
  }
  Eigen::VectorXcd& at(int k, int n) {
    return h[static_cast<std::size_t>(k) * subcarriers + n];
  }
};

// Draws h_{k,n} i.i.d. circularly-symmetric complex Gaussian with per-entry
// variance beta_k. The Philox counter is indexed by (k, n, m) only, so entry
// values do not depend on the configured antenna count: growing M extends a
// realization without altering the existing entries.
inline ChannelState sample_channels(const SystemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ChannelState st;
  st.antennas = cfg.antennas;
  st.users = cfg.users;
  st.subcarriers = cfg.subcarriers;
  st.seed = seed;
  st.h.resize(static_cast<std::size_t>(cfg.users) * cfg.subcarriers);
  const Philox4x32 gen(seed);
  constexpr int kMaxAntennas = 1 << 20;
  for (int k = 0; k < cfg.users; ++k) {
    const double amp = std::sqrt(cfg.pathloss[static_cast<std::size_t>(k)] / 2.0);
    for (int n = 0; n < cfg.subcarriers; ++n) {
      Eigen::VectorXcd v(cfg.antennas);
      for (int m = 0; m < cfg.antennas; ++m) {
        const std::uint64_t counter =
            (static_cast<std::uint64_t>(k) * cfg.subcarriers + n) * kMaxAntennas + m;
        const auto z = gen.normal_pair(counter);
        v[m] = std::complex<double>(amp * z[0], amp * z[1]);
      }
      st.at(k, n) = std::move(v);
    }
  }
  return st;
}

// |h^H w|^2.
inline double received_power(const Eigen::VectorXcd& h, const Eigen::VectorXcd& w) {
  if (h.size() != w.size())
    throw std::domain_error("received_power: length mismatch");
  return std::norm(h.dot(w));
}

// Self-describing textual dump; doubles are printed with 17 significant
// digits so load() reproduces the state bit-exactly.
inline void dump_channel(const ChannelState& st, const SystemConfig& cfg,
                         std::ostream& out) {
  out << "vrsplit-channel v1\n";
  out << "seed " << st.seed << "\n";
  out << "dims " << st.users << " " << st.subcarriers << " " << st.antennas << "\n";
  out.precision(17);
  out << "bandwidth_hz " << cfg.bandwidth_hz << "\n";
  out << "power_w " << cfg.power_w << "\n";
  out << "noise_w " << cfg.noise_w << "\n";
  out << "pathloss";
  for (double b : cfg.pathloss) out << " " << b;
  out << "\n";
  for (int k = 0; k < st.users; ++k)
    for (int n = 0; n < st.subcarriers; ++n) {
      out << k << " " << n;
      const auto& v = st.at(k, n);
      for (int m = 0; m < st.antennas; ++m)
        out << " " << v[m].real() << " " << v[m].imag();
      out << "\n";
    }
}

inline std::pair<ChannelState, SystemConfig> load_channel(std::istream& in) {
  std::string tag, version;
  in >> tag >> version;
  if (tag != "vrsplit-channel" || version != "v1")
    throw std::runtime_error("load_channel: unrecognized header");
  ChannelState st;
  SystemConfig cfg;
  std::string key;
  in >> key >> st.seed;
  in >> key >> st.users >> st.subcarriers >> st.antennas;
  in >> key >> cfg.bandwidth_hz;
  in >> key >> cfg.power_w;
  in >> key >> cfg.noise_w;
  in >> key;
  cfg.antennas = st.antennas;
  cfg.users = st.users;
  cfg.subcarriers = st.subcarriers;
  cfg.pathloss.resize(static_cast<std::size_t>(st.users));
  for (double& b : cfg.pathloss) in >> b;
  st.h.resize(static_cast<std::size_t>(st.users) * st.subcarriers);
  for (int i = 0; i < st.users * st.subcarriers; ++i) {
    int k, n;
    in >> k >> n;
    Eigen::VectorXcd v(st.antennas);
    for (int m = 0; m < st.antennas; ++m) {
      double re, im;
      in >> re >> im;
      v[m] = std::complex<double>(re, im);
    }
    st.at(k, n) = std::move(v);
  }
  if (!in) throw std::runtime_error("load_channel: truncated input");
  cfg.validate();
  return {std::move(st), std::move(cfg)};
}

}  // namespace vrsplit
