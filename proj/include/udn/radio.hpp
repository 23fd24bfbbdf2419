#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "udn/association.hpp"
#include "udn/topology.hpp"

namespace udn {

inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s

struct RadioParams {
  double bandwidth_hz = 10e6;
  double carrier_freq_hz = 900e6;
  double pathloss_exponent = 2.0;
  double noise_density_dbm_hz = -173.9;
  double tx_power_w = 0.1;
  // I(n) = interference_coeff * (n - 1), watts.
  double interference_coeff = 1e-13;
  // c(n) = congestion_coeff * (n - 1), bits/s.
  double congestion_coeff = 5e5;
  // Penalty per similar user associated elsewhere, bits/s.
  double imitation_weight = 2e6;

  // Thermal noise over the whole band, watts.
  double noise_power_w() const {
    return std::pow(10.0, (noise_density_dbm_hz - 30.0) / 10.0) * bandwidth_hz;
  }

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw std::invalid_argument(std::string("invalid radio parameter: ") + what);
    };
    require(bandwidth_hz > 0.0 && std::isfinite(bandwidth_hz), "bandwidth must be > 0");
    require(carrier_freq_hz > 0.0 && std::isfinite(carrier_freq_hz), "carrier frequency must be > 0");
    require(pathloss_exponent > 0.0 && std::isfinite(pathloss_exponent), "path-loss exponent must be > 0");
    require(std::isfinite(noise_density_dbm_hz), "noise density must be finite");
    require(tx_power_w >= 0.0 && std::isfinite(tx_power_w), "transmit power must be >= 0");
    require(interference_coeff > 0.0 && std::isfinite(interference_coeff), "iota must be > 0");
    require(congestion_coeff > 0.0 && std::isfinite(congestion_coeff), "kappa must be > 0");
    require(imitation_weight >= 0.0 && std::isfinite(imitation_weight), "beta must be >= 0");
  }
};

struct LinkState {
  double gain = 0.0;
  double distance = 0.0;
};

// Free-space reference gain at 1 m, decaying as d^-eta. No fading.
inline double channel_gain(double distance_m, const RadioParams& params) {
  if (!(distance_m > 0.0)) throw std::invalid_argument("distance must be > 0");
  const double wavelength = kSpeedOfLight / params.carrier_freq_hz;
  const double reference = wavelength / (4.0 * std::numbers::pi);
  return reference * reference * std::pow(distance_m, -params.pathloss_exponent);
}

inline LinkState make_link(Point user, Point sbs, const RadioParams& params) {
  // Co-located endpoints are pushed to 1 m so the power law stays finite.
  const double d = std::max(distance(user, sbs), 1.0);
  return {channel_gain(d, params), d};
}

inline double interference(int load, const RadioParams& params) {
  if (load < 1) throw std::invalid_argument("load must be >= 1");
  return params.interference_coeff * static_cast<double>(load - 1);
}

inline double congestion_cost(int load, const RadioParams& params) {
  if (load < 1) throw std::invalid_argument("load must be >= 1");
  return params.congestion_coeff * static_cast<double>(load - 1);
}

// B log2(1 + p h / (sigma^2 + I(n))) - c(n). Strictly decreasing in n.
inline double throughput(double gain, int load, const RadioParams& params) {
  if (!(gain > 0.0)) throw std::invalid_argument("channel gain must be > 0");
  const double sinr = params.tx_power_w * gain / (params.noise_power_w() + interference(load, params));
  return params.bandwidth_hz * std::log2(1.0 + sinr) - congestion_cost(load, params);
}

// beta * sum over similar users u' of |a_su - a_su'|, for user u sitting at `sbs`.
// Unassociated users are not part of the system and contribute nothing.
inline double imitation_penalty(std::size_t sbs, std::span<const std::size_t> similar_users,
                                const AssociationState& state, const RadioParams& params) {
  int mismatches = 0;
  for (std::size_t v : similar_users) {
    const int other = state.sbs_of(v);
    if (other != kUnassociated && static_cast<std::size_t>(other) != sbs) ++mismatches;
  }
  return params.imitation_weight * static_cast<double>(mismatches);
}

// Reward of `user` for choosing `chosen_sbs` given the (post-move) association
// state. Non-imitators see throughput only.
inline double user_reward(std::size_t user, std::size_t chosen_sbs, const AssociationState& state,
                          const NetworkTopology& topology, const RadioParams& params,
                          bool is_imitator) {
  const auto& candidates = topology.candidate_sets.at(user);
  if (std::find(candidates.begin(), candidates.end(), chosen_sbs) == candidates.end())
    throw std::invalid_argument("chosen SBS is not in the user's candidate set");
  const LinkState link = make_link(topology.user_positions[user], topology.sbs_positions[chosen_sbs], params);
  const int load = std::max(state.load(chosen_sbs), 1);
  const double rate = throughput(link.gain, load, params);
  if (!is_imitator) return rate;

  std::vector<std::size_t> similar;
  for (std::size_t v = 0; v < topology.num_users(); ++v)
    if (v != user && topology.similarity(user, v)) similar.push_back(v);
  return rate - imitation_penalty(chosen_sbs, similar, state, params);
}

}  // namespace udn
