#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "udn/radio.hpp"
#include "udn/topology.hpp"

namespace udn::mfg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kStochasticTolerance = 1e-9;

inline void check_simplex(const Vector& pi, double tol = kStochasticTolerance) {
  if ((pi.array() < 0.0).any()) throw std::invalid_argument("distribution has negative entries");
  if (std::abs(pi.sum() - 1.0) > tol) throw std::invalid_argument("distribution does not sum to 1");
}

inline void check_row_stochastic(const Matrix& P, double tol = kStochasticTolerance) {
  if (P.rows() != P.cols()) throw std::invalid_argument("transition matrix must be square");
  if ((P.array() < 0.0).any()) throw std::invalid_argument("transition matrix has negative entries");
  for (Eigen::Index s = 0; s < P.rows(); ++s)
    if (std::abs(P.row(s).sum() - 1.0) > tol)
      throw std::invalid_argument("transition row " + std::to_string(s) + " does not sum to 1");
}

// pi_j(t+1) = sum_s P_sj pi_s(t).
inline Vector forward_step(const Vector& pi, const Matrix& P) {
  if (P.rows() != pi.size()) throw std::invalid_argument("dimension mismatch");
  check_simplex(pi);
  check_row_stochastic(P);
  return P.transpose() * pi;
}

// Population-level game on the SBS graph: states are SBSs, r_sj is the rate a
// user moving from s to j expects given the distribution pi. Only pi_j enters
// r_sj, so it does not depend on the row P_s.
struct MfgModel {
  BoolMatrix adjacency;
  // Mean channel gain of the users inside each SBS's range.
  Vector mean_gain;
  int total_users = 1;
  RadioParams radio;

  std::size_t num_states() const { return adjacency.size(); }

  // j is in V_s U {s}.
  bool reachable(std::size_t s, std::size_t j) const { return s == j || adjacency(s, j); }

  int load_at(const Vector& pi, std::size_t j) const {
    const double users = std::round(static_cast<double>(total_users) * pi(static_cast<Eigen::Index>(j)));
    return std::max(1, static_cast<int>(users));
  }

  double edge_reward(const Vector& pi, std::size_t s, std::size_t j) const {
    if (!reachable(s, j)) throw std::invalid_argument("SBS j is not adjacent to s");
    return throughput(mean_gain(static_cast<Eigen::Index>(j)), load_at(pi, j), radio);
  }
};

inline MfgModel make_model(const NetworkTopology& topology, const RadioParams& radio) {
  const std::size_t S = topology.num_sbs();
  MfgModel model;
  model.adjacency = topology.sbs_adjacency;
  model.total_users = static_cast<int>(topology.num_users());
  model.radio = radio;
  model.mean_gain = Vector::Zero(static_cast<Eigen::Index>(S));
  for (std::size_t j = 0; j < S; ++j) {
    double sum = 0.0;
    int count = 0;
    for (std::size_t u = 0; u < topology.num_users(); ++u) {
      const auto& c = topology.candidate_sets[u];
      if (std::find(c.begin(), c.end(), j) == c.end()) continue;
      sum += make_link(topology.user_positions[u], topology.sbs_positions[j], radio).gain;
      ++count;
    }
    // An SBS nobody can reach still needs a finite rate; use the whole population.
    if (count == 0) {
      for (std::size_t u = 0; u < topology.num_users(); ++u)
        sum += make_link(topology.user_positions[u], topology.sbs_positions[j], radio).gain;
      count = static_cast<int>(topology.num_users());
    }
    model.mean_gain(static_cast<Eigen::Index>(j)) = sum / count;
  }
  return model;
}

// Share of users whose nearest SBS is j (lowest index on ties).
inline Vector nearest_sbs_shares(const NetworkTopology& topology) {
  const std::size_t S = topology.num_sbs();
  if (S == 0 || topology.num_users() == 0) throw std::invalid_argument("topology needs users and SBSs");
  Vector pi = Vector::Zero(static_cast<Eigen::Index>(S));
  for (const Point& u : topology.user_positions) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < S; ++j)
      if (distance(u, topology.sbs_positions[j]) < distance(u, topology.sbs_positions[best])) best = j;
    pi(static_cast<Eigen::Index>(best)) += 1.0;
  }
  return pi / static_cast<double>(topology.num_users());
}

inline double mf_edge_reward(const MfgModel& model, const Vector& pi, std::size_t s, std::size_t j) {
  return model.edge_reward(pi, s, j);
}

inline void check_support(const MfgModel& model, const Matrix& P) {
  for (std::size_t s = 0; s < model.num_states(); ++s)
    for (std::size_t j = 0; j < model.num_states(); ++j)
      if (P(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) != 0.0 && !model.reachable(s, j))
        throw std::invalid_argument("transition row " + std::to_string(s) + " leaves the graph");
}

// e_s(pi, P, V) = sum_j P_sj (r_sj + V_j).
inline double average_reward(const MfgModel& model, const Vector& pi, const Matrix& P, const Vector& V,
                             std::size_t s) {
  double e = 0.0;
  for (std::size_t j = 0; j < model.num_states(); ++j) {
    const double p = P(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j));
    if (p == 0.0) continue;
    e += p * (model.edge_reward(pi, s, j) + V(static_cast<Eigen::Index>(j)));
  }
  return e;
}

struct BestResponse {
  std::size_t target = 0;
  double value = 0.0;
};

// The objective is linear in the row q, so the best row is a vertex e_j with
// j maximizing r_sj + V_j over V_s U {s}. Ties go to the lowest j.
inline BestResponse best_response(const MfgModel& model, const Vector& pi, const Vector& V, std::size_t s) {
  BestResponse best{s, -std::numeric_limits<double>::infinity()};
  for (std::size_t j = 0; j < model.num_states(); ++j) {
    if (!model.reachable(s, j)) continue;
    const double v = model.edge_reward(pi, s, j) + V(static_cast<Eigen::Index>(j));
    if (v > best.value) best = {j, v};
  }
  return best;
}

inline Vector best_response_row(const MfgModel& model, const Vector& pi, const Vector& V, std::size_t s) {
  Vector row = Vector::Zero(static_cast<Eigen::Index>(model.num_states()));
  row(static_cast<Eigen::Index>(best_response(model, pi, V, s).target)) = 1.0;
  return row;
}

// Definition of a Nash maximizer, checked against every vertex deviation.
inline bool nash_check(const MfgModel& model, const Vector& pi, const Matrix& P, const Vector& V, double tol) {
  for (std::size_t s = 0; s < model.num_states(); ++s) {
    const double current = average_reward(model, pi, P, V, s);
    if (current < best_response(model, pi, V, s).value - tol) return false;
  }
  return true;
}

struct SolveOptions {
  std::size_t horizon = 10;
  std::size_t max_iters = 500;
  double damping = 0.5;
  double tol = 1e-8;
  std::size_t max_sweeps = 100;
};

// pi[t], value[t], policy[t] for t = 0..T-1. value[T-1] = 0 and policy[T-1] is
// the identity (no decision at the terminal slot).
struct MfgSolution {
  std::vector<Vector> pi;
  std::vector<Vector> value;
  std::vector<Matrix> policy;
  bool converged = false;
  std::size_t iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
};

namespace detail {

// Synchronized best-response sweeps on one slot, ascending s.
inline void solve_slot(const MfgModel& model, const Vector& pi, const Vector& next_value, Matrix& P,
                       Vector& V, std::size_t max_sweeps) {
  const std::size_t S = model.num_states();
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    bool changed = false;
    for (std::size_t s = 0; s < S; ++s) {
      const auto si = static_cast<Eigen::Index>(s);
      const BestResponse br = best_response(model, pi, next_value, s);
      V(si) = br.value;
      if (P(si, static_cast<Eigen::Index>(br.target)) != 1.0) {
        P.row(si).setZero();
        P(si, static_cast<Eigen::Index>(br.target)) = 1.0;
        changed = true;
      }
    }
    if (!changed) break;
  }
}

inline void backward_pass(const MfgModel& model, const std::vector<Vector>& pi, MfgSolution& out,
                          std::size_t max_sweeps) {
  const std::size_t T = pi.size();
  const auto S = static_cast<Eigen::Index>(model.num_states());
  out.value.assign(T, Vector::Zero(S));
  out.policy.resize(T, Matrix::Identity(S, S));
  out.policy[T - 1] = Matrix::Identity(S, S);
  for (std::size_t t = T - 1; t-- > 0;)
    solve_slot(model, pi[t], out.value[t + 1], out.policy[t], out.value[t], max_sweeps);
}

inline std::vector<Vector> forward_pass(const Vector& pi0, const std::vector<Matrix>& policy) {
  std::vector<Vector> pi(policy.size());
  pi[0] = pi0;
  for (std::size_t t = 0; t + 1 < policy.size(); ++t) pi[t + 1] = forward_step(pi[t], policy[t]);
  return pi;
}

}  // namespace detail

// Backward-forward fixed point: best-respond to the current trajectory, push
// pi0 forward through the new policies, and damp the trajectory update.
inline MfgSolution solve_mfg(const MfgModel& model, const Vector& pi0, const SolveOptions& options = {}) {
  const auto S = static_cast<Eigen::Index>(model.num_states());
  if (pi0.size() != S) throw std::invalid_argument("pi0 has the wrong dimension");
  check_simplex(pi0);
  if (options.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (!(options.damping > 0.0 && options.damping <= 1.0)) throw std::invalid_argument("damping must lie in (0, 1]");
  if (!(options.tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");

  MfgSolution out;
  std::vector<Vector> pi(options.horizon, pi0);
  if (options.horizon == 1) {
    out.pi = pi;
    out.value.assign(1, Vector::Zero(S));
    out.policy.assign(1, Matrix::Identity(S, S));
    out.converged = true;
    out.residual = 0.0;
    return out;
  }

  for (std::size_t iter = 1; iter <= options.max_iters; ++iter) {
    detail::backward_pass(model, pi, out, options.max_sweeps);
    const std::vector<Vector> next = detail::forward_pass(pi0, out.policy);
    double residual = 0.0;
    for (std::size_t t = 0; t < pi.size(); ++t)
      residual = std::max(residual, (next[t] - pi[t]).lpNorm<Eigen::Infinity>());
    out.iterations = iter;
    out.residual = residual;
    if (residual < options.tol) {
      // Re-solve on the undamped trajectory so (pi, V, P) are mutually consistent.
      detail::backward_pass(model, next, out, options.max_sweeps);
      out.pi = detail::forward_pass(pi0, out.policy);
      out.converged = true;
      return out;
    }
    for (std::size_t t = 0; t < pi.size(); ++t)
      pi[t] = (1.0 - options.damping) * pi[t] + options.damping * next[t];
  }
  out.pi = pi;
  return out;
}

inline MfgSolution solve_mfg(const NetworkTopology& topology, const RadioParams& radio, const Vector& pi0,
                             const SolveOptions& options = {}) {
  return solve_mfg(make_model(topology, radio), pi0, options);
}

}  // namespace udn::mfg
