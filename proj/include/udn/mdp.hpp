#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "udn/association.hpp"
#include "udn/radio.hpp"

namespace udn {

// Thrown when an observed reward cannot come from any load in [1, max_users].
class load_estimation_error : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Exact C(n, k) for n >= 0; throws std::overflow_error past 64 bits.
inline std::uint64_t binomial(std::int64_t n, std::int64_t k) {
  if (n < 0) throw std::invalid_argument("binomial with negative top argument");
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 result = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    result = result * static_cast<unsigned __int128>(n - k + i) / static_cast<unsigned __int128>(i);
    if (result > std::numeric_limits<std::uint64_t>::max()) throw std::overflow_error("binomial exceeds 64 bits");
  }
  return static_cast<std::uint64_t>(result);
}

struct StateSpaceBound {
  std::uint64_t tight = 0;  // C(sum_{s<=b} N_s - b + 1, b - 1)
  std::uint64_t loose = 0;  // C(U - b + 1, b - 1)
};

// The two binomial bounds on the per-user state count, taken over the first b_u caps.
inline StateSpaceBound state_space_bound(std::size_t b_u, std::span<const std::int64_t> caps,
                                         std::int64_t total_users) {
  if (b_u < 1 || b_u > caps.size()) throw std::invalid_argument("need 1 <= b_u <= |caps|");
  std::int64_t cap_sum = 0;
  for (std::size_t s = 0; s < b_u; ++s) {
    if (caps[s] < 0) throw std::invalid_argument("caps must be >= 0");
    cap_sum += caps[s];
  }
  const auto b = static_cast<std::int64_t>(b_u);
  // Fewer users than free slots leaves no composition to count.
  auto count = [b](std::int64_t top) { return top < 0 ? std::uint64_t{0} : binomial(top, b - 1); };
  return {count(cap_sum - b + 1), count(total_users - b + 1)};
}

inline constexpr std::uint64_t kMaxEnumeratedStates = 1'000'000;

// Exact number of load tuples (n_1..n_b) with 0 <= n_s <= N_s, by walking them.
inline std::uint64_t enumerate_states(std::size_t b_u, std::span<const std::int64_t> caps) {
  if (b_u < 1 || b_u > caps.size()) throw std::invalid_argument("need 1 <= b_u <= |caps|");
  double size = 1.0;
  for (std::size_t s = 0; s < b_u; ++s) {
    if (caps[s] < 0) throw std::invalid_argument("caps must be >= 0");
    size *= static_cast<double>(caps[s] + 1);
  }
  if (size > static_cast<double>(kMaxEnumeratedStates))
    throw std::length_error("state space too large to enumerate");

  std::vector<std::int64_t> loads(b_u, 0);
  std::uint64_t count = 0;
  for (;;) {
    ++count;
    std::size_t s = 0;
    while (s < b_u && loads[s] == caps[s]) loads[s++] = 0;
    if (s == b_u) break;
    ++loads[s];
  }
  return count;
}

// Inverts the throughput curve: the integer load in [1, max_users] whose rate is
// closest to `observed`. r(n) is strictly decreasing, so integer bisection finds
// the bracketing pair in about log2(max_users) evaluations.
inline int estimate_load(double observed, double gain, const RadioParams& params, int max_users) {
  if (max_users < 1) throw std::invalid_argument("max_users must be >= 1");
  auto rate = [&](int n) { return throughput(gain, n, params); };
  const double top = rate(1);
  const double bottom = rate(max_users);
  const double tol = 1e-9 * std::max({1.0, std::abs(top), std::abs(bottom)});
  if (!std::isfinite(observed) || observed > top + tol || observed < bottom - tol)
    throw load_estimation_error("observed reward " + std::to_string(observed) +
                                " is outside the achievable range");
  if (observed >= top) return 1;
  if (observed <= bottom) return max_users;

  int lo = 1;  // rate(lo) > observed
  int hi = max_users;  // rate(hi) < observed
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    const double r = rate(mid);
    if (r == observed) return mid;
    if (r > observed)
      lo = mid;
    else
      hi = mid;
  }
  return rate(lo) - observed <= observed - rate(hi) ? lo : hi;
}

// Last-seen load (in users) of every candidate SBS, indexed like the candidate set.
struct LoadCache {
  std::vector<double> loads;

  explicit LoadCache(std::size_t num_candidates = 0) : loads(num_candidates, 0.0) {}

  void record(std::size_t candidate, double load) { loads.at(candidate) = load; }

  friend bool operator==(const LoadCache&, const LoadCache&) = default;
};

// Feature vector e seen by one user:
//   [0, b)   last-seen load of each candidate / active users
//   [b, 2b)  one-hot of the current SBS
//   [2b, 3b) imitators only: share of associated similar users at each candidate
struct Observation {
  std::vector<double> features;

  std::size_t size() const { return features.size(); }
  std::span<const double> view() const { return features; }
};

inline std::size_t observation_length(std::size_t num_candidates, bool is_imitator) {
  return (is_imitator ? 3 : 2) * num_candidates;
}

inline Observation build_observation(std::size_t user, const AssociationState& state,
                                     std::span<const std::size_t> candidates, const LoadCache& cache,
                                     bool is_imitator, std::span<const std::size_t> similar_users) {
  const std::size_t b = candidates.size();
  Observation obs;
  obs.features.assign(observation_length(b, is_imitator), 0.0);
  const double total = std::max(1, state.active_users());
  const int current = state.sbs_of(user);
  for (std::size_t k = 0; k < b; ++k) {
    const double seen = k < cache.loads.size() ? cache.loads[k] : 0.0;
    obs.features[k] = std::clamp(seen / total, 0.0, 1.0);
    obs.features[b + k] = current == static_cast<int>(candidates[k]) ? 1.0 : 0.0;
  }
  if (!is_imitator) return obs;

  int associated = 0;
  for (std::size_t v : similar_users) {
    const int s = state.sbs_of(v);
    if (s == kUnassociated) continue;
    ++associated;
    const auto it = std::find(candidates.begin(), candidates.end(), static_cast<std::size_t>(s));
    if (it != candidates.end()) obs.features[2 * b + static_cast<std::size_t>(it - candidates.begin())] += 1.0;
  }
  if (associated > 0)
    for (std::size_t k = 0; k < b; ++k) obs.features[2 * b + k] /= associated;
  return obs;
}

inline Observation build_observation(std::size_t user, const AssociationState& state,
                                     const NetworkTopology& topology, const LoadCache& cache,
                                     bool is_imitator) {
  std::vector<std::size_t> similar;
  for (std::size_t v = 0; v < topology.num_users(); ++v)
    if (v != user && topology.similarity(user, v)) similar.push_back(v);
  return build_observation(user, state, topology.candidate_sets.at(user), cache, is_imitator, similar);
}

}  // namespace udn
