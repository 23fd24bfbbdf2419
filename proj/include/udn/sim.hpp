#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "udn/association.hpp"
#include "udn/config.hpp"
#include "udn/learning.hpp"
#include "udn/mdp.hpp"
#include "udn/radio.hpp"
#include "udn/topology.hpp"

namespace udn {

enum class Membership : std::uint8_t { non_imitator, imitator };

inline constexpr int kNeverEnters = std::numeric_limits<int>::max();

// Per-user cohort flag and activation slot.
struct Cohort {
  std::vector<Membership> membership;
  std::vector<int> entry_slot;

  std::size_t size() const { return membership.size(); }

  friend bool operator==(const Cohort&, const Cohort&) = default;
};

// Reporting groups: users present from slot 0, and later entrants split by membership.
enum class Group : std::uint8_t { incumbent = 0, imitator = 1, non_imitator = 2 };
inline constexpr std::array<Group, 3> kGroups = {Group::incumbent, Group::imitator, Group::non_imitator};

inline std::string_view group_name(Group g) {
  switch (g) {
    case Group::incumbent: return "incumbent";
    case Group::imitator: return "imitator";
    case Group::non_imitator: return "non_imitator";
  }
  return "?";
}

inline Group group_of(const Cohort& cohort, std::size_t user) {
  if (cohort.entry_slot[user] == 0) return Group::incumbent;
  return cohort.membership[user] == Membership::imitator ? Group::imitator : Group::non_imitator;
}

struct SlotMetrics {
  int slot = 0;
  // Mean reward per group, empty when the group has no active users.
  std::array<std::optional<double>, 3> mean_reward;
  std::vector<int> per_sbs_load;
  double load_std = 0.0;
  double jain_index = 1.0;

  std::optional<double> reward(Group g) const { return mean_reward[static_cast<std::size_t>(g)]; }
  int active_users() const { return std::accumulate(per_sbs_load.begin(), per_sbs_load.end(), 0); }

  friend bool operator==(const SlotMetrics&, const SlotMetrics&) = default;
};

// Population standard deviation of the per-SBS loads.
inline double load_std(std::span<const int> loads) {
  if (loads.empty()) return 0.0;
  const double n = static_cast<double>(loads.size());
  double mean = 0.0;
  for (int x : loads) mean += x;
  mean /= n;
  double var = 0.0;
  for (int x : loads) var += (x - mean) * (x - mean);
  return std::sqrt(var / n);
}

// (sum x)^2 / (S sum x^2); 1 for an empty network.
inline double jain_index(std::span<const int> loads) {
  double sum = 0.0, sq = 0.0;
  for (int x : loads) {
    sum += x;
    sq += static_cast<double>(x) * x;
  }
  if (sq == 0.0) return 1.0;
  return sum * sum / (static_cast<double>(loads.size()) * sq);
}

struct Agent {
  QApproximator q;
  LoadCache cache;
  Observation obs;
  bool active = false;
  bool imitating = false;
  std::size_t last_action = 0;
  double last_reward = 0.0;

  friend bool operator==(const Agent&, const Agent&) = default;
};

// Full simulation state. A plain value: copying it branches the run.
struct World {
  std::shared_ptr<const NetworkTopology> topology;
  RadioParams radio;
  LearningParams learning;
  Cohort cohort;
  std::vector<std::vector<double>> gains;         // [user][candidate]
  std::vector<std::vector<std::size_t>> similar;  // off-diagonal similarity lists
  AssociationState state;
  std::vector<Agent> agents;
  bool learning_enabled = true;
};

// Imitation only changes anything when the penalty weight is positive; with
// beta = 0 an imitator is a non-imitator in every respect.
inline bool imitates(Membership m, const RadioParams& radio) {
  return m == Membership::imitator && radio.imitation_weight > 0.0;
}

inline World make_world(std::shared_ptr<const NetworkTopology> topology, const RadioParams& radio,
                        const LearningParams& learning, Cohort cohort) {
  if (!topology) throw std::invalid_argument("world needs a topology");
  radio.validate();
  learning.validate();
  const std::size_t U = topology->num_users();
  if (cohort.membership.size() != U || cohort.entry_slot.size() != U)
    throw std::invalid_argument("cohort must cover every user");

  World w;
  w.radio = radio;
  w.learning = learning;
  w.cohort = std::move(cohort);
  w.state = AssociationState(U, topology->num_sbs());
  w.similar = similarity_lists(topology->similarity);
  w.gains.resize(U);
  w.agents.resize(U);
  for (std::size_t u = 0; u < U; ++u) {
    const auto& candidates = topology->candidate_sets[u];
    for (std::size_t s : candidates)
      w.gains[u].push_back(make_link(topology->user_positions[u], topology->sbs_positions[s], radio).gain);
    Agent& a = w.agents[u];
    a.imitating = imitates(w.cohort.membership[u], radio);
    a.q = QApproximator(candidates.size(), observation_length(candidates.size(), a.imitating), learning);
    a.cache = LoadCache(candidates.size());
  }
  w.topology = std::move(topology);
  return w;
}

class simulation_error : public std::runtime_error {
 public:
  simulation_error(const std::string& what, int slot) : std::runtime_error(what), slot_(slot) {}
  int slot() const { return slot_; }

 private:
  int slot_;
};

namespace detail {

inline Observation observe(const World& w, std::size_t u) {
  return build_observation(u, w.state, w.topology->candidate_sets[u], w.agents[u].cache, w.agents[u].imitating,
                           w.similar[u]);
}

}  // namespace detail

// One synchronized slot:
//   activate entrants, every active user picks an action from its slot-start
//   observation, all moves apply at once, rewards come from the post-move
//   state, each user infers its SBS load by bisection, then takes one LMS step
//   toward its EMA target. Users are processed in ascending index order.
inline SlotMetrics step(World& w, int slot, Rng& rng) {
  const auto& topo = *w.topology;
  const std::size_t U = topo.num_users();

  for (std::size_t u = 0; u < U; ++u) {
    Agent& a = w.agents[u];
    if (!a.active && w.cohort.entry_slot[u] <= slot) {
      a.active = true;
      a.obs = detail::observe(w, u);
    }
  }

  std::vector<std::size_t> action(U, 0);
  for (std::size_t u = 0; u < U; ++u) {
    const Agent& a = w.agents[u];
    if (!a.active) continue;
    action[u] = select_action(a.q, a.obs.view(), w.learning.epsilon, rng);
  }

  for (std::size_t u = 0; u < U; ++u)
    if (w.agents[u].active) w.state.assign(u, topo.candidate_sets[u][action[u]]);

  std::array<double, 3> reward_sum{};
  std::array<int, 3> reward_count{};
  std::vector<double> rates(U, 0.0);
  for (std::size_t u = 0; u < U; ++u) {
    Agent& a = w.agents[u];
    if (!a.active) continue;
    const std::size_t sbs = topo.candidate_sets[u][action[u]];
    rates[u] = throughput(w.gains[u][action[u]], w.state.load(sbs), w.radio);
    const double penalty = a.imitating ? imitation_penalty(sbs, w.similar[u], w.state, w.radio) : 0.0;
    a.last_action = action[u];
    a.last_reward = rates[u] - penalty;
    const auto g = static_cast<std::size_t>(group_of(w.cohort, u));
    reward_sum[g] += a.last_reward;
    ++reward_count[g];
  }

  // Imitators know their own penalty (neighbors' choices are visible), so both
  // cohorts invert the throughput part of their reward.
  const int active = w.state.active_users();
  for (std::size_t u = 0; u < U; ++u) {
    Agent& a = w.agents[u];
    if (!a.active) continue;
    try {
      a.cache.record(a.last_action, estimate_load(rates[u], w.gains[u][a.last_action], w.radio, active));
    } catch (const load_estimation_error& e) {
      throw simulation_error(std::string("user ") + std::to_string(u) + ": " + e.what(), slot);
    }
  }

  for (std::size_t u = 0; u < U; ++u) {
    Agent& a = w.agents[u];
    if (!a.active) continue;
    Observation next = detail::observe(w, u);
    if (w.learning_enabled) {
      const double q = a.q.q_value(a.obs.view(), a.last_action);
      const double y = ema_target(q, a.last_reward, a.q.max_q(next.view()), w.learning.ema_alpha, w.learning.discount);
      try {
        a.q.update(a.obs.view(), a.last_action, y);
      } catch (const divergence_error& e) {
        throw simulation_error(std::string("user ") + std::to_string(u) + ": " + e.what(), slot);
      }
    }
    a.obs = std::move(next);
  }

  SlotMetrics m;
  m.slot = slot;
  for (std::size_t g = 0; g < 3; ++g)
    if (reward_count[g] > 0) m.mean_reward[g] = reward_sum[g] / reward_count[g];
  m.per_sbs_load = w.state.loads();
  m.load_std = load_std(m.per_sbs_load);
  m.jain_index = jain_index(m.per_sbs_load);
  return m;
}

// Sim streams are decorrelated from the placement stream, which uses the raw seed.
inline Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
  return Rng(seq);
}

inline std::shared_ptr<const NetworkTopology> make_scenario_topology(const SimConfig& config) {
  PlacementOptions options;
  options.coverage_radius = config.coverage_radius;
  options.graph_radius = config.graph_radius;
  options.similarity_radius = config.similarity_radius;
  return std::make_shared<const NetworkTopology>(
      place_uniform(config.users, config.sbs, config.area_side, config.seed, options));
}

struct TwoPhaseResult {
  std::shared_ptr<const NetworkTopology> topology;
  Cohort cohort;
  std::vector<SlotMetrics> slots;
};

// Phase 1: users [0, n1) learn alone for phase1_slots. Phase 2: imitators
// [n1, n1 + n_imit) and non-imitators [n1 + n_imit, users) enter together.
inline Cohort two_phase_cohort(const SimConfig& config) {
  const std::size_t n1 = config.users - config.phase2_entrants();
  Cohort c;
  c.membership.assign(config.users, Membership::non_imitator);
  c.entry_slot.assign(config.users, 0);
  const int entry = static_cast<int>(config.phase1_slots);
  for (std::size_t u = n1; u < config.users; ++u) {
    c.entry_slot[u] = entry;
    if (u < n1 + config.phase2_imitators) c.membership[u] = Membership::imitator;
  }
  return c;
}

inline TwoPhaseResult run_two_phase(const SimConfig& config, Rng& rng) {
  config.validate_two_phase();
  TwoPhaseResult out;
  out.topology = make_scenario_topology(config);
  out.cohort = two_phase_cohort(config);
  World w = make_world(out.topology, config.radio, config.learning, out.cohort);
  const int total = static_cast<int>(config.phase1_slots + config.phase2_slots);
  out.slots.reserve(static_cast<std::size_t>(total));
  for (int t = 0; t < total; ++t) out.slots.push_back(step(w, t, rng));
  return out;
}

struct BalanceCase {
  Membership entrants = Membership::non_imitator;
  std::vector<SlotMetrics> slots;
  std::vector<double> average_load;  // per SBS over the case slots
  double load_std = 0.0;             // mean of the per-slot standard deviations
  double jain_index = 0.0;           // mean of the per-slot Jain indices
};

struct LoadBalanceResult {
  std::shared_ptr<const NetworkTopology> topology;
  std::vector<SlotMetrics> warmup;
  // cases[0]: entrants imitate, cases[1]: they do not.
  std::array<BalanceCase, 2> cases;
};

inline void summarize_case(BalanceCase& c, std::size_t num_sbs) {
  c.average_load.assign(num_sbs, 0.0);
  c.load_std = 0.0;
  c.jain_index = 0.0;
  if (c.slots.empty()) return;
  for (const auto& m : c.slots) {
    for (std::size_t s = 0; s < num_sbs; ++s) c.average_load[s] += m.per_sbs_load[s];
    c.load_std += m.load_std;
    c.jain_index += m.jain_index;
  }
  const double n = static_cast<double>(c.slots.size());
  for (auto& x : c.average_load) x /= n;
  c.load_std /= n;
  c.jain_index /= n;
}

// Warm up users [0, users - case_entrants) once, then branch the snapshot:
// the remaining users enter as imitators in one branch and as non-imitators
// in the other. Both branches continue from the same RNG state.
inline LoadBalanceResult run_load_balance_cases(const SimConfig& config, Rng& rng) {
  config.validate_load_balance();
  LoadBalanceResult out;
  out.topology = make_scenario_topology(config);
  const std::size_t n1 = config.users - config.case_entrants;
  const int entry = static_cast<int>(config.phase1_slots);

  Cohort base;
  base.membership.assign(config.users, Membership::non_imitator);
  base.entry_slot.assign(config.users, 0);
  for (std::size_t u = n1; u < config.users; ++u) base.entry_slot[u] = kNeverEnters;

  World warm = make_world(out.topology, config.radio, config.learning, base);
  for (int t = 0; t < entry; ++t) out.warmup.push_back(step(warm, t, rng));

  const std::array<Membership, 2> kinds = {Membership::imitator, Membership::non_imitator};
  for (std::size_t k = 0; k < 2; ++k) {
    World branch = warm;
    Rng branch_rng = rng;
    for (std::size_t u = n1; u < config.users; ++u) {
      branch.cohort.membership[u] = kinds[k];
      branch.cohort.entry_slot[u] = entry;
      Agent& a = branch.agents[u];
      a.imitating = imitates(kinds[k], config.radio);
      const std::size_t b = out.topology->candidate_sets[u].size();
      a.q = QApproximator(b, observation_length(b, a.imitating), config.learning);
    }
    BalanceCase& c = out.cases[k];
    c.entrants = kinds[k];
    for (int t = entry; t < entry + static_cast<int>(config.case_slots); ++t)
      c.slots.push_back(step(branch, t, branch_rng));
    summarize_case(c, config.sbs);
  }
  return out;
}

// Trailing moving average; the first window-1 entries average what exists so far.
inline std::vector<double> trailing_average(std::span<const double> values, std::size_t window) {
  if (window == 0) throw std::invalid_argument("window must be >= 1");
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= window) sum -= values[i - window];
    out[i] = sum / static_cast<double>(std::min(window, i + 1));
  }
  return out;
}

// Mean of the last `final_window` values.
inline double final_average(std::span<const double> values, std::size_t final_window) {
  if (values.empty()) return 0.0;
  const std::size_t n = std::min(final_window, values.size());
  return std::accumulate(values.end() - static_cast<std::ptrdiff_t>(n), values.end(), 0.0) / static_cast<double>(n);
}

// First index at which the trailing average reaches `fraction` of the final
// average (measured on the magnitude, so negative rewards work too).
inline std::optional<std::size_t> convergence_index(std::span<const double> values, std::size_t window,
                                                    double fraction = 0.95, std::size_t final_window = 100) {
  if (values.empty()) return std::nullopt;
  const double target = final_average(values, final_window);
  const double threshold = target - (1.0 - fraction) * std::abs(target);
  const auto smoothed = trailing_average(values, window);
  for (std::size_t i = 0; i < smoothed.size(); ++i)
    if (smoothed[i] >= threshold) return i;
  return std::nullopt;
}

struct GroupSeries {
  std::vector<int> slots;
  std::vector<double> rewards;
};

inline GroupSeries group_series(std::span<const SlotMetrics> metrics, Group g) {
  GroupSeries s;
  for (const auto& m : metrics) {
    if (const auto r = m.reward(g)) {
      s.slots.push_back(m.slot);
      s.rewards.push_back(*r);
    }
  }
  return s;
}

// Slot at which a group's smoothed reward settles, or nullopt if it never has users.
inline std::optional<int> convergence_slot(std::span<const SlotMetrics> metrics, Group g, std::size_t window,
                                           double fraction = 0.95, std::size_t final_window = 100) {
  const GroupSeries s = group_series(metrics, g);
  const auto i = convergence_index(s.rewards, window, fraction, final_window);
  if (!i) return std::nullopt;
  return s.slots[*i];
}

struct SettlementReport {
  bool settled = false;      // same association two slots running
  std::size_t period = 0;    // 1 when settled, k > 1 for a k-cycle, 0 if neither
  int detected_at = -1;
};

// Runs the world forward with learning frozen and epsilon = 0, watching for a
// repeated association within `window` slots. Diagnostic only.
inline SettlementReport detect_settlement(World w, int start_slot, Rng rng, int max_slots, std::size_t window = 50) {
  w.learning_enabled = false;
  w.learning.epsilon = 0.0;
  std::vector<std::vector<int>> history;
  for (int t = start_slot; t < start_slot + max_slots; ++t) {
    step(w, t, rng);
    const auto& now = w.state.assignment();
    for (std::size_t back = 1; back <= std::min(window, history.size()); ++back) {
      if (history[history.size() - back] == now)
        return {back == 1, back, t};
    }
    history.push_back(now);
    if (history.size() > window) history.erase(history.begin());
  }
  return {};
}

}  // namespace udn
