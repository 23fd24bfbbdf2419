#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "udn/mfg.hpp"
#include "udn/sim.hpp"

namespace udn {

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shortest decimal that round-trips to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw std::runtime_error("cannot format double");
  return std::string(buf, ptr);
}

inline std::string format_optional(const std::optional<double>& x) { return x ? format_double(*x) : std::string(); }

class Csv {
 public:
  explicit Csv(std::string_view header) { text_.append(header).push_back('\n'); }

  Csv& cell(std::string_view v) {
    if (!at_line_start_) text_.push_back(',');
    text_.append(v);
    at_line_start_ = false;
    return *this;
  }
  Csv& cell(double v) { return cell(format_double(v)); }
  Csv& cell(std::int64_t v) { return cell(std::to_string(v)); }
  Csv& cell(int v) { return cell(static_cast<std::int64_t>(v)); }
  Csv& cell(std::size_t v) { return cell(std::to_string(v)); }
  Csv& cell(const std::optional<double>& v) { return cell(format_optional(v)); }
  Csv& end_row() {
    text_.push_back('\n');
    at_line_start_ = true;
    return *this;
  }

  const std::string& text() const { return text_; }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot open " + path.string() + " for writing");
    out.write(text_.data(), static_cast<std::streamsize>(text_.size()));
    if (!out) throw io_error("failed writing " + path.string());
  }

 private:
  std::string text_;
  bool at_line_start_ = true;
};

inline void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) throw io_error("cannot create output directory " + dir.string());
}

// One row per slot per group; a group without active users gets an empty reward.
inline Csv metrics_table(std::span<const SlotMetrics> metrics) {
  Csv csv("slot,cohort,mean_reward,load_std,jain_index");
  for (const auto& m : metrics)
    for (Group g : kGroups)
      csv.cell(m.slot).cell(group_name(g)).cell(m.reward(g)).cell(m.load_std).cell(m.jain_index).end_row();
  return csv;
}

// Trailing moving average of each group's reward over the slots where it is present.
inline Csv smoothed_table(std::span<const SlotMetrics> metrics, std::size_t window) {
  std::vector<std::vector<std::optional<double>>> smoothed(kGroups.size(),
                                                           std::vector<std::optional<double>>(metrics.size()));
  for (Group g : kGroups) {
    const auto gi = static_cast<std::size_t>(g);
    std::vector<double> values;
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < metrics.size(); ++i) {
      if (const auto r = metrics[i].reward(g)) {
        values.push_back(*r);
        rows.push_back(i);
      }
    }
    const auto avg = trailing_average(values, window);
    for (std::size_t k = 0; k < rows.size(); ++k) smoothed[gi][rows[k]] = avg[k];
  }
  Csv csv("slot,cohort,mean_reward_smoothed");
  for (std::size_t i = 0; i < metrics.size(); ++i)
    for (Group g : kGroups)
      csv.cell(metrics[i].slot).cell(group_name(g)).cell(smoothed[static_cast<std::size_t>(g)][i]).end_row();
  return csv;
}

inline Csv loads_table(std::span<const SlotMetrics> metrics, std::size_t num_sbs) {
  std::string header = "slot";
  for (std::size_t s = 0; s < num_sbs; ++s) header += ",sbs" + std::to_string(s);
  Csv csv(header);
  for (const auto& m : metrics) {
    csv.cell(m.slot);
    for (int load : m.per_sbs_load) csv.cell(load);
    csv.end_row();
  }
  return csv;
}

inline Csv two_phase_summary(const TwoPhaseResult& result, std::size_t smooth_window) {
  Csv csv("cohort,entry_slot,users,convergence_slot,final_mean_reward");
  for (Group g : kGroups) {
    std::size_t users = 0;
    std::optional<int> entry;
    for (std::size_t u = 0; u < result.cohort.size(); ++u) {
      if (group_of(result.cohort, u) != g) continue;
      ++users;
      entry = entry ? std::min(*entry, result.cohort.entry_slot[u]) : result.cohort.entry_slot[u];
    }
    const GroupSeries series = group_series(result.slots, g);
    const auto conv = convergence_slot(result.slots, g, smooth_window);
    csv.cell(group_name(g)).cell(entry ? std::to_string(*entry) : std::string()).cell(users);
    csv.cell(conv ? std::to_string(*conv) : std::string());
    csv.cell(series.rewards.empty() ? std::optional<double>() : std::optional<double>(final_average(series.rewards, 100)));
    csv.end_row();
  }
  return csv;
}

inline Csv balance_table(const LoadBalanceResult& result) {
  Csv csv("case,entrants,sbs,average_load");
  for (std::size_t k = 0; k < result.cases.size(); ++k) {
    const auto& c = result.cases[k];
    const std::string_view kind = c.entrants == Membership::imitator ? "imitator" : "non_imitator";
    for (std::size_t s = 0; s < c.average_load.size(); ++s)
      csv.cell(k + 1).cell(kind).cell(s).cell(c.average_load[s]).end_row();
  }
  return csv;
}

inline Csv balance_summary(const LoadBalanceResult& result) {
  Csv csv("case,entrants,load_std,jain_index");
  for (std::size_t k = 0; k < result.cases.size(); ++k) {
    const auto& c = result.cases[k];
    csv.cell(k + 1).cell(c.entrants == Membership::imitator ? "imitator" : "non_imitator");
    csv.cell(c.load_std).cell(c.jain_index).end_row();
  }
  return csv;
}

inline Csv trajectory_table(const mfg::MfgSolution& solution) {
  const std::size_t S = solution.pi.empty() ? 0 : static_cast<std::size_t>(solution.pi.front().size());
  std::string header = "t";
  for (std::size_t s = 0; s < S; ++s) header += ",pi_" + std::to_string(s);
  for (std::size_t s = 0; s < S; ++s) header += ",V_" + std::to_string(s);
  Csv csv(header);
  for (std::size_t t = 0; t < solution.pi.size(); ++t) {
    csv.cell(t);
    for (std::size_t s = 0; s < S; ++s) csv.cell(solution.pi[t](static_cast<Eigen::Index>(s)));
    for (std::size_t s = 0; s < S; ++s) csv.cell(solution.value[t](static_cast<Eigen::Index>(s)));
    csv.end_row();
  }
  return csv;
}

// Row-stochastic policy per slot, one row per (t, s).
inline Csv policy_table(const mfg::MfgSolution& solution) {
  const std::size_t S = solution.pi.empty() ? 0 : static_cast<std::size_t>(solution.pi.front().size());
  std::string header = "t,from";
  for (std::size_t j = 0; j < S; ++j) header += ",to_" + std::to_string(j);
  Csv csv(header);
  for (std::size_t t = 0; t < solution.policy.size(); ++t)
    for (std::size_t s = 0; s < S; ++s) {
      csv.cell(t).cell(s);
      for (std::size_t j = 0; j < S; ++j)
        csv.cell(solution.policy[t](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)));
      csv.end_row();
    }
  return csv;
}

inline Csv mfg_summary(const mfg::MfgSolution& solution) {
  Csv csv("converged,iterations,residual");
  csv.cell(solution.converged ? "true" : "false").cell(solution.iterations).cell(solution.residual).end_row();
  return csv;
}

}  // namespace udn
