#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <vector>

#include "udn/learning.hpp"
#include "udn/radio.hpp"

namespace udn {

class config_error : public std::runtime_error {
 public:
  config_error(const std::string& source, std::size_t line, const std::string& key, const std::string& what)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + (key.empty() ? "" : "'" + key + "': ") + what),
        line_(line),
        key_(key) {}
  explicit config_error(const std::string& what) : std::runtime_error(what) {}

  std::size_t line() const { return line_; }
  const std::string& key() const { return key_; }

 private:
  std::size_t line_ = 0;
  std::string key_;
};

struct SeedRange {
  std::uint64_t first = 0;
  std::uint64_t last = 0;

  friend bool operator==(const SeedRange&, const SeedRange&) = default;
};

struct SimConfig {
  // Deployment.
  std::size_t users = 700;
  std::size_t sbs = 10;
  double area_side = 1000.0;
  std::optional<double> coverage_radius;  // default area_side / 2
  std::optional<double> graph_radius;     // default area_side / 2
  double similarity_radius = 50.0;

  RadioParams radio;
  LearningParams learning;

  // Two-phase scenario. Phase-1 users are whatever remains of `users`.
  std::size_t phase2_imitators = 100;
  std::size_t phase2_non_imitators = 100;
  std::size_t phase1_slots = 500;
  std::size_t phase2_slots = 500;

  // Load-balance case study: warm-up with users - case_entrants, then branch.
  std::size_t case_entrants = 200;
  std::size_t case_slots = 100;

  // Mean-field solver.
  std::size_t mfg_horizon = 10;
  std::size_t mfg_max_iters = 500;
  double mfg_damping = 0.5;
  double mfg_tol = 1e-8;
  std::vector<double> mfg_pi0;  // empty: nearest-SBS shares

  std::uint64_t seed = 42;
  std::optional<SeedRange> seeds;
  std::string output_dir = "out";
  std::size_t smooth_window = 50;

  std::size_t phase2_entrants() const { return phase2_imitators + phase2_non_imitators; }

  // Per-key ranges.
  void validate() const {
    auto require = [](bool ok, const std::string& what) {
      if (!ok) throw config_error(what);
    };
    require(users >= 1, "users must be >= 1");
    require(sbs >= 1, "sbs must be >= 1");
    require(area_side > 0.0 && std::isfinite(area_side), "area_side must be > 0");
    require(!coverage_radius || *coverage_radius >= 0.0, "coverage_radius must be >= 0");
    require(!graph_radius || *graph_radius >= 0.0, "graph_radius must be >= 0");
    require(similarity_radius >= 0.0 && std::isfinite(similarity_radius), "similarity_radius must be >= 0");
    try {
      radio.validate();
      learning.validate();
    } catch (const std::invalid_argument& e) {
      throw config_error(e.what());
    }
    require(mfg_horizon >= 1, "mfg_horizon must be >= 1");
    require(mfg_max_iters >= 1, "mfg_max_iters must be >= 1");
    require(mfg_damping > 0.0 && mfg_damping <= 1.0, "mfg_damping must lie in (0, 1]");
    require(mfg_tol > 0.0, "mfg_tol must be > 0");
    require(smooth_window >= 1, "smooth must be >= 1");
    require(!seeds || seeds->first <= seeds->last, "seeds range must be ascending");
  }

  // Cross-field checks, run before a scenario starts.
  void validate_two_phase() const {
    validate();
    if (phase2_entrants() >= users) throw config_error("phase-2 entrants must leave at least one phase-1 user");
    if (phase1_slots < 1) throw config_error("phase1_slots must be >= 1");
  }

  void validate_load_balance() const {
    validate();
    if (case_entrants >= users) throw config_error("case_entrants must leave at least one warm-up user");
    if (phase1_slots < 1 || case_slots < 1) throw config_error("phase1_slots and case_slots must be >= 1");
  }

  void validate_mfg() const {
    validate();
    if (!mfg_pi0.empty()) {
      if (mfg_pi0.size() != sbs) throw config_error("mfg_pi0 needs one entry per SBS");
      double sum = 0.0;
      for (double p : mfg_pi0) {
        if (!(p >= 0.0)) throw config_error("mfg_pi0 entries must be >= 0");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) throw config_error("mfg_pi0 must sum to 1");
    }
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if (text.empty()) return false;
  if constexpr (std::is_floating_point_v<T>) {
    // strtod accepts forms from_chars does not (leading '+'), and vice versa is irrelevant here.
    std::string buf(text);
    char* end = nullptr;
    const double v = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size() || !std::isfinite(v)) return false;
    out = static_cast<T>(v);
    return true;
  } else {
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc() && ptr == text.data() + text.size();
  }
}

}  // namespace detail

// Flat `key = value` lines, '#' starts a comment, keys are case-sensitive.
// Missing keys keep their defaults; unknown keys are rejected.
inline SimConfig parse_config_text(std::string_view text, const std::string& source = "<config>") {
  SimConfig cfg;
  using Setter = std::function<bool(std::string_view)>;
  auto real = [](double& field) -> Setter { return [&field](std::string_view v) { return detail::parse_number(v, field); }; };
  auto count = [](std::size_t& field) -> Setter { return [&field](std::string_view v) { return detail::parse_number(v, field); }; };
  auto optional_real = [](std::optional<double>& field) -> Setter {
    return [&field](std::string_view v) {
      double x = 0.0;
      if (!detail::parse_number(v, x)) return false;
      field = x;
      return true;
    };
  };

  const std::map<std::string, Setter, std::less<>> setters = {
      {"users", count(cfg.users)},
      {"sbs", count(cfg.sbs)},
      {"area_side", real(cfg.area_side)},
      {"coverage_radius", optional_real(cfg.coverage_radius)},
      {"graph_radius", optional_real(cfg.graph_radius)},
      {"similarity_radius", real(cfg.similarity_radius)},
      {"bandwidth", real(cfg.radio.bandwidth_hz)},
      {"carrier_freq", real(cfg.radio.carrier_freq_hz)},
      {"pathloss_exp", real(cfg.radio.pathloss_exponent)},
      {"noise_density", real(cfg.radio.noise_density_dbm_hz)},
      {"tx_power", real(cfg.radio.tx_power_w)},
      {"iota", real(cfg.radio.interference_coeff)},
      {"kappa", real(cfg.radio.congestion_coeff)},
      {"beta", real(cfg.radio.imitation_weight)},
      {"learning_rate", real(cfg.learning.learning_rate)},
      {"alpha", real(cfg.learning.ema_alpha)},
      {"gamma", real(cfg.learning.discount)},
      {"epsilon", real(cfg.learning.epsilon)},
      {"phase2_imitators", count(cfg.phase2_imitators)},
      {"phase2_non_imitators", count(cfg.phase2_non_imitators)},
      {"phase1_slots", count(cfg.phase1_slots)},
      {"phase2_slots", count(cfg.phase2_slots)},
      {"case_entrants", count(cfg.case_entrants)},
      {"case_slots", count(cfg.case_slots)},
      {"mfg_horizon", count(cfg.mfg_horizon)},
      {"mfg_max_iters", count(cfg.mfg_max_iters)},
      {"mfg_damping", real(cfg.mfg_damping)},
      {"mfg_tol", real(cfg.mfg_tol)},
      {"mfg_pi0",
       [&cfg](std::string_view v) {
         cfg.mfg_pi0.clear();
         while (!v.empty()) {
           const auto comma = v.find(',');
           double x = 0.0;
           if (!detail::parse_number(detail::trim(v.substr(0, comma)), x)) return false;
           cfg.mfg_pi0.push_back(x);
           if (comma == std::string_view::npos) break;
           v.remove_prefix(comma + 1);
         }
         return !cfg.mfg_pi0.empty();
       }},
      {"seed", [&cfg](std::string_view v) { return detail::parse_number(v, cfg.seed); }},
      {"seeds",
       [&cfg](std::string_view v) {
         const auto dots = v.find("..");
         if (dots == std::string_view::npos) return false;
         SeedRange r;
         if (!detail::parse_number(detail::trim(v.substr(0, dots)), r.first) ||
             !detail::parse_number(detail::trim(v.substr(dots + 2)), r.last))
           return false;
         cfg.seeds = r;
         return true;
       }},
      {"out", [&cfg](std::string_view v) {
         cfg.output_dir = std::string(v);
         return !v.empty();
       }},
      {"smooth", count(cfg.smooth_window)},
  };

  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw config_error(source, line_no, "", "expected 'key = value'");
    const std::string key(detail::trim(line.substr(0, eq)));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) throw config_error(source, line_no, key, "unknown key");
    if (!it->second(value)) throw config_error(source, line_no, key, "malformed value '" + std::string(value) + "'");
    // Range checks run per line so the error can name it.
    try {
      cfg.validate();
    } catch (const config_error& e) {
      throw config_error(source, line_no, key, e.what());
    }
  }
  cfg.validate();
  return cfg;
}

inline SimConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot read config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str(), path);
}

}  // namespace udn
