#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace udn {

using Rng = std::mt19937_64;

struct LearningParams {
  double learning_rate = 0.05;  // lambda
  double ema_alpha = 0.3;       // alpha
  double discount = 0.9;        // gamma
  double epsilon = 0.1;

  void validate() const {
    if (!(learning_rate > 0.0 && std::isfinite(learning_rate))) throw std::invalid_argument("learning_rate must be > 0");
    if (!(ema_alpha >= 0.0 && ema_alpha <= 1.0)) throw std::invalid_argument("ema_alpha must lie in [0, 1]");
    if (!(discount >= 0.0 && discount < 1.0)) throw std::invalid_argument("discount must lie in [0, 1)");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("epsilon must lie in [0, 1]");
  }

  friend bool operator==(const LearningParams&, const LearningParams&) = default;
};

class divergence_error : public std::runtime_error {
 public:
  divergence_error(const std::string& what, std::size_t action, double weight, double bias)
      : std::runtime_error(what), action_(action), weight_(weight), bias_(bias) {}

  std::size_t action() const { return action_; }
  double weight() const { return weight_; }
  double bias() const { return bias_; }

 private:
  std::size_t action_;
  double weight_;
  double bias_;
};

// y = (1 - alpha) Q + alpha (r + gamma max_n Q').
inline double ema_target(double q_current, double reward, double q_max_next, double alpha, double gamma) {
  return (1.0 - alpha) * q_current + alpha * (reward + gamma * q_max_next);
}

// One adaptive linear neuron per action: Q(e, a_n) = w_n . x + b_n.
class QApproximator {
 public:
  QApproximator() = default;
  QApproximator(std::size_t num_actions, std::size_t feature_length, LearningParams params = {})
      : actions_(num_actions),
        length_(feature_length),
        weights_(num_actions * feature_length, 0.0),
        bias_(num_actions, 0.0),
        params_(params) {
    if (num_actions == 0) throw std::invalid_argument("need at least one action");
    params_.validate();
  }

  std::size_t num_actions() const { return actions_; }
  std::size_t feature_length() const { return length_; }
  const LearningParams& params() const { return params_; }

  std::span<const double> weights(std::size_t action) const {
    return std::span<const double>(weights_).subspan(action * length_, length_);
  }
  std::span<double> weights(std::size_t action) {
    return std::span<double>(weights_).subspan(action * length_, length_);
  }
  double bias(std::size_t action) const { return bias_.at(action); }
  void set_bias(std::size_t action, double value) { bias_.at(action) = value; }

  double q_value(std::span<const double> x, std::size_t action) const {
    check(x, action);
    const auto w = weights(action);
    double q = bias_[action];
    for (std::size_t i = 0; i < length_; ++i) q += w[i] * x[i];
    return q;
  }

  // Highest-valued action, lowest index on ties.
  std::size_t greedy_action(std::span<const double> x) const {
    std::size_t best = 0;
    double best_q = q_value(x, 0);
    for (std::size_t a = 1; a < actions_; ++a) {
      const double q = q_value(x, a);
      if (q > best_q) {
        best_q = q;
        best = a;
      }
    }
    return best;
  }

  double max_q(std::span<const double> x) const { return q_value(x, greedy_action(x)); }

  // Widrow-Hoff (LMS) step on the chosen action only:
  //   w_n += lambda (y - Q) x,  b_n += lambda (y - Q).
  void update(std::span<const double> x, std::size_t action, double target) {
    if (!std::isfinite(target)) throw divergence_error("non-finite target", action, 0.0, bias_.at(action));
    const double error = target - q_value(x, action);
    const double step = params_.learning_rate * error;
    auto w = weights(action);
    for (std::size_t i = 0; i < length_; ++i) {
      w[i] += step * x[i];
      if (!std::isfinite(w[i])) {
        std::ostringstream msg;
        msg << "weight " << i << " of action " << action << " diverged to " << w[i];
        throw divergence_error(msg.str(), action, w[i], bias_[action]);
      }
    }
    bias_[action] += step;
    if (!std::isfinite(bias_[action])) {
      std::ostringstream msg;
      msg << "bias of action " << action << " diverged to " << bias_[action];
      throw divergence_error(msg.str(), action, 0.0, bias_[action]);
    }
  }

  friend bool operator==(const QApproximator&, const QApproximator&) = default;

 private:
  void check(std::span<const double> x, std::size_t action) const {
    if (action >= actions_) throw std::invalid_argument("action index out of range");
    if (x.size() != length_) throw std::invalid_argument("feature length mismatch");
  }

  std::size_t actions_ = 0;
  std::size_t length_ = 0;
  std::vector<double> weights_;
  std::vector<double> bias_;
  LearningParams params_;
};

// Epsilon-greedy. Always consumes one uniform draw, plus one index draw when exploring.
inline std::size_t select_action(const QApproximator& approx, std::span<const double> x, double epsilon, Rng& rng) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<std::size_t> pick(0, approx.num_actions() - 1);
    return pick(rng);
  }
  return approx.greedy_action(x);
}

inline std::size_t select_action(const QApproximator& approx, std::span<const double> x, Rng& rng) {
  return select_action(approx, x, approx.params().epsilon, rng);
}

}  // namespace udn
