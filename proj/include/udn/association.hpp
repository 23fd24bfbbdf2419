#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace udn {

inline constexpr int kUnassociated = -1;

// Per-SBS load vector x(t) together with the per-user assignment it counts.
class AssociationState {
 public:
  AssociationState() = default;
  AssociationState(std::size_t num_users, std::size_t num_sbs)
      : assignment_(num_users, kUnassociated), loads_(num_sbs, 0) {}

  std::size_t num_users() const { return assignment_.size(); }
  std::size_t num_sbs() const { return loads_.size(); }

  int sbs_of(std::size_t user) const { return assignment_[user]; }
  bool associated(std::size_t user) const { return assignment_[user] != kUnassociated; }
  int load(std::size_t sbs) const { return loads_[sbs]; }

  const std::vector<int>& assignment() const { return assignment_; }
  const std::vector<int>& loads() const { return loads_; }

  int active_users() const { return active_; }

  void assign(std::size_t user, std::size_t sbs) {
    if (sbs >= loads_.size()) throw std::out_of_range("SBS index out of range");
    detach(user);
    assignment_[user] = static_cast<int>(sbs);
    ++loads_[sbs];
    ++active_;
  }

  void detach(std::size_t user) {
    const int current = assignment_.at(user);
    if (current == kUnassociated) return;
    --loads_[static_cast<std::size_t>(current)];
    --active_;
    assignment_[user] = kUnassociated;
  }

  // loads[s] == |{u : assignment[u] == s}| and the loads sum to the active count.
  bool consistent() const {
    std::vector<int> recount(loads_.size(), 0);
    int active = 0;
    for (int s : assignment_) {
      if (s == kUnassociated) continue;
      if (s < 0 || static_cast<std::size_t>(s) >= loads_.size()) return false;
      ++recount[static_cast<std::size_t>(s)];
      ++active;
    }
    return recount == loads_ && active == active_ &&
           std::accumulate(loads_.begin(), loads_.end(), 0) == active_;
  }

  friend bool operator==(const AssociationState&, const AssociationState&) = default;

 private:
  std::vector<int> assignment_;
  std::vector<int> loads_;
  int active_ = 0;
};

}  // namespace udn
