#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace udn {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Dense square boolean matrix. Used for the SBS graph and user similarity.
class BoolMatrix {
 public:
  BoolMatrix() = default;
  explicit BoolMatrix(std::size_t n, bool value = false)
      : n_(n), cells_(n * n, value ? 1 : 0) {}

  std::size_t size() const { return n_; }

  bool operator()(std::size_t i, std::size_t j) const { return cells_[i * n_ + j] != 0; }

  void set(std::size_t i, std::size_t j, bool value) { cells_[i * n_ + j] = value ? 1 : 0; }

  void set_symmetric(std::size_t i, std::size_t j, bool value) {
    set(i, j, value);
    set(j, i, value);
  }

  bool is_symmetric() const {
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j)
        if ((*this)(i, j) != (*this)(j, i)) return false;
    return true;
  }

  static BoolMatrix identity(std::size_t n) {
    BoolMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
  }

  friend bool operator==(const BoolMatrix&, const BoolMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> cells_;
};

// Static deployment: who is where, which SBSs each user can reach, which SBSs
// neighbor each other, and which users count as similar.
struct NetworkTopology {
  std::vector<Point> user_positions;
  std::vector<Point> sbs_positions;
  // Symmetric, no self-loops. Self-transitions are always allowed implicitly.
  BoolMatrix sbs_adjacency;
  // Nonempty, sorted ascending by SBS index.
  std::vector<std::vector<std::size_t>> candidate_sets;
  // Symmetric with a true diagonal.
  BoolMatrix similarity;

  std::size_t num_users() const { return user_positions.size(); }
  std::size_t num_sbs() const { return sbs_positions.size(); }

  friend bool operator==(const NetworkTopology&, const NetworkTopology&) = default;
};

struct PlacementOptions {
  // Users reach every SBS within this distance. Defaults to half the area side.
  std::optional<double> coverage_radius;
  // SBSs closer than this are graph neighbors. Defaults to half the area side.
  std::optional<double> graph_radius;
  double similarity_radius = 50.0;
};

// Users within `coverage_radius` of an SBS may associate with it. A user out of
// range of every SBS gets its nearest one (lowest index on ties).
inline std::vector<std::vector<std::size_t>> compute_candidate_sets(
    const std::vector<Point>& users, const std::vector<Point>& sbss, double coverage_radius) {
  if (coverage_radius < 0.0) throw std::invalid_argument("coverage radius must be >= 0");
  if (sbss.empty()) throw std::invalid_argument("at least one SBS is required");
  std::vector<std::vector<std::size_t>> sets(users.size());
  for (std::size_t u = 0; u < users.size(); ++u) {
    std::size_t nearest = 0;
    double nearest_d = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < sbss.size(); ++s) {
      const double d = distance(users[u], sbss[s]);
      if (d <= coverage_radius) sets[u].push_back(s);
      if (d < nearest_d) {
        nearest_d = d;
        nearest = s;
      }
    }
    if (sets[u].empty()) sets[u].push_back(nearest);
  }
  return sets;
}

inline BoolMatrix compute_similarity(const std::vector<Point>& users, double d_sim) {
  if (!(d_sim >= 0.0)) throw std::invalid_argument("similarity radius must be >= 0");
  BoolMatrix f(users.size());
  for (std::size_t u = 0; u < users.size(); ++u) {
    f.set(u, u, true);
    for (std::size_t v = u + 1; v < users.size(); ++v)
      f.set_symmetric(u, v, distance(users[u], users[v]) <= d_sim);
  }
  return f;
}

inline BoolMatrix compute_similarity(const NetworkTopology& topology, double d_sim) {
  return compute_similarity(topology.user_positions, d_sim);
}

inline bool is_connected(const BoolMatrix& adjacency) {
  const std::size_t n = adjacency.size();
  if (n == 0) return true;
  std::vector<std::uint8_t> seen(n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < n; ++j) {
      if (!seen[j] && adjacency(i, j)) {
        seen[j] = 1;
        ++reached;
        stack.push_back(j);
      }
    }
  }
  return reached == n;
}

// Edge (i, j) iff 0 < d(i, j) <= radius. A disconnected result is replaced by
// the complete graph so every SBS stays reachable.
inline BoolMatrix build_sbs_graph(const std::vector<Point>& sbss, double radius) {
  if (!(radius >= 0.0)) throw std::invalid_argument("graph radius must be >= 0");
  const std::size_t n = sbss.size();
  BoolMatrix adjacency(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = distance(sbss[i], sbss[j]);
      adjacency.set_symmetric(i, j, d > 0.0 && d <= radius);
    }
  }
  if (!is_connected(adjacency)) {
    adjacency = BoolMatrix(n, true);
    for (std::size_t i = 0; i < n; ++i) adjacency.set(i, i, false);
  }
  return adjacency;
}

inline BoolMatrix build_sbs_graph(const NetworkTopology& topology, double radius) {
  return build_sbs_graph(topology.sbs_positions, radius);
}

// Builds a topology from explicit positions. Radii fall back to `default_radius`.
inline NetworkTopology make_topology(std::vector<Point> users, std::vector<Point> sbss,
                                     const PlacementOptions& options, double default_radius) {
  if (users.empty() || sbss.empty())
    throw std::invalid_argument("topology needs at least one user and one SBS");
  NetworkTopology t;
  t.user_positions = std::move(users);
  t.sbs_positions = std::move(sbss);
  t.candidate_sets = compute_candidate_sets(t.user_positions, t.sbs_positions,
                                            options.coverage_radius.value_or(default_radius));
  t.sbs_adjacency = build_sbs_graph(t.sbs_positions, options.graph_radius.value_or(default_radius));
  t.similarity = compute_similarity(t.user_positions, options.similarity_radius);
  return t;
}

// Users and SBSs i.i.d. uniform on [0, area_side]^2. Pure function of its arguments.
inline NetworkTopology place_uniform(std::size_t num_users, std::size_t num_sbs, double area_side,
                                     std::uint64_t seed, const PlacementOptions& options = {}) {
  if (num_users == 0) throw std::invalid_argument("num_users must be >= 1");
  if (num_sbs == 0) throw std::invalid_argument("num_sbs must be >= 1");
  if (!(area_side > 0.0) || !std::isfinite(area_side))
    throw std::invalid_argument("area_side must be positive");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, area_side);
  std::vector<Point> sbss(num_sbs);
  for (auto& p : sbss) {
    p.x = coord(rng);
    p.y = coord(rng);
  }
  std::vector<Point> users(num_users);
  for (auto& p : users) {
    p.x = coord(rng);
    p.y = coord(rng);
  }
  return make_topology(std::move(users), std::move(sbss), options, area_side / 2.0);
}

// Off-diagonal similarity neighbors of every user, ascending.
inline std::vector<std::vector<std::size_t>> similarity_lists(const BoolMatrix& similarity) {
  std::vector<std::vector<std::size_t>> lists(similarity.size());
  for (std::size_t u = 0; u < similarity.size(); ++u)
    for (std::size_t v = 0; v < similarity.size(); ++v)
      if (v != u && similarity(u, v)) lists[u].push_back(v);
  return lists;
}

}  // namespace udn
