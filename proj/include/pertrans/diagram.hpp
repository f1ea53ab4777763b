#pragma once

// Persistence diagrams of the upper-level set filtration and the bottleneck
// distance between them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <ostream>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "pertrans/core.hpp"
#include "pertrans/persistence.hpp"

namespace pertrans {

struct DiagramPoint {
  double birth = 0.0;
  double death = 0.0;

  friend auto operator<=>(const DiagramPoint&, const DiagramPoint&) = default;
};

/// Multiset of (birth, death) points with birth >= death.
class PersistenceDiagram {
 public:
  PersistenceDiagram() = default;
  explicit PersistenceDiagram(std::vector<DiagramPoint> points) : points_(std::move(points)) {
    for (const auto& p : points_)
      if (!std::isfinite(p.birth) || !std::isfinite(p.death) || p.birth < p.death)
        throw ValidationError("diagram point must be finite with birth >= death");
  }

  std::span<const DiagramPoint> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

  /// Multiset equality.
  friend bool operator==(const PersistenceDiagram& a, const PersistenceDiagram& b) {
    if (a.size() != b.size()) return false;
    auto x = a.points_, y = b.points_;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    return x == y;
  }

 private:
  std::vector<DiagramPoint> points_;
};

/// Projection (x, birth, death) -> (birth, death).
inline PersistenceDiagram to_diagram(std::span<const FeatureTriple> triples) {
  std::vector<DiagramPoint> pts;
  pts.reserve(triples.size());
  for (const auto& t : triples) pts.push_back({t.birth, t.death});
  return PersistenceDiagram(std::move(pts));
}

/// L-infinity distance from a point to the diagonal.
inline double diagonal_distance(const DiagramPoint& p) { return (p.birth - p.death) / 2.0; }

inline double linf_distance(const DiagramPoint& a, const DiagramPoint& b) {
  return std::max(std::fabs(a.birth - b.birth), std::fabs(a.death - b.death));
}

namespace detail {

/// Hopcroft-Karp on a dense boolean adjacency; returns whether a perfect
/// matching of the n x n bipartite graph exists.
class PerfectMatcher {
 public:
  explicit PerfectMatcher(std::size_t n) : n_(n), adj_(n) {}

  void add_edge(std::size_t left, std::size_t right) { adj_[left].push_back(right); }

  bool perfect() {
    match_l_.assign(n_, kFree);
    match_r_.assign(n_, kFree);
    std::size_t matched = 0;
    while (bfs()) {
      for (std::size_t u = 0; u < n_; ++u)
        if (match_l_[u] == kFree && dfs(u)) ++matched;
    }
    return matched == n_;
  }

 private:
  static constexpr std::size_t kFree = std::numeric_limits<std::size_t>::max();

  bool bfs() {
    dist_.assign(n_, kFree);
    std::queue<std::size_t> queue;
    for (std::size_t u = 0; u < n_; ++u)
      if (match_l_[u] == kFree) {
        dist_[u] = 0;
        queue.push(u);
      }
    bool reachable_free = false;
    while (!queue.empty()) {
      const auto u = queue.front();
      queue.pop();
      for (auto v : adj_[u]) {
        const auto w = match_r_[v];
        if (w == kFree) {
          reachable_free = true;
        } else if (dist_[w] == kFree) {
          dist_[w] = dist_[u] + 1;
          queue.push(w);
        }
      }
    }
    return reachable_free;
  }

  bool dfs(std::size_t u) {
    for (auto v : adj_[u]) {
      const auto w = match_r_[v];
      if (w == kFree || (dist_[w] == dist_[u] + 1 && dfs(w))) {
        match_l_[u] = v;
        match_r_[v] = u;
        return true;
      }
    }
    dist_[u] = kFree;
    return false;
  }

  std::size_t n_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> match_l_, match_r_, dist_;
};

/// Can d1 and d2 be matched (with diagonal projections) at cost <= delta?
/// Left side: points of d1 then diagonal copies of d2; right side: points of
/// d2 then diagonal copies of d1.
inline bool matchable_within(std::span<const DiagramPoint> a, std::span<const DiagramPoint> b,
                             double delta) {
  const std::size_t na = a.size(), nb = b.size(), n = na + nb;
  PerfectMatcher matcher(n);
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j < nb; ++j)
      if (linf_distance(a[i], b[j]) <= delta) matcher.add_edge(i, j);
    if (diagonal_distance(a[i]) <= delta) matcher.add_edge(i, nb + i);
  }
  for (std::size_t j = 0; j < nb; ++j) {
    if (diagonal_distance(b[j]) <= delta) matcher.add_edge(na + j, j);
    for (std::size_t i = 0; i < na; ++i) matcher.add_edge(na + j, nb + i);
  }
  return matcher.perfect();
}

}  // namespace detail

/// Bottleneck distance: the smallest delta admitting a perfect matching in
/// which every point is paired with a point of the other diagram or with its
/// own diagonal projection at L-infinity cost <= delta. The optimum is one of
/// finitely many candidate costs, so the search is over that sorted set.
inline double bottleneck_distance(const PersistenceDiagram& d1, const PersistenceDiagram& d2) {
  const auto a = d1.points(), b = d2.points();
  std::vector<double> candidates{0.0};
  candidates.reserve(1 + a.size() * b.size() + a.size() + b.size());
  for (const auto& p : a) {
    candidates.push_back(diagonal_distance(p));
    for (const auto& r : b) candidates.push_back(linf_distance(p, r));
  }
  for (const auto& r : b) candidates.push_back(diagonal_distance(r));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::size_t lo = 0, hi = candidates.size() - 1;  // candidates[hi] is always feasible
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (detail::matchable_within(a, b, candidates[mid]))
      hi = mid;
    else
      lo = mid + 1;
  }
  return candidates[lo];
}

/// Diagram CSV: "birth,death" per line.
inline void write_diagram_csv(const PersistenceDiagram& d, std::ostream& out) {
  for (const auto& p : d.points())
    out << detail::format_double(p.birth) << ',' << detail::format_double(p.death) << '\n';
}

inline PersistenceDiagram parse_diagram_csv(std::istream& in) {
  std::vector<DiagramPoint> pts;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::blank(line)) continue;
    auto fields = detail::split(line);
    DiagramPoint p;
    if (fields.size() != 2 || !detail::parse_double(fields[0], p.birth) ||
        !detail::parse_double(fields[1], p.death))
      throw ValidationError("malformed diagram line " + std::to_string(lineno) +
                            ": expected 'birth,death'");
    pts.push_back(p);
  }
  return PersistenceDiagram(std::move(pts));
}

}  // namespace pertrans
