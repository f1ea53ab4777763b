#pragma once

// Persistence transformation of a 1-D signal under the upper-level set
// filtration.
//
// Every local maximum x becomes a feature (x, f(x), mu(x)) where mu(x) is the
// level at which its component joins an elder one; the global maximum dies at
// the global minimum of f. Elder = higher birth, then smaller position.
//
// Extremum conventions:
//   * a maximal run of equal values whose neighbours are all strictly smaller
//     (resp. larger) is one maximum (resp. minimum), anchored at the run's
//     leftmost index;
//   * the array ends have a single neighbour and follow the same rule;
//   * a run with no neighbours at all (constant signal) is a maximum only.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pertrans/core.hpp"

namespace pertrans {

/// (position, birth, death) with birth = f(position) >= death.
struct FeatureTriple {
  std::size_t position = 0;
  double birth = 0.0;
  double death = 0.0;

  double persistence() const noexcept { return birth - death; }
  friend bool operator==(const FeatureTriple&, const FeatureTriple&) = default;
};

/// Reduced feature: (position, birth - death), always > 0 once emitted.
struct PersistencePair {
  std::size_t position = 0;
  double persistence = 0.0;

  friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
};

struct ExtremaSet {
  /// Sorted by descending value, then ascending position.
  std::vector<std::size_t> maxima;
  /// Sorted by ascending value, then ascending position.
  std::vector<std::size_t> minima;
};

namespace detail {

/// Extremum anchors in ascending position order.
struct ExtremaByPosition {
  std::vector<std::size_t> maxima;
  std::vector<std::size_t> minima;
};

inline ExtremaByPosition scan_extrema(std::span<const double> f) {
  ExtremaByPosition out;
  const std::size_t q = f.size();
  std::size_t i = 0;
  while (i < q) {
    std::size_t j = i + 1;
    while (j < q && f[j] == f[i]) ++j;
    const double v = f[i];
    const bool has_left = i > 0, has_right = j < q;
    if (!has_left && !has_right) {
      out.maxima.push_back(i);
    } else {
      const bool lower_left = !has_left || f[i - 1] < v;
      const bool lower_right = !has_right || f[j] < v;
      const bool higher_left = !has_left || f[i - 1] > v;
      const bool higher_right = !has_right || f[j] > v;
      if (lower_left && lower_right)
        out.maxima.push_back(i);
      else if (higher_left && higher_right)
        out.minima.push_back(i);
    }
    i = j;
  }
  return out;
}

/// Sparse table answering "best element in an index range" in O(1) after
/// O(n log n) preparation. `Better(a, b)` is a strict total order on items.
template <class T, class Better>
class RangeBest {
 public:
  RangeBest(std::vector<T> items, Better better) : better_(better) {
    const std::size_t n = items.size();
    levels_.push_back(std::move(items));
    for (std::size_t width = 1; 2 * width <= n; width *= 2) {
      const auto& prev = levels_.back();
      std::vector<T> next(n - 2 * width + 1);
      for (std::size_t i = 0; i < next.size(); ++i)
        next[i] = pick(prev[i], prev[i + width]);
      levels_.push_back(std::move(next));
    }
  }

  /// Best element of items[first, last); requires first < last.
  T query(std::size_t first, std::size_t last) const {
    const std::size_t len = last - first;
    const auto level = static_cast<std::size_t>(std::bit_width(len) - 1);
    return pick(levels_[level][first], levels_[level][last - (std::size_t{1} << level)]);
  }

 private:
  T pick(const T& a, const T& b) const { return better_(b, a) ? b : a; }

  Better better_;
  std::vector<std::vector<T>> levels_;
};

inline void sort_features(std::vector<FeatureTriple>& features) {
  std::sort(features.begin(), features.end(), [](const auto& a, const auto& b) {
    if (a.birth != b.birth) return a.birth > b.birth;
    return a.position < b.position;
  });
}

}  // namespace detail

/// Local maxima and minima of f under the plateau / endpoint conventions.
inline ExtremaSet detect_extrema(std::span<const double> f) {
  auto by_pos = detail::scan_extrema(f);
  ExtremaSet out{std::move(by_pos.maxima), std::move(by_pos.minima)};
  std::stable_sort(out.maxima.begin(), out.maxima.end(),
                   [&](std::size_t a, std::size_t b) { return f[a] > f[b]; });
  std::stable_sort(out.minima.begin(), out.minima.end(),
                   [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
  return out;
}

inline ExtremaSet detect_extrema(const Spectrum& s) { return detect_extrema(s.intensity()); }

/// Persistence transformation by recursive interval splitting.
///
/// The global maximum is paired with the global minimum. The remaining axis
/// is then split into work items (start, end) where `end` is an already
/// processed elder peak. In each item the eldest maximum between start and
/// end (end excluded) dies at the lowest minimum strictly between itself and
/// end; the item then splits into (start, peak), (min, peak) and (min, end).
/// Range queries over position-ordered extrema replace per-call list copies,
/// so the cost is O(q + m log m) for m maxima.
///
/// Output: one triple per maximum, by descending birth then ascending position.
inline std::vector<FeatureTriple> transform(std::span<const double> f) {
  if (f.empty()) throw ValidationError("transform requires a non-empty signal");
  auto ext = detail::scan_extrema(f);
  const std::size_t m = ext.maxima.size();

  auto elder = [&f](std::size_t a, std::size_t b) {
    return f[a] > f[b] || (f[a] == f[b] && a < b);
  };
  auto deeper = [&f](std::size_t a, std::size_t b) {
    return f[a] < f[b] || (f[a] == f[b] && a < b);
  };
  detail::RangeBest peaks(ext.maxima, elder);
  const bool any_minima = !ext.minima.empty();
  detail::RangeBest pits(any_minima ? ext.minima : std::vector<std::size_t>{0}, deeper);

  // Index range [first, last) of anchors lying within positions [lo, hi].
  auto anchors_in = [](const std::vector<std::size_t>& anchors, std::size_t lo, std::size_t hi) {
    auto first = std::lower_bound(anchors.begin(), anchors.end(), lo);
    auto last = std::upper_bound(first, anchors.end(), hi);
    return std::pair<std::size_t, std::size_t>(first - anchors.begin(), last - anchors.begin());
  };

  std::vector<FeatureTriple> out;
  out.reserve(m);

  const std::size_t top = peaks.query(0, m);
  out.push_back({top, f[top], *std::min_element(f.begin(), f.end())});

  struct Item {
    std::size_t start, end;
  };
  std::vector<Item> work{{f.size() - 1, top}, {0, top}};
  while (!work.empty()) {
    const auto [start, end] = work.back();
    work.pop_back();
    if (start == end) continue;

    // Positions between start and end, end excluded.
    const auto [lo, hi] = start < end ? std::pair{start, end - 1} : std::pair{end + 1, start};
    const auto [pf, pl] = anchors_in(ext.maxima, lo, hi);
    if (pf == pl) continue;
    const std::size_t peak = peaks.query(pf, pl);

    // The lowest minimum strictly between this peak and its elder.
    const auto [mlo, mhi] = peak < end ? std::pair{peak + 1, end - 1} : std::pair{end + 1, peak - 1};
    const auto [mf, ml] = any_minima ? anchors_in(ext.minima, mlo, mhi) : std::pair<std::size_t, std::size_t>{0, 0};
    if (mf == ml) throw std::logic_error("transform: no separating minimum between two maxima");
    const std::size_t saddle = pits.query(mf, ml);

    out.push_back({peak, f[peak], f[saddle]});
    work.push_back({saddle, end});
    work.push_back({saddle, peak});
    work.push_back({start, peak});
  }

  detail::sort_features(out);
  return out;
}

inline std::vector<FeatureTriple> transform(const Spectrum& s) { return transform(s.intensity()); }

/// Reference implementation: sweep the threshold down through the distinct
/// values of f, adding each level's points at once and tracking connected
/// components of the upper-level set with a union-find over positions.
inline std::vector<FeatureTriple> oracle_transform(std::span<const double> f) {
  const std::size_t q = f.size();
  if (q == 0) throw ValidationError("oracle_transform requires a non-empty signal");

  std::vector<std::size_t> order(q);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&f](std::size_t a, std::size_t b) {
    return f[a] > f[b] || (f[a] == f[b] && a < b);
  });

  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parent(q, kNone);  // kNone = not yet in the upper-level set
  std::vector<std::size_t> anchor(q), added_at(q, kNone);
  std::vector<double> birth(q, 0.0);
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  std::vector<FeatureTriple> out;
  std::size_t level = 0;
  for (std::size_t g = 0; g < q;) {
    std::size_t h = g;
    while (h < q && f[order[h]] == f[order[g]]) ++h;
    const double a = f[order[g]];
    for (std::size_t t = g; t < h; ++t) {
      parent[order[t]] = order[t];
      added_at[order[t]] = level;
    }
    auto is_old = [&](std::size_t p) { return added_at[p] != kNone && added_at[p] < level; };

    // order[g, h) is ascending in position: walk maximal runs of new points.
    for (std::size_t t = g; t < h;) {
      std::size_t u = t + 1;
      while (u < h && order[u] == order[u - 1] + 1) ++u;
      const std::size_t l = order[t], r = order[u - 1];
      for (std::size_t p = l + 1; p <= r; ++p) parent[find(p)] = find(l);
      std::size_t run = find(l);

      const bool left = l > 0 && is_old(l - 1);
      const bool right = r + 1 < q && is_old(r + 1);
      if (!left && !right) {
        anchor[run] = l;
        birth[run] = a;
      } else if (left != right) {
        const std::size_t comp = find(left ? l - 1 : r + 1);
        parent[run] = comp;
      } else {
        std::size_t x = find(l - 1), y = find(r + 1);
        const bool x_elder = birth[x] > birth[y] || (birth[x] == birth[y] && anchor[x] < anchor[y]);
        if (!x_elder) std::swap(x, y);
        out.push_back({anchor[y], birth[y], a});
        parent[y] = x;
        parent[run] = x;
      }
      t = u;
    }
    ++level;
    g = h;
  }

  const std::size_t root = find(0);
  out.push_back({anchor[root], birth[root], f[order.back()]});
  detail::sort_features(out);
  return out;
}

inline std::vector<FeatureTriple> oracle_transform(const Spectrum& s) {
  return oracle_transform(s.intensity());
}

/// (position, birth - death) for every triple with positive persistence.
inline std::vector<PersistencePair> reduce(std::span<const FeatureTriple> triples) {
  std::vector<PersistencePair> out;
  out.reserve(triples.size());
  for (const auto& t : triples) {
    const double p = t.birth - t.death;
    if (p > 0.0) out.push_back({t.position, p});
  }
  return out;
}

/// Number of pairs kept by filter_top_k: ceil(k/100 * n), at most n.
inline std::size_t top_k_count(std::size_t n, double k_percent) {
  if (!(k_percent > 0.0 && k_percent <= 100.0))
    throw ValidationError("k must lie in (0, 100], got " + detail::format_double(k_percent));
  const double raw = std::ceil(k_percent * static_cast<double>(n) / 100.0);
  return std::min(n, static_cast<std::size_t>(raw));
}

/// Keeps the ceil(k% * n) most persistent pairs (ties: smaller position
/// first). Surviving pairs keep their input order.
inline std::vector<PersistencePair> filter_top_k(std::span<const PersistencePair> pairs,
                                                 double k_percent) {
  const std::size_t keep = top_k_count(pairs.size(), k_percent);
  std::vector<std::size_t> rank(pairs.size());
  std::iota(rank.begin(), rank.end(), std::size_t{0});
  std::sort(rank.begin(), rank.end(), [&pairs](std::size_t a, std::size_t b) {
    if (pairs[a].persistence != pairs[b].persistence)
      return pairs[a].persistence > pairs[b].persistence;
    return pairs[a].position < pairs[b].position;
  });
  rank.resize(keep);
  std::sort(rank.begin(), rank.end());
  std::vector<PersistencePair> out;
  out.reserve(keep);
  for (auto i : rank) out.push_back(pairs[i]);
  return out;
}

/// Scalars needed to store a reduced transformation: position + persistence.
inline std::size_t stored_scalars(std::span<const PersistencePair> pairs) noexcept {
  return 2 * pairs.size();
}

/// transform -> reduce -> filter_top_k.
inline std::vector<PersistencePair> reduced_top_k(std::span<const double> f, double k_percent) {
  const auto triples = transform(f);
  const auto pairs = reduce(triples);
  return filter_top_k(pairs, k_percent);
}

// --------------------------------------------------------------------------
// Feature CSV: "position_index,mz,birth,death,persistence" per feature, or
// "position_index,mz,persistence" in reduced mode.

inline void write_features_csv(std::span<const FeatureTriple> triples, std::span<const double> mz,
                               std::ostream& out) {
  for (const auto& t : triples)
    out << t.position << ',' << detail::format_double(mz[t.position]) << ','
        << detail::format_double(t.birth) << ',' << detail::format_double(t.death) << ','
        << detail::format_double(t.birth - t.death) << '\n';
}

inline void write_features_csv(std::span<const PersistencePair> pairs, std::span<const double> mz,
                               std::ostream& out) {
  for (const auto& p : pairs)
    out << p.position << ',' << detail::format_double(mz[p.position]) << ','
        << detail::format_double(p.persistence) << '\n';
}

}  // namespace pertrans
