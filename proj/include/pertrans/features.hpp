#pragma once

// Dense persistence-feature matrix Z: one row per spectrum, one column per
// m/z value, zero wherever the spectrum has no retained peak.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "pertrans/core.hpp"
#include "pertrans/parallel.hpp"
#include "pertrans/persistence.hpp"

namespace pertrans {

struct FeatureMatrix {
  std::vector<double> mz;
  std::vector<std::vector<double>> rows;

  std::size_t size() const noexcept { return rows.size(); }
  std::size_t width() const noexcept { return mz.size(); }
};

inline std::vector<double> to_persistence_vector(std::span<const PersistencePair> pairs,
                                                 std::size_t q) {
  std::vector<double> out(q, 0.0);
  for (const auto& p : pairs) {
    if (p.position >= q)
      throw ValidationError("peak position " + std::to_string(p.position) +
                            " out of range for q=" + std::to_string(q));
    out[p.position] = p.persistence;
  }
  return out;
}

inline std::vector<double> persistence_row(std::span<const double> intensity, double k_percent) {
  return to_persistence_vector(reduced_top_k(intensity, k_percent), intensity.size());
}

/// Row i = top-k% reduced persistence vector of spectrum i.
inline FeatureMatrix build_matrix(const LabeledDataset& dataset, double k_percent,
                                  std::size_t threads = 1) {
  top_k_count(0, k_percent);  // validates k even for empty datasets
  FeatureMatrix z;
  z.mz = dataset.mz;
  z.rows.resize(dataset.size());
  parallel_for(dataset.size(), threads, [&](std::size_t i) {
    z.rows[i] = persistence_row(dataset.intensities[i], k_percent);
  });
  return z;
}

inline void write_feature_matrix_csv(const FeatureMatrix& z, std::ostream& out) {
  write_matrix_csv(z.mz, z.rows, out);
}

}  // namespace pertrans
