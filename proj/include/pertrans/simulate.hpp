#pragma once

// Synthetic MS images with known ground truth: a circle (top-left) and a
// square (bottom-right) on an empty background, each region owning half of
// the simulated peaks. Noise injection, persistence-based denoising and the
// mean-intensity rendering used to judge shape recovery.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pertrans/core.hpp"
#include "pertrans/features.hpp"
#include "pertrans/parallel.hpp"
#include "pertrans/persistence.hpp"
#include "pertrans/random.hpp"

namespace pertrans {

enum class NoiseKind { None, Gaussian, Poisson };

struct NoiseModel {
  NoiseKind kind = NoiseKind::None;
  /// Standard deviation (Gaussian) or rate lambda (Poisson).
  double level = 0.0;

  static NoiseModel none() { return {}; }
  static NoiseModel gaussian(double sd) { return {NoiseKind::Gaussian, sd}; }
  static NoiseModel poisson(double lambda) { return {NoiseKind::Poisson, lambda}; }
};

/// Peak model: truncated Gaussians in axis steps; the m/z axis is geometric
/// (constant relative spacing) between the range bounds.
struct SimulationSpec {
  std::size_t size = 30;  ///< pixels per side
  double mz_min = 500.0;
  double mz_max = 2000.0;
  std::size_t n_mz = 3466;
  std::size_t n_peaks = 50;
  double baseline = 0.0;
  double peak_width = 2.0;  ///< Gaussian sd, in axis steps
  double min_height = 1.0;
  double max_height = 10.0;
  NoiseModel noise{};
  std::uint64_t seed = 1234;

  void validate() const {
    if (size < 8) throw ValidationError("image size must be at least 8 pixels per side");
    if (!(mz_min < mz_max)) throw ValidationError("mz range must be increasing");
    if (n_mz < 2) throw ValidationError("need at least two m/z values");
    if (n_peaks < 1) throw ValidationError("need at least one peak");
    if (!(baseline >= 0.0) || !std::isfinite(baseline)) throw ValidationError("baseline must be >= 0");
    if (!(peak_width > 0.0)) throw ValidationError("peak width must be positive");
    if (!(min_height > 0.0 && min_height <= max_height))
      throw ValidationError("peak heights must satisfy 0 < min <= max");
    if (!(noise.level >= 0.0) || !std::isfinite(noise.level))
      throw ValidationError("noise level must be finite and >= 0");
    if (n_mz < 2 * window() + (n_peaks - 1) * (separation() - 1) + n_peaks)
      throw ValidationError("m/z axis too short for " + std::to_string(n_peaks) +
                            " non-overlapping peaks");
  }

  /// Half-width of a peak's support, in axis steps (5 sd).
  std::size_t window() const { return static_cast<std::size_t>(std::ceil(5.0 * peak_width)); }
  /// Minimal distance between peak centres so that supports never overlap.
  std::size_t separation() const { return 2 * window() + 1; }
};

/// Pixel classes of the ground-truth mask.
enum : std::uint8_t { kBackground = 0, kCircle = 1, kSquare = 2 };

struct GroundTruth {
  MSImage image;
  /// Row-major, one of kBackground / kCircle / kSquare per pixel.
  std::vector<std::uint8_t> mask;
  /// Centre index of every peak on the m/z axis, ascending.
  std::vector<std::size_t> peak_positions;
  /// Region (kCircle or kSquare) owning each peak, aligned with peak_positions.
  std::vector<std::uint8_t> peak_region;
  std::vector<double> peak_heights;
};

inline std::vector<double> geometric_axis(double lo, double hi, std::size_t n) {
  std::vector<double> mz(n);
  const double ratio = hi / lo;
  for (std::size_t i = 0; i < n; ++i)
    mz[i] = lo * std::pow(ratio, static_cast<double>(i) / static_cast<double>(n - 1));
  mz.front() = lo;
  mz.back() = hi;
  return mz;
}

/// Circle centred at (0.3 s, 0.3 s) with radius 0.2 s; square covering
/// [0.6 s, 0.9 s) on both axes. Pixel centres decide membership.
inline std::vector<std::uint8_t> shape_mask(std::size_t size) {
  const double s = static_cast<double>(size);
  std::vector<std::uint8_t> mask(size * size, kBackground);
  for (std::size_t r = 0; r < size; ++r)
    for (std::size_t c = 0; c < size; ++c) {
      const double y = r + 0.5, x = c + 0.5;
      const double dy = y - 0.3 * s, dx = x - 0.3 * s;
      if (dx * dx + dy * dy <= 0.04 * s * s)
        mask[r * size + c] = kCircle;
      else if (y >= 0.6 * s && y < 0.9 * s && x >= 0.6 * s && x < 0.9 * s)
        mask[r * size + c] = kSquare;
    }
  return mask;
}

/// Noise-free image for the given settings (their noise field is ignored).
inline GroundTruth generate_ground_truth(const SimulationSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::size_t h = spec.window(), gap = spec.separation() - 1;

  // Uniform over all admissible placements: choose sorted offsets from a
  // shrunken range, then spread them out by the required gap.
  const std::size_t span = spec.n_mz - 2 * h - (spec.n_peaks - 1) * gap;
  auto offsets = rng.sample_without_replacement(span, spec.n_peaks);
  std::sort(offsets.begin(), offsets.end());
  std::vector<std::size_t> centres(spec.n_peaks);
  for (std::size_t i = 0; i < spec.n_peaks; ++i) centres[i] = h + offsets[i] + i * gap;

  std::vector<double> heights(spec.n_peaks);
  for (auto& v : heights) v = rng.uniform(spec.min_height, spec.max_height);

  auto owner = rng.sample_without_replacement(spec.n_peaks, spec.n_peaks);
  std::vector<std::uint8_t> region(spec.n_peaks, kSquare);
  for (std::size_t i = 0; i < (spec.n_peaks + 1) / 2; ++i) region[owner[i]] = kCircle;

  auto profile = [&](std::uint8_t which) {
    std::vector<double> s(spec.n_mz, spec.baseline);
    if (which == kBackground) return s;
    for (std::size_t p = 0; p < spec.n_peaks; ++p) {
      if (region[p] != which) continue;
      for (std::size_t i = centres[p] - h; i <= centres[p] + h; ++i) {
        const double d = (static_cast<double>(i) - static_cast<double>(centres[p])) / spec.peak_width;
        s[i] += heights[p] * std::exp(-0.5 * d * d);
      }
    }
    return s;
  };
  const std::vector<std::vector<double>> profiles{profile(kBackground), profile(kCircle),
                                                  profile(kSquare)};

  auto mask = shape_mask(spec.size);
  std::vector<std::vector<double>> spectra;
  spectra.reserve(mask.size());
  for (auto m : mask) spectra.push_back(profiles[m]);
  return {MSImage(spec.size, spec.size, geometric_axis(spec.mz_min, spec.mz_max, spec.n_mz),
                  std::move(spectra)),
          std::move(mask), std::move(centres), std::move(region), std::move(heights)};
}

/// Gaussian: v + N(0, sd^2) clamped at 0. Poisson: v + Poisson(lambda).
/// Pixel p draws from child_seed(seed, p), so results do not depend on the
/// thread count.
inline MSImage add_noise(const MSImage& img, const NoiseModel& noise, std::uint64_t seed,
                         std::size_t threads = 1) {
  if (!(noise.level >= 0.0)) throw ValidationError("noise level must be >= 0");
  auto spectra = img.spectra();
  if (noise.kind == NoiseKind::None || noise.level == 0.0)
    return MSImage(img.width(), img.height(), {img.mz().begin(), img.mz().end()}, std::move(spectra));
  parallel_for(spectra.size(), threads, [&](std::size_t p) {
    Rng rng(child_seed(seed, p));
    for (auto& v : spectra[p]) {
      if (noise.kind == NoiseKind::Gaussian)
        v = std::max(0.0, v + noise.level * rng.normal());
      else
        v += static_cast<double>(rng.poisson(noise.level));
    }
  });
  return MSImage(img.width(), img.height(), {img.mz().begin(), img.mz().end()}, std::move(spectra));
}

/// Ground truth plus the configured noise, seeded from the settings seed.
inline MSImage simulate_noisy(const SimulationSpec& spec, const GroundTruth& truth,
                              std::size_t threads = 1) {
  return add_noise(truth.image, spec.noise, child_seed(spec.seed, 0x6e6f697365ULL), threads);
}

/// Per pixel: keep the top-k% persistence pairs and rebuild a spectrum that is
/// zero except at retained peaks, which carry their persistence.
inline MSImage denoise(const MSImage& img, double k_percent, std::size_t threads = 1) {
  top_k_count(0, k_percent);
  std::vector<std::vector<double>> out(img.pixel_count());
  parallel_for(out.size(), threads,
               [&](std::size_t p) { out[p] = persistence_row(img.pixel(p), k_percent); });
  return MSImage(img.width(), img.height(), {img.mz().begin(), img.mz().end()}, std::move(out));
}

/// Average intensity of each pixel's spectrum, as a height x width grid.
inline Grid mean_image(const MSImage& img) {
  Grid g(img.height(), img.width());
  for (std::size_t p = 0; p < img.pixel_count(); ++p) {
    const auto s = img.pixel(p);
    double sum = 0.0;
    for (double v : s) sum += v;
    g.values[p] = sum / static_cast<double>(s.size());
  }
  return g;
}

/// mean_image(denoise(img, k)) without materialising the denoised image.
inline Grid denoised_mean_image(const MSImage& img, double k_percent, std::size_t threads = 1) {
  top_k_count(0, k_percent);
  Grid g(img.height(), img.width());
  parallel_for(img.pixel_count(), threads, [&](std::size_t p) {
    const auto s = img.pixel(p);
    double sum = 0.0;
    for (const auto& pair : reduced_top_k(s, k_percent)) sum += pair.persistence;
    g.values[p] = sum / static_cast<double>(s.size());
  });
  return g;
}

/// Otsu's threshold over the exact value distribution: pixels strictly above
/// the returned value maximise the between-class variance. A constant grid
/// returns its value (no foreground).
inline double otsu_threshold(std::span<const double> values) {
  if (values.empty()) return 0.0;
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  double total = 0.0;
  for (double x : v) total += x;
  double best = -1.0, threshold = v.back(), below_sum = 0.0;
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    below_sum += v[i];
    if (v[i] == v[i + 1]) continue;
    const double w0 = (i + 1) / n, w1 = 1.0 - w0;
    const double m0 = below_sum / (i + 1), m1 = (total - below_sum) / (n - (i + 1));
    const double between = w0 * w1 * (m0 - m1) * (m0 - m1);
    if (between > best) {
      best = between;
      threshold = v[i];
    }
  }
  return threshold;
}

/// Intersection over union of {grid > otsu} with the non-background mask.
inline double mask_iou(const Grid& grid, std::span<const std::uint8_t> mask) {
  if (grid.values.size() != mask.size()) throw ValidationError("grid and mask sizes differ");
  const double t = otsu_threshold(grid.values);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const bool a = grid.values[i] > t, b = mask[i] != kBackground;
    inter += a && b;
    uni += a || b;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

struct BenchRow {
  std::size_t size = 0;
  std::size_t pixels = 0;
  double seconds = 0.0;
  double seconds_per_pixel = 0.0;
  /// seconds / seconds of the first row.
  double ratio = 1.0;
  double pixel_ratio = 1.0;
};

/// Wall-clock denoising time (simulation excluded) for each image size.
inline std::vector<BenchRow> bench_denoise(std::span<const std::size_t> sizes, const SimulationSpec& base,
                                           double k_percent, std::size_t threads = 1,
                                           std::size_t repeats = 1) {
  if (sizes.empty()) throw ValidationError("bench needs at least one image size");
  if (repeats == 0) repeats = 1;
  std::vector<BenchRow> rows;
  for (auto size : sizes) {
    auto spec = base;
    spec.size = size;
    const auto truth = generate_ground_truth(spec);
    const auto noisy = simulate_noisy(spec, truth, threads);
    double best = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto grid = denoised_mean_image(noisy, k_percent, threads);
      (void)grid;
      const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
      if (r == 0 || dt.count() < best) best = dt.count();
    }
    BenchRow row;
    row.size = size;
    row.pixels = size * size;
    row.seconds = best;
    row.seconds_per_pixel = best / static_cast<double>(row.pixels);
    rows.push_back(row);
  }
  for (auto& row : rows) {
    row.ratio = rows.front().seconds > 0 ? row.seconds / rows.front().seconds : 0.0;
    row.pixel_ratio = static_cast<double>(row.pixels) / static_cast<double>(rows.front().pixels);
  }
  return rows;
}

inline void write_bench_csv(std::span<const BenchRow> rows, std::ostream& out) {
  out << "size,pixels,seconds,seconds_per_pixel,time_ratio,pixel_ratio\n";
  for (const auto& r : rows)
    out << r.size << ',' << r.pixels << ',' << detail::format_double(r.seconds) << ','
        << detail::format_double(r.seconds_per_pixel) << ',' << detail::format_double(r.ratio) << ','
        << detail::format_double(r.pixel_ratio) << '\n';
}

}  // namespace pertrans
