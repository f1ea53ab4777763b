#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "pertrans/simulate.hpp"

using namespace pertrans;

namespace {

SimulationSpec small_spec() {
  SimulationSpec s;
  s.size = 12;
  return s;
}

std::size_t first_pixel(const std::vector<std::uint8_t>& mask, std::uint8_t which) {
  return static_cast<std::size_t>(std::find(mask.begin(), mask.end(), which) - mask.begin());
}

}  // namespace

TEST(Simulate, AxisIsGeometric) {
  const auto mz = geometric_axis(500, 2000, 3466);
  EXPECT_EQ(mz.front(), 500.0);
  EXPECT_EQ(mz.back(), 2000.0);
  EXPECT_NEAR(mz[1] / mz[0], mz[3000] / mz[2999], 1e-12);
}

TEST(Simulate, MaskHasBothShapes) {
  const auto mask = shape_mask(30);
  const auto circle = std::count(mask.begin(), mask.end(), kCircle);
  const auto square = std::count(mask.begin(), mask.end(), kSquare);
  EXPECT_EQ(square, 81);
  EXPECT_NEAR(static_cast<double>(circle), M_PI * 36.0, 10.0);
  EXPECT_EQ(mask[0], kBackground);
  EXPECT_EQ(mask[9 * 30 + 9], kCircle);
  EXPECT_EQ(mask[22 * 30 + 22], kSquare);
}

TEST(Simulate, BackgroundIsBaseline) {
  for (double baseline : {0.0, 5.0}) {
    auto spec = small_spec();
    spec.baseline = baseline;
    const auto truth = generate_ground_truth(spec);
    const auto bg = truth.image.pixel(first_pixel(truth.mask, kBackground));
    for (double v : bg) ASSERT_EQ(v, baseline);
  }
}

TEST(Simulate, RegionPixelsCarryTheirPeaks) {
  const auto spec = small_spec();
  const auto truth = generate_ground_truth(spec);
  ASSERT_EQ(truth.peak_positions.size(), 50u);
  EXPECT_EQ(std::count(truth.peak_region.begin(), truth.peak_region.end(), kCircle), 25);
  for (std::size_t i = 1; i < truth.peak_positions.size(); ++i)
    EXPECT_GE(truth.peak_positions[i] - truth.peak_positions[i - 1], spec.separation());
  for (std::uint8_t region : {kCircle, kSquare}) {
    const auto s = truth.image.pixel(first_pixel(truth.mask, region));
    const auto ext = detect_extrema(s);
    std::size_t above = 0;
    for (auto m : ext.maxima) above += s[m] > spec.baseline;
    EXPECT_EQ(above, 25u);
    for (std::size_t p = 0; p < truth.peak_positions.size(); ++p) {
      const double v = s[truth.peak_positions[p]];
      if (truth.peak_region[p] == region)
        EXPECT_DOUBLE_EQ(v, truth.peak_heights[p]);
      else
        EXPECT_EQ(v, 0.0);
    }
  }
}

TEST(Simulate, TooManyPeaksIsRejected) {
  auto spec = small_spec();
  spec.n_mz = 200;
  EXPECT_THROW(generate_ground_truth(spec), ValidationError);
}

TEST(Noise, ZeroLevelIsIdentity) {
  const auto truth = generate_ground_truth(small_spec());
  EXPECT_EQ(add_noise(truth.image, NoiseModel::gaussian(0.0), 1).spectra(), truth.image.spectra());
  EXPECT_EQ(add_noise(truth.image, NoiseModel::poisson(0.0), 1).spectra(), truth.image.spectra());
}

TEST(Noise, GaussianMeanAbsoluteChange) {
  auto spec = small_spec();
  spec.baseline = 5.0;  // keeps the clamp at zero out of reach
  const auto truth = generate_ground_truth(spec);
  const auto noisy = add_noise(truth.image, NoiseModel::gaussian(0.1), 9);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < noisy.pixel_count(); ++p) {
    const auto a = noisy.pixel(p), b = truth.image.pixel(p);
    for (std::size_t i = 0; i < a.size(); ++i, ++n) sum += std::fabs(a[i] - b[i]);
  }
  EXPECT_NEAR(sum / n, 0.1 * std::sqrt(2.0 / M_PI), 0.002);
}

TEST(Noise, PoissonIsAdditiveAndIntegral) {
  const auto truth = generate_ground_truth(small_spec());
  const auto noisy = add_noise(truth.image, NoiseModel::poisson(2.0), 5);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t p = 0; p < noisy.pixel_count(); ++p) {
    const auto a = noisy.pixel(p), b = truth.image.pixel(p);
    for (std::size_t i = 0; i < a.size(); ++i, ++n) {
      const double d = a[i] - b[i];
      ASSERT_GE(d, 0.0);
      ASSERT_NEAR(d, std::round(d), 1e-9);
      sum += d;
    }
  }
  EXPECT_NEAR(sum / n, 2.0, 0.02);
}

TEST(Noise, DeterministicAndThreadIndependent) {
  auto spec = small_spec();
  spec.noise = NoiseModel::gaussian(0.5);
  const auto truth = generate_ground_truth(spec);
  EXPECT_EQ(generate_ground_truth(spec).image.spectra(), truth.image.spectra());
  const auto a = simulate_noisy(spec, truth, 1), b = simulate_noisy(spec, truth, 3);
  EXPECT_EQ(a.spectra(), b.spectra());
  spec.seed = 99;
  EXPECT_NE(simulate_noisy(spec, truth, 1).spectra(), a.spectra());
}

TEST(Denoise, NoiselessSupportMatchesMask) {
  const auto truth = generate_ground_truth(small_spec());
  const auto grid = mean_image(denoise(truth.image, 100));
  for (std::size_t p = 0; p < truth.mask.size(); ++p)
    EXPECT_EQ(grid.values[p] > 0.0, truth.mask[p] != kBackground) << p;
  EXPECT_EQ(mask_iou(grid, truth.mask), 1.0);
}

TEST(Denoise, OutputIsSparseAndNonNegative) {
  auto spec = small_spec();
  spec.noise = NoiseModel::gaussian(0.5);
  const auto truth = generate_ground_truth(spec);
  const auto noisy = simulate_noisy(spec, truth);
  const auto den = denoise(noisy, 10);
  for (std::size_t p = 0; p < den.pixel_count(); ++p) {
    const auto s = den.pixel(p);
    const auto m = detect_extrema(noisy.pixel(p)).maxima.size();
    const auto nonzero = static_cast<std::size_t>(std::count_if(s.begin(), s.end(), [](double v) {
      EXPECT_GE(v, 0.0);
      return v != 0.0;
    }));
    EXPECT_LE(nonzero, top_k_count(m, 10));
  }
  const auto fused = denoised_mean_image(noisy, 10);
  const auto full = mean_image(den);
  for (std::size_t p = 0; p < full.values.size(); ++p)
    EXPECT_NEAR(fused.values[p], full.values[p], 1e-12 * std::max(1.0, full.values[p]));
}

TEST(MeanImage, Examples) {
  const std::vector<double> mz{1, 2, 3, 4};
  const MSImage img(2, 1, mz, {{1, 2, 3, 6}, {0, 0, 0, 0}});
  const auto g = mean_image(img);
  EXPECT_EQ(g.rows, 1u);
  EXPECT_EQ(g.cols, 2u);
  EXPECT_EQ(g.values, (std::vector<double>{3.0, 0.0}));

  std::vector<double> one_peak(3466, 0.0);
  one_peak[1000] = 3.0;
  const MSImage single(1, 1, geometric_axis(500, 2000, 3466), {one_peak});
  EXPECT_DOUBLE_EQ(mean_image(single).values[0], 3.0 / 3466.0);
}

TEST(Otsu, SeparatesTwoLevels) {
  const std::vector<double> v{0, 0, 0, 1, 1, 10, 10};
  EXPECT_EQ(otsu_threshold(v), 1.0);
  EXPECT_EQ(otsu_threshold(std::vector<double>{4, 4}), 4.0);
}

TEST(Iou, DegradesWithNoise) {
  auto spec = small_spec();
  spec.size = 16;
  const auto truth = generate_ground_truth(spec);
  double prev = 1.0;
  for (double sd : {0.1, 1.0, 5.0}) {
    const auto noisy = add_noise(truth.image, NoiseModel::gaussian(sd), 4);
    const double iou = mask_iou(denoised_mean_image(noisy, 10), truth.mask);
    EXPECT_LE(iou, prev + 1e-12) << sd;
    prev = iou;
  }
}

TEST(Bench, SingleSizeTable) {
  auto spec = small_spec();
  spec.noise = NoiseModel::gaussian(0.1);
  const std::vector<std::size_t> sizes{8};
  const auto rows = bench_denoise(sizes, spec, 10);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].pixels, 64u);
  EXPECT_EQ(rows[0].ratio, 1.0);
  EXPECT_GT(rows[0].seconds, 0.0);
  std::ostringstream out;
  write_bench_csv(rows, out);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "size,pixels,seconds,seconds_per_pixel,time_ratio,pixel_ratio");
}
