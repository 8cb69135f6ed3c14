#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "xyconv/scaling.hpp"

using namespace xyconv;

TEST_CASE("exact exponential data is recovered to high precision") {
  const double c = 1.0273, a = 0.3, b = 0.4;
  std::vector<ScalingSample> samples;
  for (int L = 8; L <= 16; ++L) samples.push_back({L, c + a * std::exp(-b * L)});
  const ScalingResult fit = scaling_fit(samples);
  CHECK(std::abs(fit.h_inf - c) < 1e-6);
  CHECK(std::abs(fit.amplitude - a) < 1e-6);
  CHECK(std::abs(fit.rate - b) < 1e-6);
  CHECK(fit.residual_rms < 1e-9);
}

TEST_CASE("negative amplitude data is recovered as well") {
  const double c = 0.994, a = -0.45, b = 0.27;
  std::vector<ScalingSample> samples;
  for (int L = 8; L <= 15; ++L) samples.push_back({L, c + a * std::exp(-b * L)});
  const ScalingResult fit = scaling_fit(samples);
  CHECK(std::abs(fit.h_inf - c) < 1e-6);
  CHECK(std::abs(fit.amplitude - a) < 1e-6);
  CHECK(std::abs(fit.rate - b) < 1e-6);
}

TEST_CASE("size-independent samples extrapolate to themselves") {
  std::vector<ScalingSample> samples;
  for (int L : {8, 10, 12, 14}) samples.push_back({L, 0.5});
  const ScalingResult fit = scaling_fit(samples);
  CHECK(std::abs(fit.h_inf - 0.5) < 1e-9);
  CHECK(std::abs(fit.amplitude) < 1e-6);
  CHECK(fit.rate > 0.0);
  CHECK(fit.residual_rms < 1e-12);
}

TEST_CASE("noisy data reports its residual") {
  std::vector<ScalingSample> samples;
  const double noise[] = {1e-3, -2e-3, 1.5e-3, -0.5e-3, 2e-3, -1e-3};
  for (int i = 0; i < 6; ++i)
    samples.push_back({8 + i, 1.0 + 0.2 * std::exp(-0.3 * (8 + i)) + noise[i]});
  const ScalingResult fit = scaling_fit(samples);
  CHECK(fit.residual_rms > 1e-5);
  CHECK(std::abs(fit.h_inf - 1.0) < 0.05);
}

TEST_CASE("fit preconditions") {
  std::vector<ScalingSample> three = {{8, 1.0}, {10, 1.0}, {12, 1.0}};
  CHECK_THROWS_AS(scaling_fit(three), FitError);
  std::vector<ScalingSample> dup = {{8, 1.0}, {8, 1.1}, {10, 1.0}, {12, 1.0}};
  CHECK_THROWS_AS(scaling_fit(dup), FitError);
}

TEST_CASE("fit is deterministic") {
  std::vector<ScalingSample> samples;
  for (int L = 8; L <= 14; ++L) samples.push_back({L, 1.1 + 0.25 * std::exp(-0.33 * L)});
  const ScalingResult a = scaling_fit(samples);
  const ScalingResult b = scaling_fit(samples);
  CHECK(a.h_inf == b.h_inf);
  CHECK(a.amplitude == b.amplitude);
  CHECK(a.rate == b.rate);
}
