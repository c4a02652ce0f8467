#include <doctest.h>

#include <cmath>
#include <random>

#include "specgrad/filterbank.hpp"

#include "oracles.hpp"

using namespace specgrad;

TEST_CASE("mel scale conversions") {
  CHECK(hz_to_mel(0.0) == 0.0);
  CHECK(hz_to_mel(700.0) == doctest::Approx(781.1728387480312).epsilon(1e-12));
  for (double f : {100.0, 1000.0, 8000.0}) {
    CHECK(mel_to_hz(hz_to_mel(f)) == doctest::Approx(f).epsilon(1e-9));
  }
  CHECK_THROWS_AS(hz_to_mel(-1.0), DomainError);
  CHECK_THROWS_AS(mel_to_hz(-1.0), DomainError);
}

TEST_CASE("single linear triangle peaks at the midpoint") {
  FilterbankConfig cfg;
  cfg.scale = FilterScale::kLinear;
  cfg.n_bands = 1;
  cfg.n_bins = 257;
  cfg.sample_rate = 8000.0;
  cfg.fmin = 0.0;
  cfg.fmax = 4000.0;
  auto fb = build_filterbank<float>(cfg);

  CHECK(fb.center_hz.size() == 1);
  CHECK(fb.center_hz[0] == doctest::Approx(2000.0));
  const double bin_hz = 4000.0 / 256.0;
  const int center_bin = static_cast<int>(std::round(2000.0 / bin_hz));
  CHECK(fb.weights(0, center_bin) == 1.0f);

  const auto expected = oracle::triangle_filterbank(1, 257, 8000.0, 0.0, 4000.0, false);
  for (int k = 0; k < 257; ++k) {
    CHECK(fb.weights(0, k) == doctest::Approx(expected[static_cast<std::size_t>(k)]));
  }
}

TEST_CASE("mel filterbank shape and ordering") {
  FilterbankConfig cfg;
  cfg.n_bands = 128;
  cfg.n_bins = 257;
  cfg.sample_rate = 44100.0;
  cfg.fmax = 22050.0;
  auto fb = build_filterbank<float>(cfg);
  CHECK((fb.weights.shape() == Shape{128, 257}));

  std::int64_t previous_start = -1;
  for (int m = 0; m < 128; ++m) {
    double row_sum = 0.0;
    std::int64_t first = -1;
    for (int k = 0; k < 257; ++k) {
      row_sum += fb.weights(m, k);
      if (first < 0 && fb.weights(m, k) > 0.0f) first = k;
    }
    CHECK(row_sum > 0.0);
    CHECK(first >= previous_start);
    previous_start = first;
  }
}

TEST_CASE("mel filterbank matches the geometric oracle") {
  FilterbankConfig cfg;
  cfg.n_bands = 40;
  cfg.n_bins = 129;
  cfg.sample_rate = 16000.0;
  cfg.fmin = 50.0;
  cfg.fmax = 8000.0;
  auto fb = build_filterbank<float>(cfg);
  const auto expected = oracle::triangle_filterbank(40, 129, 16000.0, 50.0, 8000.0, true);
  double worst = 0.0;
  for (std::int64_t i = 0; i < fb.weights.numel(); ++i) {
    worst = std::max(worst, std::abs(static_cast<double>(fb.weights[i]) -
                                     expected[static_cast<std::size_t>(i)]));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("center frequencies are evenly spaced on their scale") {
  SUBCASE("linear") {
    FilterbankConfig cfg;
    cfg.scale = FilterScale::kLinear;
    cfg.n_bands = 12;
    cfg.n_bins = 257;
    cfg.sample_rate = 16000.0;
    cfg.fmin = 200.0;
    cfg.fmax = 7800.0;
    auto fb = build_filterbank<float>(cfg);
    const double step = (7800.0 - 200.0) / 13.0;
    const double half_bin = 0.5 * 8000.0 / 256.0;
    for (std::size_t m = 0; m < fb.center_hz.size(); ++m) {
      if (m > 0) CHECK(fb.center_hz[m] > fb.center_hz[m - 1]);
      CHECK(std::abs(fb.center_hz[m] - (200.0 + step * (m + 1))) < half_bin);
    }
  }
  SUBCASE("mel") {
    FilterbankConfig cfg;
    cfg.n_bands = 24;
    cfg.n_bins = 257;
    cfg.sample_rate = 16000.0;
    cfg.fmin = 0.0;
    cfg.fmax = 8000.0;
    auto fb = build_filterbank<float>(cfg);
    const double mel_step = hz_to_mel(8000.0) / 25.0;
    for (std::size_t m = 0; m < fb.center_hz.size(); ++m) {
      if (m > 0) CHECK(fb.center_hz[m] > fb.center_hz[m - 1]);
      CHECK(std::abs(hz_to_mel(fb.center_hz[m]) - mel_step * (m + 1)) < 0.5 * mel_step);
    }
  }
  SUBCASE("log centers form a geometric progression above the floor") {
    FilterbankConfig cfg;
    cfg.scale = FilterScale::kLog;
    cfg.n_bands = 10;
    cfg.n_bins = 257;
    cfg.sample_rate = 16000.0;
    cfg.fmin = 0.0;  // floored at 27.5 Hz internally
    cfg.fmax = 8000.0;
    auto fb = build_filterbank<float>(cfg);
    const double lo = std::log2(27.5), hi = std::log2(8000.0);
    const double step = (hi - lo) / 11.0;
    for (std::size_t m = 0; m < fb.center_hz.size(); ++m) {
      CHECK(std::log2(fb.center_hz[m]) == doctest::Approx(lo + step * (m + 1)).epsilon(1e-9));
    }
  }
}

TEST_CASE("no coverage gaps between fmin and fmax") {
  FilterbankConfig cfg;
  cfg.n_bands = 16;
  cfg.n_bins = 129;
  cfg.sample_rate = 8000.0;
  cfg.fmin = 100.0;
  cfg.fmax = 3500.0;
  auto fb = build_filterbank<float>(cfg);
  const double bin_hz = 4000.0 / 128.0;
  for (int k = 0; k < 129; ++k) {
    const double f = k * bin_hz;
    if (f <= cfg.fmin || f >= cfg.fmax) continue;
    double column = 0.0;
    for (int m = 0; m < 16; ++m) column += fb.weights(m, k);
    CHECK(column > 0.0);
  }
}

TEST_CASE("random filterbank is deterministic and row-normalized") {
  FilterbankConfig cfg;
  cfg.scale = FilterScale::kRandom;
  cfg.n_bands = 8;
  cfg.n_bins = 33;
  cfg.sample_rate = 8000.0;
  cfg.fmax = 4000.0;
  cfg.seed = 1234;
  auto a = build_filterbank<float>(cfg);
  auto b = build_filterbank<float>(cfg);
  CHECK(a.weights == b.weights);
  for (int m = 0; m < 8; ++m) {
    double row_sum = 0.0;
    for (int k = 0; k < 33; ++k) {
      CHECK(a.weights(m, k) >= 0.0f);
      CHECK(a.weights(m, k) < 1.0f);
      row_sum += a.weights(m, k);
    }
    CHECK(row_sum == doctest::Approx(1.0).epsilon(1e-5));
  }
  cfg.seed = 1235;
  auto c = build_filterbank<float>(cfg);
  CHECK_FALSE(a.weights == c.weights);
}

TEST_CASE("configuration errors and warnings") {
  FilterbankConfig cfg;
  cfg.n_bands = 8;
  cfg.n_bins = 33;
  cfg.sample_rate = 8000.0;
  cfg.fmax = 4001.0;
  CHECK_THROWS_AS(build_filterbank<float>(cfg), ConfigError);
  cfg.fmax = 4000.0;
  cfg.fmin = 4000.0;
  CHECK_THROWS_AS(build_filterbank<float>(cfg), ConfigError);
  cfg.fmin = 0.0;
  cfg.n_bands = 64;  // more bands than bins
  auto fb = build_filterbank<float>(cfg);
  CHECK(!fb.warnings.empty());
}

TEST_CASE("apply_filterbank basics") {
  std::mt19937 gen(3);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  Tensor spec(Shape{2, 9, 5});
  for (std::int64_t i = 0; i < spec.numel(); ++i) spec[i] = dist(gen);

  SUBCASE("identity weights leave the input unchanged") {
    Filterbank fb;
    fb.weights = Tensor(Shape{9, 9});
    for (int i = 0; i < 9; ++i) fb.weights(i, i) = 1.0f;
    Tensor out = apply_filterbank(fb, spec);
    CHECK(oracle::max_abs_diff(out, spec) == 0.0);
  }

  SUBCASE("all-ones single row sums over bins") {
    Filterbank fb;
    fb.weights = Tensor::full(Shape{1, 9}, 1.0f);
    Tensor out = apply_filterbank(fb, spec);
    for (int c = 0; c < 2; ++c) {
      for (int t = 0; t < 5; ++t) {
        double expected = 0.0;
        for (int k = 0; k < 9; ++k) expected += spec(c, k, t);
        CHECK(out(c, 0, t) == doctest::Approx(expected).epsilon(1e-6));
      }
    }
  }

  SUBCASE("random filterbank matches the triple-loop oracle") {
    Filterbank fb;
    fb.weights = Tensor(Shape{4, 9});
    for (std::int64_t i = 0; i < fb.weights.numel(); ++i) fb.weights[i] = dist(gen);
    Tensor out = apply_filterbank(fb, spec);
    for (int c = 0; c < 2; ++c) {
      Tensor slice(Shape{9, 5}, std::vector<float>(spec.data() + c * 45,
                                                   spec.data() + (c + 1) * 45));
      Tensor expected = oracle::matmul(fb.weights, slice);
      for (int m = 0; m < 4; ++m) {
        for (int t = 0; t < 5; ++t) {
          CHECK(std::abs(out(c, m, t) - expected(m, t)) < 1e-5);
        }
      }
    }
  }

  SUBCASE("dimension mismatch") {
    Filterbank fb;
    fb.weights = Tensor(Shape{4, 8});
    CHECK_THROWS_AS(apply_filterbank(fb, spec), DomainError);
  }
}

TEST_CASE("apply_filterbank is linear and preserves non-negativity") {
  std::mt19937 gen(13);
  std::uniform_real_distribution<float> dist(0.0f, 2.0f);
  FilterbankConfig cfg;
  cfg.n_bands = 6;
  cfg.n_bins = 17;
  cfg.sample_rate = 8000.0;
  cfg.fmax = 4000.0;
  auto fb = build_filterbank<float>(cfg);

  Tensor x(Shape{1, 17, 4}), y(Shape{1, 17, 4});
  for (std::int64_t i = 0; i < x.numel(); ++i) {
    x[i] = dist(gen);
    y[i] = dist(gen);
  }
  const float alpha = 0.6f, beta = 2.1f;
  Tensor combo(x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i) combo[i] = alpha * x[i] + beta * y[i];
  Tensor lhs = apply_filterbank(fb, combo);
  Tensor fx = apply_filterbank(fb, x);
  Tensor fy = apply_filterbank(fb, y);
  for (std::int64_t i = 0; i < lhs.numel(); ++i) {
    CHECK(lhs[i] == doctest::Approx(alpha * fx[i] + beta * fy[i]).epsilon(1e-4));
    CHECK(fx[i] >= 0.0f);
  }
}

TEST_CASE("area normalization rescales triangles") {
  FilterbankConfig cfg;
  cfg.scale = FilterScale::kLinear;
  cfg.n_bands = 4;
  cfg.n_bins = 65;
  cfg.sample_rate = 8000.0;
  cfg.fmin = 0.0;
  cfg.fmax = 4000.0;
  auto plain = build_filterbank<float>(cfg);
  cfg.area_normalize = true;
  auto normalized = build_filterbank<float>(cfg);
  // Every triangle spans 2 * (fmax - fmin) / (n_bands + 1) Hz.
  const double width = 2.0 * 4000.0 / 5.0;
  for (std::int64_t i = 0; i < plain.weights.numel(); ++i) {
    CHECK(normalized.weights[i] ==
          doctest::Approx(plain.weights[i] * 2.0 / width).epsilon(1e-5));
  }
}
