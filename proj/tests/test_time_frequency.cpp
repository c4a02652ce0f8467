#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "specgrad/time_frequency.hpp"

#include "oracles.hpp"

using namespace specgrad;

namespace {

Tensor random_audio(std::int64_t channels, std::int64_t samples, std::mt19937& gen) {
  std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
  Tensor t(Shape{channels, samples});
  for (std::int64_t i = 0; i < t.numel(); ++i) t[i] = dist(gen);
  return t;
}

StftConfig rect_config(int n_dft, int n_hop) {
  StftConfig cfg;
  cfg.n_dft = n_dft;
  cfg.n_hop = n_hop;
  cfg.window = Window::kRectangular;
  return cfg;
}

}  // namespace

TEST_CASE("config validation") {
  StftConfig cfg;
  cfg.n_dft = 100;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.n_dft = 512;
  cfg.n_hop = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.n_hop = 513;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg.n_hop = 256;
  cfg.power_exponent = 0.5;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
}

TEST_CASE("dft kernels, small rectangular case") {
  auto bank = build_dft_kernels<float>(rect_config(4, 4));
  CHECK(bank.n_bins == 3);
  for (int n = 0; n < 4; ++n) {
    CHECK(bank.cos_kernels(0, n) == 1.0f);
    CHECK(bank.sin_kernels(0, n) == 0.0f);
  }
  // cos(2 pi n / 4) = [1, 0, -1, 0]
  CHECK(bank.cos_kernels(1, 0) == doctest::Approx(1.0));
  CHECK(bank.cos_kernels(1, 1) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(bank.cos_kernels(1, 2) == doctest::Approx(-1.0));
  CHECK(bank.cos_kernels(1, 3) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("dft kernels match direct trigonometric evaluation") {
  StftConfig cfg;  // hann
  cfg.n_dft = 512;
  auto bank = build_dft_kernels<float>(cfg);
  const auto w = oracle::window(512, true);
  double worst = 0.0;
  for (int k = 0; k < bank.n_bins; ++k) {
    for (int n = 0; n < 512; ++n) {
      const double phase = 2.0 * oracle::kPi * k * n / 512.0;
      worst = std::max(worst, std::abs(bank.cos_kernels(k, n) - w[n] * std::cos(phase)));
      worst = std::max(worst, std::abs(bank.sin_kernels(k, n) - w[n] * std::sin(phase)));
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("stft of a DC signal") {
  StftConfig cfg = rect_config(64, 64);
  auto bank = build_dft_kernels<float>(cfg);
  Tensor audio = Tensor::full(Shape{1, 64}, 1.0f);
  auto out = stft_conv(audio, bank, cfg);
  CHECK((out.real.shape() == Shape{1, 33, 1}));
  CHECK(out.real(0, 0, 0) == doctest::Approx(64.0));
  for (int k = 1; k < 33; ++k) {
    const double mag = std::hypot(out.real(0, k, 0), out.imag(0, k, 0));
    CHECK(mag < 1e-4);
  }
}

TEST_CASE("stft of a sinusoid at an exact bin") {
  StftConfig cfg = rect_config(64, 64);
  auto bank = build_dft_kernels<float>(cfg);
  Tensor audio(Shape{1, 64});
  for (int n = 0; n < 64; ++n) {
    audio[n] = static_cast<float>(std::cos(2.0 * oracle::kPi * 8.0 * n / 64.0));
  }
  auto out = stft_conv(audio, bank, cfg);
  for (int k = 0; k < 33; ++k) {
    const double mag = std::hypot(out.real(0, k, 0), out.imag(0, k, 0));
    if (k == 8) {
      CHECK(mag == doctest::Approx(32.0).epsilon(1e-5));
    } else {
      CHECK(mag < 1e-4);
    }
  }
}

TEST_CASE("sinusoid energy concentrates in its bin") {
  StftConfig cfg = rect_config(128, 128);
  auto bank = build_dft_kernels<float>(cfg);
  Tensor audio(Shape{1, 128});
  const int k0 = 19;
  for (int n = 0; n < 128; ++n) {
    audio[n] = static_cast<float>(std::sin(2.0 * oracle::kPi * k0 * n / 128.0 + 0.3));
  }
  auto out = stft_conv(audio, bank, cfg);
  double total = 0.0, at_k0 = 0.0;
  for (int k = 0; k < bank.n_bins; ++k) {
    const double mag2 = static_cast<double>(out.real(0, k, 0)) * out.real(0, k, 0) +
                        static_cast<double>(out.imag(0, k, 0)) * out.imag(0, k, 0);
    const double weight = (k == 0 || k == 64) ? 1.0 : 2.0;
    total += weight * mag2;
    if (k == k0) at_k0 = weight * mag2;
  }
  CHECK(at_k0 / total > 0.999);
}

TEST_CASE("stft matches the naive DFT oracle per channel") {
  std::mt19937 gen(17);
  StftConfig cfg = rect_config(64, 16);
  cfg.window = Window::kHann;
  auto bank = build_dft_kernels<float>(cfg);
  Tensor audio = random_audio(2, 200, gen);
  auto out = stft_conv(audio, bank, cfg);
  for (int c = 0; c < 2; ++c) {
    auto frames = oracle::dft_frames(audio.data() + c * 200, 200, 64, 16, true);
    Tensor64 expected_real(Shape{frames.n_bins, frames.n_frames}, frames.real);
    Tensor64 expected_imag(Shape{frames.n_bins, frames.n_frames}, frames.imag);
    Tensor real_slice(Shape{frames.n_bins, frames.n_frames},
                      std::vector<float>(out.real.data() + c * frames.n_bins * frames.n_frames,
                                         out.real.data() + (c + 1) * frames.n_bins *
                                             frames.n_frames));
    Tensor imag_slice(Shape{frames.n_bins, frames.n_frames},
                      std::vector<float>(out.imag.data() + c * frames.n_bins * frames.n_frames,
                                         out.imag.data() + (c + 1) * frames.n_bins *
                                             frames.n_frames));
    CHECK(oracle::rel_inf_error(real_slice, expected_real) < 1e-4);
    CHECK(oracle::rel_inf_error(imag_slice, expected_imag) < 1e-4);
  }
}

TEST_CASE("stft rejects audio shorter than the window") {
  StftConfig cfg = rect_config(64, 64);
  auto bank = build_dft_kernels<float>(cfg);
  Tensor audio = Tensor::full(Shape{1, 32}, 1.0f);
  CHECK_THROWS_AS(stft_conv(audio, bank, cfg), DomainError);
}

TEST_CASE("stft is linear in the audio input") {
  std::mt19937 gen(23);
  StftConfig cfg = rect_config(32, 8);
  auto bank = build_dft_kernels<float>(cfg);
  Tensor x = random_audio(1, 96, gen);
  Tensor y = random_audio(1, 96, gen);
  const float alpha = 0.8f, beta = -1.3f;
  Tensor combo(x.shape());
  for (std::int64_t i = 0; i < x.numel(); ++i) combo[i] = alpha * x[i] + beta * y[i];
  auto both = stft_conv(combo, bank, cfg);
  auto fx = stft_conv(x, bank, cfg);
  auto fy = stft_conv(y, bank, cfg);
  Tensor expect_real(both.real.shape());
  for (std::int64_t i = 0; i < expect_real.numel(); ++i) {
    expect_real[i] = alpha * fx.real[i] + beta * fy.real[i];
  }
  CHECK(oracle::rel_inf_error(both.real, expect_real) < 1e-5);
}

TEST_CASE("frame-level Parseval identity, rectangular window") {
  std::mt19937 gen(29);
  const int n = 64;
  StftConfig cfg = rect_config(n, n);
  auto bank = build_dft_kernels<float>(cfg);
  for (int trial = 0; trial < 20; ++trial) {
    Tensor frame = random_audio(1, n, gen);
    auto out = stft_conv(frame, bank, cfg);
    double time_energy = 0.0;
    for (int i = 0; i < n; ++i) {
      time_energy += static_cast<double>(frame[i]) * frame[i];
    }
    double freq_energy = 0.0;
    for (int k = 0; k <= n / 2; ++k) {
      const double mag2 = static_cast<double>(out.real(0, k, 0)) * out.real(0, k, 0) +
                          static_cast<double>(out.imag(0, k, 0)) * out.imag(0, k, 0);
      freq_energy += (k == 0 || k == n / 2) ? mag2 : 2.0 * mag2;
    }
    freq_energy /= n;
    CHECK(std::abs(time_energy - freq_energy) / time_energy < 1e-4);
  }
}

TEST_CASE("power spectrogram") {
  Tensor real = Tensor::from_vector({3.0f});
  Tensor imag = Tensor::from_vector({4.0f});
  CHECK(power_spectrogram(real, imag, 2.0)[0] == doctest::Approx(25.0));
  CHECK(power_spectrogram(real, imag, 1.0)[0] == doctest::Approx(5.0));
  Tensor zero = Tensor::from_vector({0.0f});
  CHECK(power_spectrogram(zero, zero, 2.0)[0] == 0.0f);
  Tensor two = Tensor::from_vector({1.0f, 2.0f});
  CHECK_THROWS_AS(power_spectrogram(real, two, 2.0), DomainError);
}

TEST_CASE("amplitude_to_decibel") {
  CHECK(amplitude_to_decibel(Tensor::from_vector({1.0f}))[0] == doctest::Approx(0.0));

  Tensor pair = amplitude_to_decibel(Tensor::from_vector({100.0f, 1.0f}));
  CHECK(pair[0] == doctest::Approx(20.0));
  CHECK(pair[1] == doctest::Approx(0.0));

  Tensor clamped = amplitude_to_decibel(Tensor::from_vector({1.0f, 1e-12f}));
  CHECK(clamped[0] == doctest::Approx(0.0));
  CHECK(clamped[1] == doctest::Approx(-80.0));

  CHECK_THROWS_AS(amplitude_to_decibel(Tensor::from_vector({-1.0f})), DomainError);
}

TEST_CASE("decibel output range never exceeds the dynamic range") {
  std::mt19937 gen(37);
  std::uniform_real_distribution<float> dist(0.0f, 1.0f);
  Tensor t(Shape{200});
  for (std::int64_t i = 0; i < t.numel(); ++i) {
    const float u = dist(gen);
    t[i] = u < 0.1f ? 0.0f : std::pow(10.0f, -14.0f * u);
  }
  Tensor db = amplitude_to_decibel(t);
  float lo = db[0], hi = db[0];
  for (std::int64_t i = 1; i < db.numel(); ++i) {
    lo = std::min(lo, db[i]);
    hi = std::max(hi, db[i]);
  }
  CHECK(hi - lo <= doctest::Approx(80.0));
}

TEST_CASE("melspectrogram with an identity filterbank equals the power spectrogram") {
  std::mt19937 gen(41);
  StftConfig cfg = rect_config(16, 8);
  auto bank = build_dft_kernels<float>(cfg);
  Filterbank fb;
  fb.weights = Tensor(Shape{bank.n_bins, bank.n_bins});
  for (int i = 0; i < bank.n_bins; ++i) fb.weights(i, i) = 1.0f;
  Tensor audio = random_audio(1, 64, gen);
  Tensor mel = melspectrogram(audio, bank, fb, cfg);
  auto stft = stft_conv(audio, bank, cfg);
  Tensor power = power_spectrogram(stft.real, stft.imag, cfg.power_exponent);
  CHECK(oracle::rel_inf_error(mel, power) < 1e-6);
}

TEST_CASE("melspectrogram of silence is zero") {
  StftConfig cfg;
  cfg.n_dft = 64;
  cfg.n_hop = 32;
  auto bank = build_dft_kernels<float>(cfg);
  FilterbankConfig fb_cfg;
  fb_cfg.n_bands = 8;
  fb_cfg.n_bins = bank.n_bins;
  fb_cfg.sample_rate = 8000.0;
  fb_cfg.fmax = 4000.0;
  auto fb = build_filterbank<float>(fb_cfg);
  Tensor audio(Shape{1, 256});
  Tensor mel = melspectrogram(audio, bank, fb, cfg);
  for (std::int64_t i = 0; i < mel.numel(); ++i) CHECK(mel[i] == 0.0f);
}

TEST_CASE("melspectrogram of a 440 Hz sine matches the composed oracles") {
  const double sr = 22050.0;
  const int samples = 22050;
  StftConfig cfg;
  cfg.n_dft = 512;
  cfg.n_hop = 256;
  cfg.sample_rate = sr;
  auto bank = build_dft_kernels<float>(cfg);
  FilterbankConfig fb_cfg;
  fb_cfg.n_bands = 128;
  fb_cfg.n_bins = 257;
  fb_cfg.sample_rate = sr;
  fb_cfg.fmax = sr / 2.0;
  auto fb = build_filterbank<float>(fb_cfg);

  Tensor audio(Shape{1, samples});
  for (int n = 0; n < samples; ++n) {
    audio[n] = static_cast<float>(0.7 * std::sin(2.0 * oracle::kPi * 440.0 * n / sr));
  }
  Tensor mel = melspectrogram(audio, bank, fb, cfg);

  auto frames = oracle::dft_frames(audio.data(), samples, 512, 256, true);
  const auto fb_oracle = oracle::triangle_filterbank(128, 257, sr, 0.0, sr / 2.0, true);
  Tensor64 expected(Shape{1, 128, frames.n_frames});
  for (int m = 0; m < 128; ++m) {
    for (std::int64_t t = 0; t < frames.n_frames; ++t) {
      double acc = 0.0;
      for (int k = 0; k < 257; ++k) {
        const double re = frames.real[static_cast<std::size_t>(k * frames.n_frames + t)];
        const double im = frames.imag[static_cast<std::size_t>(k * frames.n_frames + t)];
        acc += fb_oracle[static_cast<std::size_t>(m * 257 + k)] * (re * re + im * im);
      }
      expected(0, m, t) = acc;
    }
  }
  CHECK(oracle::rel_inf_error(mel, expected) < 1e-4);
}

TEST_CASE("melspectrogram is invariant to channel permutation") {
  std::mt19937 gen(43);
  StftConfig cfg = rect_config(32, 16);
  auto bank = build_dft_kernels<float>(cfg);
  FilterbankConfig fb_cfg;
  fb_cfg.n_bands = 6;
  fb_cfg.n_bins = bank.n_bins;
  fb_cfg.sample_rate = 8000.0;
  fb_cfg.fmax = 4000.0;
  auto fb = build_filterbank<float>(fb_cfg);

  Tensor audio = random_audio(2, 128, gen);
  Tensor swapped(audio.shape());
  std::copy(audio.data() + 128, audio.data() + 256, swapped.data());
  std::copy(audio.data(), audio.data() + 128, swapped.data() + 128);

  Tensor mel = melspectrogram(audio, bank, fb, cfg);
  Tensor mel_swapped = melspectrogram(swapped, bank, fb, cfg);
  const std::int64_t half = mel.numel() / 2;
  for (std::int64_t i = 0; i < half; ++i) {
    CHECK(mel[i] == mel_swapped[half + i]);
    CHECK(mel[half + i] == mel_swapped[i]);
  }
}

TEST_CASE("melspectrogram rejects a mismatched filterbank") {
  StftConfig cfg = rect_config(32, 16);
  auto bank = build_dft_kernels<float>(cfg);
  Filterbank fb;
  fb.weights = Tensor(Shape{4, 9});  // bank has 17 bins
  Tensor audio = Tensor::full(Shape{1, 64}, 0.5f);
  CHECK_THROWS_AS(melspectrogram(audio, bank, fb, cfg), DomainError);
}
