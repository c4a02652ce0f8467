#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "specgrad/filterbank.hpp"
#include "specgrad/tensor.hpp"
#include "specgrad/tensor_ops.hpp"

namespace specgrad {

// Power floor and clamp width for decibel conversion.
inline constexpr double kDecibelAmin = 1e-10;
inline constexpr double kDecibelDynamicRange = 80.0;

enum class Window { kHann, kRectangular };

inline const char* to_string(Window w) {
  return w == Window::kHann ? "hann" : "rectangular";
}

struct StftConfig {
  int n_dft = 512;
  int n_hop = 256;
  double sample_rate = 22050.0;
  Window window = Window::kHann;
  bool return_decibel = false;
  double power_exponent = 2.0;  // 2.0 = power spectrogram
};

inline bool is_power_of_two(std::int64_t v) { return v > 0 && (v & (v - 1)) == 0; }

inline void validate(const StftConfig& cfg) {
  if (!is_power_of_two(cfg.n_dft)) {
    throw ConfigError("n_dft must be a power of two, got " + std::to_string(cfg.n_dft));
  }
  if (cfg.n_hop < 1 || cfg.n_hop > cfg.n_dft) {
    throw ConfigError("n_hop must be in [1, n_dft], got " + std::to_string(cfg.n_hop));
  }
  if (cfg.sample_rate <= 0.0) {
    throw ConfigError("sample_rate must be positive");
  }
  if (cfg.power_exponent < 1.0) {
    throw ConfigError("power_exponent must be >= 1, got " + std::to_string(cfg.power_exponent));
  }
}

// One-sided DFT kernel pair, window applied:
//   cos_kernels[k][n] = w[n] * cos(2*pi*k*n / n_dft)
//   sin_kernels[k][n] = w[n] * sin(2*pi*k*n / n_dft)
// with k in [0, n_dft/2]. Row 0 of sin_kernels is identically zero.
template <class T>
struct DftKernelBankT {
  TensorT<T> cos_kernels;  // (n_bins, n_dft)
  TensorT<T> sin_kernels;  // (n_bins, n_dft)
  int n_dft = 0;
  int n_bins = 0;
};

using DftKernelBank = DftKernelBankT<float>;
using DftKernelBank64 = DftKernelBankT<double>;

template <class T>
DftKernelBankT<T> build_dft_kernels(const StftConfig& cfg) {
  validate(cfg);
  const int n = cfg.n_dft;
  const int n_bins = n / 2 + 1;
  DftKernelBankT<T> bank;
  bank.n_dft = n;
  bank.n_bins = n_bins;
  bank.cos_kernels = TensorT<T>(Shape{n_bins, n});
  bank.sin_kernels = TensorT<T>(Shape{n_bins, n});
  constexpr double kTwoPi = 6.283185307179586476925286766559;
  for (int i = 0; i < n; ++i) {
    // Periodic hann: w[n] = 0.5 - 0.5*cos(2*pi*n/N).
    const double w = cfg.window == Window::kHann
                         ? 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / n)
                         : 1.0;
    for (int k = 0; k < n_bins; ++k) {
      const double phase = kTwoPi * static_cast<double>(k) * static_cast<double>(i) / n;
      bank.cos_kernels(k, i) = static_cast<T>(w * std::cos(phase));
      bank.sin_kernels(k, i) = static_cast<T>(w * std::sin(phase));
    }
  }
  return bank;
}

template <class T>
struct StftOutput {
  TensorT<T> real;  // (channels, n_bins, n_frames)
  TensorT<T> imag;
};

// Frame count for valid framing: floor((samples - n_dft) / n_hop) + 1.
inline std::int64_t stft_frame_count(std::int64_t samples, int n_dft, int n_hop) {
  return (samples - n_dft) / n_hop + 1;
}

// STFT as strided correlation against the kernel bank, channels independent.
// The imaginary part carries the minus sign of the forward transform.
template <class T>
StftOutput<T> stft_conv(const TensorT<T>& audio, const DftKernelBankT<T>& bank,
                        const StftConfig& cfg) {
  validate(cfg);
  if (audio.rank() != 2) {
    throw DomainError("stft_conv: audio must be (channels, samples), got " +
                      audio.shape().to_string());
  }
  const std::int64_t channels = audio.dim(0);
  const std::int64_t samples = audio.dim(1);
  if (samples < cfg.n_dft) {
    throw DomainError("stft_conv: audio length " + std::to_string(samples) +
                      " shorter than n_dft " + std::to_string(cfg.n_dft));
  }
  const std::int64_t n_frames = stft_frame_count(samples, cfg.n_dft, cfg.n_hop);
  const std::int64_t n_bins = bank.n_bins;
  StftOutput<T> out{TensorT<T>(Shape{channels, n_bins, n_frames}),
                    TensorT<T>(Shape{channels, n_bins, n_frames})};
  for (std::int64_t c = 0; c < channels; ++c) {
    TensorT<T> x(Shape{samples}, std::vector<T>(audio.data() + c * samples,
                                                audio.data() + (c + 1) * samples));
    TensorT<T> re = conv1d_valid(x, bank.cos_kernels, cfg.n_hop);
    TensorT<T> im = conv1d_valid(x, bank.sin_kernels, cfg.n_hop);
    T* re_dst = out.real.data() + c * n_bins * n_frames;
    T* im_dst = out.imag.data() + c * n_bins * n_frames;
    for (std::int64_t i = 0; i < n_bins * n_frames; ++i) {
      re_dst[i] = re[i];
      im_dst[i] = -im[i];
    }
  }
  return out;
}

// (real^2 + imag^2) ^ (power_exponent / 2)
template <class T>
TensorT<T> power_spectrogram(const TensorT<T>& real, const TensorT<T>& imag,
                             double power_exponent) {
  if (real.shape() != imag.shape()) {
    throw DomainError("power_spectrogram: real " + real.shape().to_string() + " and imag " +
                      imag.shape().to_string() + " differ");
  }
  TensorT<T> out(real.shape());
  const std::int64_t n = real.numel();
  if (power_exponent == 2.0) {
    for (std::int64_t i = 0; i < n; ++i) {
      const double r = real[i], im = imag[i];
      out[i] = static_cast<T>(r * r + im * im);
    }
  } else if (power_exponent == 1.0) {
    for (std::int64_t i = 0; i < n; ++i) {
      const double r = real[i], im = imag[i];
      out[i] = static_cast<T>(std::sqrt(r * r + im * im));
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      const double r = real[i], im = imag[i];
      out[i] = static_cast<T>(std::pow(r * r + im * im, power_exponent / 2.0));
    }
  }
  return out;
}

// 10*log10(max(t, amin)), then clamped to [max - dynamic_range, max]. The
// max-clamp is applied per call, i.e. per single data item.
template <class T>
TensorT<T> amplitude_to_decibel(const TensorT<T>& t) {
  const std::int64_t n = t.numel();
  for (std::int64_t i = 0; i < n; ++i) {
    if (t[i] < T(0)) {
      throw DomainError("amplitude_to_decibel: negative input at index " + std::to_string(i));
    }
  }
  TensorT<T> out(t.shape());
  double peak = -std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = 10.0 * std::log10(std::max(static_cast<double>(t[i]), kDecibelAmin));
    out[i] = static_cast<T>(d);
    peak = std::max(peak, d);
  }
  const double floor_db = peak - kDecibelDynamicRange;
  for (std::int64_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(out[i]);
    out[i] = static_cast<T>(std::min(std::max(d, floor_db), peak));
  }
  return out;
}

// Filterbank projection of the power spectrogram; decibel-scaled when the
// config asks for it. Output is (channels, n_bands, n_frames).
template <class T>
TensorT<T> melspectrogram(const TensorT<T>& audio, const DftKernelBankT<T>& bank,
                          const FilterbankT<T>& fb, const StftConfig& cfg) {
  if (fb.weights.dim(1) != bank.n_bins) {
    throw DomainError("melspectrogram: filterbank has " + std::to_string(fb.weights.dim(1)) +
                      " bins but kernel bank produces " + std::to_string(bank.n_bins));
  }
  StftOutput<T> stft = stft_conv(audio, bank, cfg);
  TensorT<T> power = power_spectrogram(stft.real, stft.imag, cfg.power_exponent);
  TensorT<T> mel = apply_filterbank(fb, power);
  return cfg.return_decibel ? amplitude_to_decibel(mel) : mel;
}

}  // namespace specgrad
