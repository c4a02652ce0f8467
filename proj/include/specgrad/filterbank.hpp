#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "specgrad/rng.hpp"
#include "specgrad/tensor.hpp"
#include "specgrad/tensor_ops.hpp"

namespace specgrad {

enum class FilterScale { kMel, kLog, kLinear, kRandom };

inline const char* to_string(FilterScale s) {
  switch (s) {
    case FilterScale::kMel: return "mel";
    case FilterScale::kLog: return "log";
    case FilterScale::kLinear: return "linear";
    case FilterScale::kRandom: return "random";
  }
  return "?";
}

// HTK mel scale.
inline double hz_to_mel(double f) {
  if (f < 0.0) {
    throw DomainError("hz_to_mel: negative frequency " + std::to_string(f));
  }
  return 2595.0 * std::log10(1.0 + f / 700.0);
}

inline double mel_to_hz(double m) {
  if (m < 0.0) {
    throw DomainError("mel_to_hz: negative mel value " + std::to_string(m));
  }
  return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0);
}

struct FilterbankConfig {
  FilterScale scale = FilterScale::kMel;
  int n_bands = 128;
  int n_bins = 257;
  double sample_rate = 22050.0;
  double fmin = 0.0;
  double fmax = 11025.0;
  std::uint64_t seed = 0;
  // Scales each triangle by 2 / (bandwidth in Hz) instead of peak 1.0.
  bool area_normalize = false;
};

template <class T>
struct FilterbankT {
  TensorT<T> weights;  // (n_bands, n_bins)
  FilterbankConfig config;
  std::vector<double> center_hz;  // triangle peaks; empty for the random scale
  std::vector<std::string> warnings;
};

using Filterbank = FilterbankT<float>;
using Filterbank64 = FilterbankT<double>;

namespace detail {

// Log-scale centers are spaced in log2(f); the floor keeps fmin = 0 usable.
inline constexpr double kLogScaleFloorHz = 27.5;

inline double scale_forward(FilterScale scale, double f) {
  switch (scale) {
    case FilterScale::kMel: return hz_to_mel(f);
    case FilterScale::kLog: return std::log2(std::max(f, kLogScaleFloorHz));
    default: return f;
  }
}

inline double scale_inverse(FilterScale scale, double v) {
  switch (scale) {
    case FilterScale::kMel: return mel_to_hz(v);
    case FilterScale::kLog: return std::exp2(v);
    default: return v;
  }
}

}  // namespace detail

// Triangular filters (peak 1.0) whose centers are equally spaced on the
// configured scale between fmin and fmax; bins are evaluated at their center
// frequencies k * (sample_rate/2) / (n_bins - 1). Random scale draws i.i.d.
// uniform [0,1) entries and normalizes each row to unit sum.
template <class T>
FilterbankT<T> build_filterbank(const FilterbankConfig& cfg) {
  if (cfg.n_bands < 1) {
    throw ConfigError("filterbank: n_bands must be >= 1, got " + std::to_string(cfg.n_bands));
  }
  if (cfg.n_bins < 2) {
    throw ConfigError("filterbank: n_bins must be >= 2, got " + std::to_string(cfg.n_bins));
  }
  if (cfg.sample_rate <= 0.0) {
    throw ConfigError("filterbank: sample_rate must be positive");
  }
  if (cfg.fmin < 0.0 || cfg.fmin >= cfg.fmax) {
    throw ConfigError("filterbank: need 0 <= fmin < fmax, got fmin=" + std::to_string(cfg.fmin) +
                      " fmax=" + std::to_string(cfg.fmax));
  }
  if (cfg.fmax > cfg.sample_rate / 2.0) {
    throw ConfigError("filterbank: fmax " + std::to_string(cfg.fmax) +
                      " exceeds Nyquist " + std::to_string(cfg.sample_rate / 2.0));
  }

  FilterbankT<T> fb;
  fb.config = cfg;
  fb.weights = TensorT<T>(Shape{cfg.n_bands, cfg.n_bins});
  if (cfg.n_bands > cfg.n_bins) {
    fb.warnings.push_back("n_bands " + std::to_string(cfg.n_bands) + " exceeds n_bins " +
                          std::to_string(cfg.n_bins) + "; filterbank is overcomplete");
  }

  if (cfg.scale == FilterScale::kRandom) {
    CounterRng rng(cfg.seed);
    for (std::int64_t m = 0; m < cfg.n_bands; ++m) {
      double row_sum = 0.0;
      for (std::int64_t k = 0; k < cfg.n_bins; ++k) {
        const double v = rng.uniform(static_cast<std::uint64_t>(m * cfg.n_bins + k));
        fb.weights(m, k) = static_cast<T>(v);
        row_sum += v;
      }
      if (row_sum > 0.0) {
        for (std::int64_t k = 0; k < cfg.n_bins; ++k) {
          fb.weights(m, k) = static_cast<T>(static_cast<double>(fb.weights(m, k)) / row_sum);
        }
      }
    }
    return fb;
  }

  const double lo = detail::scale_forward(cfg.scale, cfg.fmin);
  const double hi = detail::scale_forward(cfg.scale, cfg.fmax);
  // n_bands + 2 edge points; triangle m spans edges[m..m+2], peaking at m+1.
  std::vector<double> edges_hz(static_cast<std::size_t>(cfg.n_bands) + 2);
  for (std::size_t i = 0; i < edges_hz.size(); ++i) {
    const double v = lo + (hi - lo) * static_cast<double>(i) / (cfg.n_bands + 1);
    edges_hz[i] = detail::scale_inverse(cfg.scale, v);
  }

  const double bin_hz = (cfg.sample_rate / 2.0) / static_cast<double>(cfg.n_bins - 1);
  int narrow_rows = 0;
  for (std::int64_t m = 0; m < cfg.n_bands; ++m) {
    const double left = edges_hz[static_cast<std::size_t>(m)];
    const double center = edges_hz[static_cast<std::size_t>(m) + 1];
    const double right = edges_hz[static_cast<std::size_t>(m) + 2];
    fb.center_hz.push_back(center);
    const double gain = cfg.area_normalize ? 2.0 / (right - left) : 1.0;
    bool any = false;
    for (std::int64_t k = 0; k < cfg.n_bins; ++k) {
      const double f = static_cast<double>(k) * bin_hz;
      double w = 0.0;
      if (f > left && f < right) {
        w = (f <= center) ? (f - left) / (center - left) : (right - f) / (right - center);
      }
      if (w > 0.0) any = true;
      fb.weights(m, k) = static_cast<T>(w * gain);
    }
    if (!any) {
      // Triangle narrower than the bin spacing: keep the filter non-empty by
      // placing its peak on the nearest bin.
      const std::int64_t k = std::min<std::int64_t>(
          cfg.n_bins - 1, std::max<std::int64_t>(0, std::llround(center / bin_hz)));
      fb.weights(m, k) = static_cast<T>(gain);
      ++narrow_rows;
    }
  }
  if (narrow_rows > 0) {
    fb.warnings.push_back(std::to_string(narrow_rows) +
                          " filters are narrower than the bin spacing; their peaks were "
                          "assigned to the nearest bin");
  }
  return fb;
}

// Per channel: matmul(weights, power_spec[channel]).
template <class T>
TensorT<T> apply_filterbank(const FilterbankT<T>& fb, const TensorT<T>& power_spec) {
  if (power_spec.rank() != 3) {
    throw DomainError("apply_filterbank: expected (channels, n_bins, n_frames), got " +
                      power_spec.shape().to_string());
  }
  const std::int64_t channels = power_spec.dim(0);
  const std::int64_t n_bins = power_spec.dim(1);
  const std::int64_t n_frames = power_spec.dim(2);
  if (n_bins != fb.weights.dim(1)) {
    throw DomainError("apply_filterbank: filterbank has " + std::to_string(fb.weights.dim(1)) +
                      " bins but spectrogram has " + std::to_string(n_bins));
  }
  const std::int64_t n_bands = fb.weights.dim(0);
  TensorT<T> out(Shape{channels, n_bands, n_frames});
  for (std::int64_t c = 0; c < channels; ++c) {
    TensorT<T> slice(Shape{n_bins, n_frames},
                     std::vector<T>(power_spec.data() + c * n_bins * n_frames,
                                    power_spec.data() + (c + 1) * n_bins * n_frames));
    TensorT<T> product = matmul(fb.weights, slice);
    std::copy(product.data(), product.data() + n_bands * n_frames,
              out.data() + c * n_bands * n_frames);
  }
  return out;
}

}  // namespace specgrad
