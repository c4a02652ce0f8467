#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "specgrad/filterbank.hpp"
#include "specgrad/rng.hpp"
#include "specgrad/tensor.hpp"
#include "specgrad/time_frequency.hpp"

namespace specgrad {

template <class T>
struct GradResultT {
  TensorT<T> d_input;
  std::map<std::string, TensorT<T>> d_params;
};

using GradResult = GradResultT<float>;
using GradResult64 = GradResultT<double>;

// Backward pass of stft_conv. Upstream gradients arrive for the real and
// imaginary branches; the sine-branch sign follows the forward convention
// imag = -conv(x, sin_kernels). Parameter gradients ("cos_kernels",
// "sin_kernels") are emitted only when kernels_trainable.
template <class T>
GradResultT<T> stft_backward(const TensorT<T>& audio, const DftKernelBankT<T>& bank,
                             const StftConfig& cfg, const TensorT<T>& d_real,
                             const TensorT<T>& d_imag, bool kernels_trainable = true) {
  validate(cfg);
  if (audio.rank() != 2) {
    throw DomainError("stft_backward: audio must be (channels, samples)");
  }
  const std::int64_t channels = audio.dim(0);
  const std::int64_t samples = audio.dim(1);
  if (samples < cfg.n_dft) {
    throw DomainError("stft_backward: audio shorter than n_dft");
  }
  const std::int64_t n_frames = stft_frame_count(samples, cfg.n_dft, cfg.n_hop);
  const std::int64_t n_bins = bank.n_bins;
  const Shape expect{channels, n_bins, n_frames};
  if (d_real.shape() != expect || d_imag.shape() != expect) {
    throw DomainError("stft_backward: upstream shape mismatch, expected " + expect.to_string() +
                      ", got " + d_real.shape().to_string() + " and " +
                      d_imag.shape().to_string());
  }
  const std::int64_t n_dft = cfg.n_dft;
  const std::int64_t hop = cfg.n_hop;

  GradResultT<T> result;
  std::vector<double> dx(static_cast<std::size_t>(channels * samples), 0.0);
  std::vector<double> dcos;
  std::vector<double> dsin;
  if (kernels_trainable) {
    dcos.assign(static_cast<std::size_t>(n_bins * n_dft), 0.0);
    dsin.assign(static_cast<std::size_t>(n_bins * n_dft), 0.0);
  }

  for (std::int64_t c = 0; c < channels; ++c) {
    const T* x = audio.data() + c * samples;
    double* dx_c = dx.data() + c * samples;
    for (std::int64_t t = 0; t < n_frames; ++t) {
      const T* frame = x + t * hop;
      double* dx_frame = dx_c + t * hop;
      for (std::int64_t k = 0; k < n_bins; ++k) {
        const double dr = d_real(c, k, t);
        const double di = d_imag(c, k, t);
        const T* cos_row = bank.cos_kernels.data() + k * n_dft;
        const T* sin_row = bank.sin_kernels.data() + k * n_dft;
        for (std::int64_t n = 0; n < n_dft; ++n) {
          dx_frame[n] += static_cast<double>(cos_row[n]) * dr -
                         static_cast<double>(sin_row[n]) * di;
        }
        if (kernels_trainable) {
          double* dcos_row = dcos.data() + k * n_dft;
          double* dsin_row = dsin.data() + k * n_dft;
          for (std::int64_t n = 0; n < n_dft; ++n) {
            const double xv = static_cast<double>(frame[n]);
            dcos_row[n] += xv * dr;
            dsin_row[n] -= xv * di;
          }
        }
      }
    }
  }

  result.d_input = TensorT<T>(audio.shape());
  for (std::int64_t i = 0; i < channels * samples; ++i) {
    result.d_input[i] = static_cast<T>(dx[static_cast<std::size_t>(i)]);
  }
  if (kernels_trainable) {
    TensorT<T> d_cos(Shape{n_bins, n_dft});
    TensorT<T> d_sin(Shape{n_bins, n_dft});
    for (std::int64_t i = 0; i < n_bins * n_dft; ++i) {
      d_cos[i] = static_cast<T>(dcos[static_cast<std::size_t>(i)]);
      d_sin[i] = static_cast<T>(dsin[static_cast<std::size_t>(i)]);
    }
    result.d_params.emplace("cos_kernels", std::move(d_cos));
    result.d_params.emplace("sin_kernels", std::move(d_sin));
  }
  return result;
}

// Backward pass of apply_filterbank:
//   d_weights = sum_c upstream[c] * power_spec[c]^T
//   d_input[c] = weights^T * upstream[c]
template <class T>
GradResultT<T> filterbank_backward(const FilterbankT<T>& fb, const TensorT<T>& power_spec,
                                   const TensorT<T>& upstream, bool weights_trainable = true) {
  if (power_spec.rank() != 3 || upstream.rank() != 3) {
    throw DomainError("filterbank_backward: expected rank-3 spectrograms");
  }
  const std::int64_t channels = power_spec.dim(0);
  const std::int64_t n_bins = power_spec.dim(1);
  const std::int64_t n_frames = power_spec.dim(2);
  const std::int64_t n_bands = fb.weights.dim(0);
  if (fb.weights.dim(1) != n_bins) {
    throw DomainError("filterbank_backward: filterbank bins " + std::to_string(fb.weights.dim(1)) +
                      " != spectrogram bins " + std::to_string(n_bins));
  }
  if (upstream.shape() != Shape{channels, n_bands, n_frames}) {
    throw DomainError("filterbank_backward: upstream shape mismatch, expected " +
                      Shape{channels, n_bands, n_frames}.to_string() + ", got " +
                      upstream.shape().to_string());
  }

  GradResultT<T> result;
  result.d_input = TensorT<T>(power_spec.shape());
  std::vector<double> dw;
  if (weights_trainable) dw.assign(static_cast<std::size_t>(n_bands * n_bins), 0.0);
  std::vector<double> dspec(static_cast<std::size_t>(n_bins * n_frames));
  for (std::int64_t c = 0; c < channels; ++c) {
    const T* up = upstream.data() + c * n_bands * n_frames;
    const T* spec = power_spec.data() + c * n_bins * n_frames;
    std::fill(dspec.begin(), dspec.end(), 0.0);
    for (std::int64_t m = 0; m < n_bands; ++m) {
      const T* up_row = up + m * n_frames;
      const T* w_row = fb.weights.data() + m * n_bins;
      for (std::int64_t k = 0; k < n_bins; ++k) {
        const double wv = static_cast<double>(w_row[k]);
        const T* spec_row = spec + k * n_frames;
        double* dspec_row = dspec.data() + k * n_frames;
        double acc = 0.0;
        for (std::int64_t f = 0; f < n_frames; ++f) {
          const double u = static_cast<double>(up_row[f]);
          acc += u * static_cast<double>(spec_row[f]);
          dspec_row[f] += wv * u;
        }
        if (weights_trainable) {
          dw[static_cast<std::size_t>(m * n_bins + k)] += acc;
        }
      }
    }
    T* d_in = result.d_input.data() + c * n_bins * n_frames;
    for (std::int64_t i = 0; i < n_bins * n_frames; ++i) {
      d_in[i] = static_cast<T>(dspec[static_cast<std::size_t>(i)]);
    }
  }
  if (weights_trainable) {
    TensorT<T> d_weights(Shape{n_bands, n_bins});
    for (std::int64_t i = 0; i < n_bands * n_bins; ++i) {
      d_weights[i] = static_cast<T>(dw[static_cast<std::size_t>(i)]);
    }
    result.d_params.emplace("filterbank_weights", std::move(d_weights));
  }
  return result;
}

// Backward pass of power_spectrogram, exponent 2 only:
//   d_real = 2 * real * upstream, d_imag = 2 * imag * upstream.
template <class T>
std::pair<TensorT<T>, TensorT<T>> power_spectrogram_backward(const TensorT<T>& real,
                                                             const TensorT<T>& imag,
                                                             double power_exponent,
                                                             const TensorT<T>& upstream) {
  if (power_exponent != 2.0) {
    throw DomainError("power_spectrogram gradient is implemented for exponent 2 only, got " +
                      std::to_string(power_exponent));
  }
  if (real.shape() != imag.shape() || real.shape() != upstream.shape()) {
    throw DomainError("power_spectrogram_backward: shape mismatch");
  }
  TensorT<T> d_real(real.shape());
  TensorT<T> d_imag(real.shape());
  const std::int64_t n = real.numel();
  for (std::int64_t i = 0; i < n; ++i) {
    const double u = upstream[i];
    d_real[i] = static_cast<T>(2.0 * static_cast<double>(real[i]) * u);
    d_imag[i] = static_cast<T>(2.0 * static_cast<double>(imag[i]) * u);
  }
  return {std::move(d_real), std::move(d_imag)};
}

// Backward pass of amplitude_to_decibel: upstream * 10 / (ln(10) * t), zero
// where the input sat below amin or the dynamic-range clamp rewrote the value.
template <class T>
TensorT<T> decibel_backward(const TensorT<T>& t, const TensorT<T>& upstream) {
  if (t.shape() != upstream.shape()) {
    throw DomainError("decibel_backward: shape mismatch");
  }
  const std::int64_t n = t.numel();
  double peak = -std::numeric_limits<double>::infinity();
  for (std::int64_t i = 0; i < n; ++i) {
    if (t[i] < T(0)) {
      throw DomainError("decibel_backward: negative input at index " + std::to_string(i));
    }
    peak = std::max(peak, 10.0 * std::log10(std::max(static_cast<double>(t[i]), kDecibelAmin)));
  }
  const double floor_db = peak - kDecibelDynamicRange;
  constexpr double kTenOverLn10 = 4.3429448190325182765112891891661;
  TensorT<T> out(t.shape());
  for (std::int64_t i = 0; i < n; ++i) {
    const double v = static_cast<double>(t[i]);
    const double db = 10.0 * std::log10(std::max(v, kDecibelAmin));
    const bool pass = v >= kDecibelAmin && db >= floor_db;
    out[i] = pass ? static_cast<T>(static_cast<double>(upstream[i]) * kTenOverLn10 / v) : T(0);
  }
  return out;
}

struct FdReport {
  double max_rel_err = 0.0;
  std::int64_t worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  bool forward_finite = true;
  std::int64_t probes = 0;
};

// Central-difference check of an analytic gradient. Probes every coordinate
// up to max_probes, then a deterministic random subsample (>= 64). The error
// is max |fd - analytic| normalized by the largest gradient magnitude seen.
// step_scale 0 picks 1e-3 for float and 1e-6 for double; the per-coordinate
// step is step_scale * max(1, |x_i|).
template <class T>
FdReport finite_difference_check(const std::function<double(const TensorT<T>&)>& forward,
                                 const TensorT<T>& at, const TensorT<T>& analytic,
                                 double step_scale = 0.0, std::int64_t max_probes = 256,
                                 std::uint64_t seed = 0) {
  if (at.shape() != analytic.shape()) {
    throw DomainError("finite_difference_check: analytic gradient shape mismatch");
  }
  if (step_scale < 0.0) {
    throw DomainError("finite_difference_check: step must be positive");
  }
  if (step_scale == 0.0) {
    step_scale = std::is_same_v<T, float> ? 1e-3 : 1e-6;
  }
  const std::int64_t n = at.numel();
  std::vector<std::int64_t> indices;
  if (n <= max_probes) {
    indices.resize(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) indices[static_cast<std::size_t>(i)] = i;
  } else {
    const std::int64_t probes = std::max<std::int64_t>(64, max_probes);
    std::vector<std::int64_t> pool(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    CounterRng rng(seed, 0x5a17);
    for (std::int64_t i = 0; i < probes; ++i) {
      const std::int64_t j =
          i + static_cast<std::int64_t>(rng.bits(static_cast<std::uint64_t>(i)) %
                                        static_cast<std::uint64_t>(n - i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    indices.assign(pool.begin(), pool.begin() + probes);
  }

  FdReport report;
  report.probes = static_cast<std::int64_t>(indices.size());
  TensorT<T> x = at;
  double worst_abs = -1.0;
  double grad_norm = 0.0;
  for (std::int64_t idx : indices) {
    const T saved = x[idx];
    const double h = step_scale * std::max(1.0, std::abs(static_cast<double>(saved)));
    x[idx] = static_cast<T>(static_cast<double>(saved) + h);
    const double f_plus = forward(x);
    x[idx] = static_cast<T>(static_cast<double>(saved) - h);
    const double f_minus = forward(x);
    x[idx] = saved;
    if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
      report.forward_finite = false;
      report.max_rel_err = std::numeric_limits<double>::infinity();
      report.worst_index = idx;
      return report;
    }
    const double fd = (f_plus - f_minus) / (2.0 * h);
    const double a = static_cast<double>(analytic[idx]);
    const double diff = std::abs(fd - a);
    grad_norm = std::max({grad_norm, std::abs(fd), std::abs(a)});
    if (diff > worst_abs) {
      worst_abs = diff;
      report.worst_index = idx;
      report.worst_analytic = a;
      report.worst_numeric = fd;
    }
  }
  report.max_rel_err = worst_abs <= 0.0 ? 0.0 : worst_abs / std::max(grad_norm, 1e-300);
  return report;
}

}  // namespace specgrad
