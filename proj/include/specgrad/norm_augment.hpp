#pragma once

#include <cstdint>
#include <set>
#include <string>

#include "specgrad/rng.hpp"
#include "specgrad/tensor.hpp"
#include "specgrad/tensor_ops.hpp"

namespace specgrad {

// Which slice family of a (batch, channel, freq, time) tensor is standardized.
enum class NormAxis { kFreq, kTime, kChannel, kData, kBatch };

inline const char* to_string(NormAxis a) {
  switch (a) {
    case NormAxis::kFreq: return "freq";
    case NormAxis::kTime: return "time";
    case NormAxis::kChannel: return "channel";
    case NormAxis::kData: return "data";
    case NormAxis::kBatch: return "batch";
  }
  return "?";
}

enum class Phase { kTraining, kInference };

enum class NoiseType { kGaussian };  // room for other colors later

struct NoiseConfig {
  NoiseType type = NoiseType::kGaussian;
  double power = 0.2;  // noise standard deviation
  bool randomize_gain = false;
  std::uint64_t seed = 0;
};

inline constexpr double kNormEpsilon = 1e-8;  // added to std, not variance

namespace detail {

inline std::set<int> norm_pool_axes(NormAxis axis) {
  switch (axis) {
    case NormAxis::kFreq: return {0, 1, 3};
    case NormAxis::kTime: return {0, 1, 2};
    case NormAxis::kChannel: return {0, 2, 3};
    case NormAxis::kData: return {1, 2, 3};
    case NormAxis::kBatch: return {0, 1, 2, 3};
  }
  return {};
}

}  // namespace detail

// (t - mean) / (std + eps), statistics pooled over every axis except the
// retained one (freq/time/channel), per batch item (data), or over the whole
// tensor (batch). Constant input comes back as zeros.
template <class T>
TensorT<T> normalize2d(const TensorT<T>& t, NormAxis axis) {
  if (t.rank() != 4) {
    throw DomainError("normalize2d: expected (batch, channel, freq, time), got " +
                      t.shape().to_string());
  }
  const std::set<int> pool = detail::norm_pool_axes(axis);
  MeanStd<T> stats = reduce_stats(t, pool);
  detail::ReducedIndexMap map(t.shape(), pool);
  TensorT<T> out(t.shape());
  const std::int64_t n = t.numel();
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t o = map(i);
    const double denom = static_cast<double>(stats.std[o]) + kNormEpsilon;
    out[i] = static_cast<T>((static_cast<double>(t[i]) - static_cast<double>(stats.mean[o])) /
                            denom);
  }
  return out;
}

// Training phase adds gain * eta with eta i.i.d. standard Gaussian from the
// seed; inference is a bitwise pass-through. With randomize_gain the gain is
// drawn once per data item, uniform in [0, power); a data item is one index
// along axis 0 for rank-4 input and the whole tensor otherwise.
template <class T>
TensorT<T> additive_noise(const TensorT<T>& t, const NoiseConfig& cfg, Phase phase) {
  if (cfg.power < 0.0) {
    throw DomainError("additive_noise: power must be >= 0, got " + std::to_string(cfg.power));
  }
  if (phase == Phase::kInference) {
    return t;
  }
  TensorT<T> out(t.shape());
  const std::int64_t n = t.numel();
  const std::int64_t items = t.rank() == 4 ? t.dim(0) : 1;
  const std::int64_t item_size = n / items;
  CounterRng noise_stream(cfg.seed, 0);
  CounterRng gain_stream(cfg.seed, 1);
  for (std::int64_t item = 0; item < items; ++item) {
    const double gain = cfg.randomize_gain
                            ? cfg.power * gain_stream.uniform(static_cast<std::uint64_t>(item))
                            : cfg.power;
    const std::int64_t base = item * item_size;
    for (std::int64_t i = 0; i < item_size; ++i) {
      const double eta = noise_stream.gaussian(static_cast<std::uint64_t>(base + i));
      out[base + i] = static_cast<T>(static_cast<double>(t[base + i]) + gain * eta);
    }
  }
  return out;
}

}  // namespace specgrad
