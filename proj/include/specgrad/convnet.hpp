#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "specgrad/tensor.hpp"

namespace specgrad {

enum class Activation { kNone, kRelu, kSoftmax };

struct Conv2dLayer {
  int filters;
  int kernel_h;
  int kernel_w;
  int stride_h;
  int stride_w;
  Activation activation;
};

struct GlobalAveragePool {};

struct DenseLayer {
  int units;
  Activation activation;
};

using LayerSpec = std::variant<Conv2dLayer, GlobalAveragePool, DenseLayer>;

struct ConvNetSpec {
  std::vector<LayerSpec> layers;
  std::int64_t in_channels = 1;
  std::int64_t in_rows = 0;  // frequency bins
  std::int64_t in_cols = 0;  // time frames
};

// The fixed 5-conv-layer reference network used by the overhead benchmark:
// conv2d(64, (20,3)) then four conv2d(64, (3,3)), all stride (2,2) with ReLU,
// a global average pool, and a dense softmax layer with 88 output nodes.
ConvNetSpec build_reference_net(std::int64_t n_freq_bins, std::int64_t n_time_frames = 124);

// Depth-parameterized variant for benchmark sweeps. Layer 1 is always the
// (20,3) stride-2 conv; layer 2 the (3,3) stride-2 conv; layers beyond the
// second use unit stride so added depth keeps a meaningful per-layer cost.
// depth 5 therefore differs from the reference topology above.
ConvNetSpec build_bench_net(int depth, std::int64_t n_freq_bins, std::int64_t n_time_frames);

// Walks the spec and throws ConfigError naming the first layer whose kernel
// no longer fits the running spatial extent.
void validate_net(const ConvNetSpec& spec);

std::int64_t param_count(const ConvNetSpec& spec);

// A spec plus concrete parameters. Weights start at zero; randomize_weights
// draws fan-in-scaled uniform values deterministically from the seed.
class ConvNet {
 public:
  explicit ConvNet(ConvNetSpec spec);

  void randomize_weights(std::uint64_t seed);

  // input (batch, channels, rows, cols) -> (batch, units). With parallel set,
  // batch items are evaluated on separate threads; results are identical to
  // the serial path.
  Tensor forward(const Tensor& input, bool parallel = false) const;

  const ConvNetSpec& spec() const { return spec_; }
  std::int64_t param_count() const { return specgrad::param_count(spec_); }

  const Tensor& conv_weights(std::size_t conv_index) const {
    return conv_params_.at(conv_index).weights;
  }
  const Tensor& conv_bias(std::size_t conv_index) const {
    return conv_params_.at(conv_index).bias;
  }
  const Tensor& dense_weights() const { return dense_weights_; }
  const Tensor& dense_bias() const { return dense_bias_; }

 private:
  Tensor forward_item(const float* item) const;

  ConvNetSpec spec_;
  struct ConvParams {
    Tensor weights;  // (filters, c_in, kh, kw)
    Tensor bias;     // (filters)
  };
  std::vector<ConvParams> conv_params_;
  Tensor dense_weights_;  // (units, in)
  Tensor dense_bias_;     // (units)
};

}  // namespace specgrad
