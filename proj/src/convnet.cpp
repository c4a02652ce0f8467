#include "specgrad/convnet.hpp"

#include <algorithm>
#include <cmath>
#include <future>

#include "specgrad/errors.hpp"
#include "specgrad/rng.hpp"
#include "specgrad/tensor_ops.hpp"

namespace specgrad {

namespace {

struct ShapeTrace {
  std::int64_t channels, rows, cols;
  bool pooled = false;
};

std::string layer_name(const LayerSpec& layer, std::size_t index) {
  std::string name = "layer " + std::to_string(index + 1);
  if (const auto* conv = std::get_if<Conv2dLayer>(&layer)) {
    name += " (conv2d " + std::to_string(conv->kernel_h) + "x" + std::to_string(conv->kernel_w) +
            ")";
  } else if (std::holds_alternative<GlobalAveragePool>(layer)) {
    name += " (global average pool)";
  } else {
    name += " (dense)";
  }
  return name;
}

}  // namespace

void validate_net(const ConvNetSpec& spec) {
  if (spec.layers.empty()) {
    throw ConfigError("network has no layers");
  }
  if (spec.in_channels < 1 || spec.in_rows < 1 || spec.in_cols < 1) {
    throw ConfigError("network input shape must be positive");
  }
  ShapeTrace t{spec.in_channels, spec.in_rows, spec.in_cols};
  for (std::size_t i = 0; i < spec.layers.size(); ++i) {
    const LayerSpec& layer = spec.layers[i];
    const bool is_last = i + 1 == spec.layers.size();
    if (const auto* conv = std::get_if<Conv2dLayer>(&layer)) {
      if (t.pooled) {
        throw ConfigError(layer_name(layer, i) + ": conv after pooling is not supported");
      }
      if (conv->kernel_h > t.rows || conv->kernel_w > t.cols) {
        throw ConfigError(layer_name(layer, i) + ": input " + std::to_string(t.rows) + "x" +
                          std::to_string(t.cols) + " is smaller than the kernel");
      }
      if (conv->stride_h < 1 || conv->stride_w < 1 || conv->filters < 1) {
        throw ConfigError(layer_name(layer, i) + ": invalid stride or filter count");
      }
      if (conv->activation == Activation::kSoftmax && !is_last) {
        throw ConfigError(layer_name(layer, i) + ": softmax is only allowed on the final layer");
      }
      t.rows = (t.rows - conv->kernel_h) / conv->stride_h + 1;
      t.cols = (t.cols - conv->kernel_w) / conv->stride_w + 1;
      t.channels = conv->filters;
    } else if (std::holds_alternative<GlobalAveragePool>(layer)) {
      if (t.pooled) {
        throw ConfigError(layer_name(layer, i) + ": duplicate pooling layer");
      }
      t.pooled = true;
    } else {
      const auto& dense = std::get<DenseLayer>(layer);
      if (!t.pooled) {
        throw ConfigError(layer_name(layer, i) + ": dense must follow a pooling layer");
      }
      if (dense.units < 1) {
        throw ConfigError(layer_name(layer, i) + ": invalid unit count");
      }
      if (dense.activation == Activation::kSoftmax && !is_last) {
        throw ConfigError(layer_name(layer, i) + ": softmax is only allowed on the final layer");
      }
      t.channels = dense.units;
    }
  }
}

ConvNetSpec build_reference_net(std::int64_t n_freq_bins, std::int64_t n_time_frames) {
  if (n_freq_bins < 20) {
    throw ConfigError("reference net needs at least 20 frequency bins, got " +
                      std::to_string(n_freq_bins));
  }
  ConvNetSpec spec;
  spec.in_channels = 1;
  spec.in_rows = n_freq_bins;
  spec.in_cols = n_time_frames;
  spec.layers.push_back(Conv2dLayer{64, 20, 3, 2, 2, Activation::kRelu});
  for (int i = 0; i < 4; ++i) {
    spec.layers.push_back(Conv2dLayer{64, 3, 3, 2, 2, Activation::kRelu});
  }
  spec.layers.push_back(GlobalAveragePool{});
  spec.layers.push_back(DenseLayer{88, Activation::kSoftmax});
  validate_net(spec);
  return spec;
}

ConvNetSpec build_bench_net(int depth, std::int64_t n_freq_bins, std::int64_t n_time_frames) {
  if (depth < 1) {
    throw ConfigError("bench net depth must be >= 1, got " + std::to_string(depth));
  }
  ConvNetSpec spec;
  spec.in_channels = 1;
  spec.in_rows = n_freq_bins;
  spec.in_cols = n_time_frames;
  spec.layers.push_back(Conv2dLayer{64, 20, 3, 2, 2, Activation::kRelu});
  for (int i = 1; i < depth; ++i) {
    const int stride = i == 1 ? 2 : 1;
    spec.layers.push_back(Conv2dLayer{64, 3, 3, stride, stride, Activation::kRelu});
  }
  spec.layers.push_back(GlobalAveragePool{});
  spec.layers.push_back(DenseLayer{88, Activation::kSoftmax});
  validate_net(spec);
  return spec;
}

std::int64_t param_count(const ConvNetSpec& spec) {
  std::int64_t count = 0;
  std::int64_t features = spec.in_channels;
  for (const LayerSpec& layer : spec.layers) {
    if (const auto* conv = std::get_if<Conv2dLayer>(&layer)) {
      count += static_cast<std::int64_t>(conv->filters) *
               (features * conv->kernel_h * conv->kernel_w + 1);
      features = conv->filters;
    } else if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      count += static_cast<std::int64_t>(dense->units) * (features + 1);
      features = dense->units;
    }
  }
  return count;
}

ConvNet::ConvNet(ConvNetSpec spec) : spec_(std::move(spec)) {
  validate_net(spec_);
  std::int64_t channels = spec_.in_channels;
  for (const LayerSpec& layer : spec_.layers) {
    if (const auto* conv = std::get_if<Conv2dLayer>(&layer)) {
      conv_params_.push_back(
          {Tensor(Shape{conv->filters, channels, conv->kernel_h, conv->kernel_w}),
           Tensor(Shape{conv->filters})});
      channels = conv->filters;
    } else if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
      dense_weights_ = Tensor(Shape{dense->units, channels});
      dense_bias_ = Tensor(Shape{dense->units});
      channels = dense->units;
    }
  }
}

void ConvNet::randomize_weights(std::uint64_t seed) {
  CounterRng rng(seed);
  std::uint64_t cursor = 0;
  auto fill = [&](Tensor& t, double bound) {
    for (std::int64_t i = 0; i < t.numel(); ++i) {
      t[i] = static_cast<float>(bound * (2.0 * rng.uniform(cursor++) - 1.0));
    }
  };
  for (auto& p : conv_params_) {
    const double fan_in =
        static_cast<double>(p.weights.dim(1) * p.weights.dim(2) * p.weights.dim(3));
    fill(p.weights, std::sqrt(6.0 / fan_in));
    fill(p.bias, 0.0);
  }
  if (!dense_weights_.empty()) {
    fill(dense_weights_, std::sqrt(6.0 / static_cast<double>(dense_weights_.dim(1))));
    fill(dense_bias_, 0.0);
  }
}

Tensor ConvNet::forward_item(const float* item) const {
  Tensor current(Shape{spec_.in_channels, spec_.in_rows, spec_.in_cols},
                 std::vector<float>(item, item + spec_.in_channels * spec_.in_rows *
                                              spec_.in_cols));
  std::size_t conv_index = 0;
  Tensor pooled;
  Tensor output;
  for (const LayerSpec& layer : spec_.layers) {
    if (const auto* conv = std::get_if<Conv2dLayer>(&layer)) {
      const ConvParams& params = conv_params_[conv_index++];
      Tensor next = conv2d_strided(current, params.weights, conv->stride_h, conv->stride_w);
      const std::int64_t plane = next.dim(1) * next.dim(2);
      for (std::int64_t f = 0; f < next.dim(0); ++f) {
        const float b = params.bias[f];
        float* row = next.data() + f * plane;
        if (conv->activation == Activation::kRelu) {
          for (std::int64_t i = 0; i < plane; ++i) {
            const float v = row[i] + b;
            row[i] = v > 0.0f ? v : 0.0f;
          }
        } else {
          for (std::int64_t i = 0; i < plane; ++i) row[i] += b;
        }
      }
      current = std::move(next);
    } else if (std::holds_alternative<GlobalAveragePool>(layer)) {
      pooled = Tensor(Shape{current.dim(0)});
      const std::int64_t plane = current.dim(1) * current.dim(2);
      for (std::int64_t c = 0; c < current.dim(0); ++c) {
        double acc = 0.0;
        const float* row = current.data() + c * plane;
        for (std::int64_t i = 0; i < plane; ++i) acc += row[i];
        pooled[c] = static_cast<float>(acc / static_cast<double>(plane));
      }
    } else {
      const auto& dense = std::get<DenseLayer>(layer);
      output = Tensor(Shape{dense.units});
      for (std::int64_t u = 0; u < dense.units; ++u) {
        double acc = dense_bias_[u];
        const float* w_row = dense_weights_.data() + u * dense_weights_.dim(1);
        for (std::int64_t i = 0; i < dense_weights_.dim(1); ++i) {
          acc += static_cast<double>(w_row[i]) * static_cast<double>(pooled[i]);
        }
        output[u] = static_cast<float>(acc);
      }
      if (dense.activation == Activation::kSoftmax) {
        float peak = output[0];
        for (std::int64_t u = 1; u < dense.units; ++u) peak = std::max(peak, output[u]);
        double sum = 0.0;
        for (std::int64_t u = 0; u < dense.units; ++u) {
          const double e = std::exp(static_cast<double>(output[u] - peak));
          output[u] = static_cast<float>(e);
          sum += e;
        }
        for (std::int64_t u = 0; u < dense.units; ++u) {
          output[u] = static_cast<float>(output[u] / sum);
        }
      }
    }
  }
  // Nets without a dense head yield the pooled feature vector.
  return output.empty() ? pooled : output;
}

Tensor ConvNet::forward(const Tensor& input, bool parallel) const {
  if (input.rank() != 4) {
    throw DomainError("forward: input must be (batch, channels, rows, cols), got " +
                      input.shape().to_string());
  }
  if (input.dim(1) != spec_.in_channels || input.dim(2) != spec_.in_rows ||
      input.dim(3) != spec_.in_cols) {
    throw DomainError("forward: layer 1 expects input " +
                      Shape{spec_.in_channels, spec_.in_rows, spec_.in_cols}.to_string() +
                      ", got " + input.shape().to_string());
  }
  const std::int64_t batch = input.dim(0);
  const std::int64_t item_size = spec_.in_channels * spec_.in_rows * spec_.in_cols;
  std::vector<Tensor> rows(static_cast<std::size_t>(batch));
  if (parallel) {
    std::vector<std::future<Tensor>> futures;
    futures.reserve(static_cast<std::size_t>(batch));
    for (std::int64_t b = 0; b < batch; ++b) {
      futures.push_back(std::async(std::launch::async, [this, &input, b, item_size] {
        return forward_item(input.data() + b * item_size);
      }));
    }
    for (std::int64_t b = 0; b < batch; ++b) {
      rows[static_cast<std::size_t>(b)] = futures[static_cast<std::size_t>(b)].get();
    }
  } else {
    for (std::int64_t b = 0; b < batch; ++b) {
      rows[static_cast<std::size_t>(b)] = forward_item(input.data() + b * item_size);
    }
  }
  const std::int64_t units = rows[0].numel();
  Tensor out(Shape{batch, units});
  for (std::int64_t b = 0; b < batch; ++b) {
    std::copy(rows[static_cast<std::size_t>(b)].data(),
              rows[static_cast<std::size_t>(b)].data() + units, out.data() + b * units);
  }
  return out;
}

}  // namespace specgrad
