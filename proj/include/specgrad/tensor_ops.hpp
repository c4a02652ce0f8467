#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "specgrad/tensor.hpp"

namespace specgrad {

namespace detail {

inline std::vector<std::int64_t> row_major_strides(const Shape& shape) {
  std::vector<std::int64_t> strides(static_cast<std::size_t>(shape.rank()));
  std::int64_t s = 1;
  for (int a = shape.rank() - 1; a >= 0; --a) {
    strides[static_cast<std::size_t>(a)] = s;
    s *= shape.dim(a);
  }
  return strides;
}

// Maps an element of `shape` to the linear index of the keepdims-reduced
// tensor where the axes in `reduced` collapse to size 1.
class ReducedIndexMap {
 public:
  ReducedIndexMap(const Shape& shape, const std::set<int>& reduced) {
    std::vector<std::int64_t> out_dims;
    for (int a = 0; a < shape.rank(); ++a) {
      out_dims.push_back(reduced.count(a) ? 1 : shape.dim(a));
    }
    out_shape_ = Shape(out_dims);
    in_strides_ = row_major_strides(shape);
    auto out_strides = row_major_strides(out_shape_);
    dims_ = shape.dims();
    map_strides_.resize(dims_.size());
    for (int a = 0; a < shape.rank(); ++a) {
      map_strides_[static_cast<std::size_t>(a)] =
          reduced.count(a) ? 0 : out_strides[static_cast<std::size_t>(a)];
    }
  }

  const Shape& out_shape() const { return out_shape_; }

  std::int64_t operator()(std::int64_t linear) const {
    std::int64_t out = 0;
    for (std::size_t a = 0; a < dims_.size(); ++a) {
      const std::int64_t coord = (linear / in_strides_[a]) % dims_[a];
      out += coord * map_strides_[a];
    }
    return out;
  }

 private:
  Shape out_shape_;
  std::vector<std::int64_t> dims_;
  std::vector<std::int64_t> in_strides_;
  std::vector<std::int64_t> map_strides_;
};

}  // namespace detail

// Valid-mode strided cross-correlation of one signal against a kernel bank.
// out[k][t] = sum_n signal[t*hop + n] * kernels[k][n]; no kernel flip.
template <class T>
TensorT<T> conv1d_valid(const TensorT<T>& signal, const TensorT<T>& kernels, std::int64_t hop) {
  if (signal.rank() != 1) {
    throw DomainError("conv1d_valid: signal must be rank 1, got " + signal.shape().to_string());
  }
  if (kernels.rank() != 2) {
    throw DomainError("conv1d_valid: kernels must be rank 2, got " + kernels.shape().to_string());
  }
  if (hop < 1) {
    throw DomainError("conv1d_valid: hop must be >= 1, got " + std::to_string(hop));
  }
  const std::int64_t length = signal.dim(0);
  const std::int64_t n_kernels = kernels.dim(0);
  const std::int64_t kernel_len = kernels.dim(1);
  if (kernel_len > length) {
    throw DomainError("conv1d_valid: kernel length " + std::to_string(kernel_len) +
                      " exceeds signal length " + std::to_string(length));
  }
  const std::int64_t n_frames = (length - kernel_len) / hop + 1;
  TensorT<T> out(Shape{n_kernels, n_frames});
  const T* x = signal.data();
  for (std::int64_t k = 0; k < n_kernels; ++k) {
    const T* krow = kernels.data() + k * kernel_len;
    for (std::int64_t t = 0; t < n_frames; ++t) {
      const T* frame = x + t * hop;
      double acc = 0.0;
      for (std::int64_t n = 0; n < kernel_len; ++n) {
        acc += static_cast<double>(frame[n]) * static_cast<double>(krow[n]);
      }
      out(k, t) = static_cast<T>(acc);
    }
  }
  return out;
}

// Valid-mode strided cross-correlation over (C_in, H, W) with a
// (C_out, C_in, kH, kW) kernel bank.
template <class T>
TensorT<T> conv2d_strided(const TensorT<T>& input, const TensorT<T>& kernels, std::int64_t stride_h,
                          std::int64_t stride_w) {
  if (input.rank() != 3) {
    throw DomainError("conv2d_strided: input must be rank 3, got " + input.shape().to_string());
  }
  if (kernels.rank() != 4) {
    throw DomainError("conv2d_strided: kernels must be rank 4, got " +
                      kernels.shape().to_string());
  }
  if (stride_h < 1 || stride_w < 1) {
    throw DomainError("conv2d_strided: strides must be >= 1");
  }
  const std::int64_t c_in = input.dim(0), h = input.dim(1), w = input.dim(2);
  const std::int64_t c_out = kernels.dim(0), kc = kernels.dim(1), kh = kernels.dim(2),
                     kw = kernels.dim(3);
  if (kc != c_in) {
    throw DomainError("conv2d_strided: kernel channels " + std::to_string(kc) +
                      " != input channels " + std::to_string(c_in));
  }
  if (kh > h || kw > w) {
    throw DomainError("conv2d_strided: kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                      " exceeds input extent " + std::to_string(h) + "x" + std::to_string(w));
  }
  const std::int64_t out_h = (h - kh) / stride_h + 1;
  const std::int64_t out_w = (w - kw) / stride_w + 1;
  TensorT<T> out(Shape{c_out, out_h, out_w});
  std::vector<double> acc(static_cast<std::size_t>(out_w));
  for (std::int64_t co = 0; co < c_out; ++co) {
    for (std::int64_t oy = 0; oy < out_h; ++oy) {
      std::fill(acc.begin(), acc.end(), 0.0);
      for (std::int64_t ci = 0; ci < c_in; ++ci) {
        for (std::int64_t ky = 0; ky < kh; ++ky) {
          const T* in_row = input.data() + (ci * h + oy * stride_h + ky) * w;
          const T* k_row = kernels.data() + ((co * c_in + ci) * kh + ky) * kw;
          for (std::int64_t kx = 0; kx < kw; ++kx) {
            const double kv = static_cast<double>(k_row[kx]);
            const T* in_base = in_row + kx;
            for (std::int64_t ox = 0; ox < out_w; ++ox) {
              acc[static_cast<std::size_t>(ox)] +=
                  static_cast<double>(in_base[ox * stride_w]) * kv;
            }
          }
        }
      }
      T* out_row = out.data() + (co * out_h + oy) * out_w;
      for (std::int64_t ox = 0; ox < out_w; ++ox) {
        out_row[ox] = static_cast<T>(acc[static_cast<std::size_t>(ox)]);
      }
    }
  }
  return out;
}

template <class T>
TensorT<T> matmul(const TensorT<T>& a, const TensorT<T>& b) {
  if (a.rank() != 2 || b.rank() != 2) {
    throw DomainError("matmul: operands must be rank 2, got " + a.shape().to_string() + " and " +
                      b.shape().to_string());
  }
  const std::int64_t m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
  if (k != k2) {
    throw DomainError("matmul: inner dimensions disagree, " + a.shape().to_string() + " vs " +
                      b.shape().to_string());
  }
  TensorT<T> out(Shape{m, n});
  std::vector<double> acc(static_cast<std::size_t>(n));
  for (std::int64_t i = 0; i < m; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::int64_t p = 0; p < k; ++p) {
      const double aip = static_cast<double>(a(i, p));
      const T* b_row = b.data() + p * n;
      for (std::int64_t j = 0; j < n; ++j) {
        acc[static_cast<std::size_t>(j)] += aip * static_cast<double>(b_row[j]);
      }
    }
    T* out_row = out.data() + i * n;
    for (std::int64_t j = 0; j < n; ++j) {
      out_row[j] = static_cast<T>(acc[static_cast<std::size_t>(j)]);
    }
  }
  return out;
}

template <class T>
struct MeanStd {
  TensorT<T> mean;
  TensorT<T> std;  // population standard deviation
};

// Mean and population std over the named axes; reduced dims kept with size 1.
template <class T>
MeanStd<T> reduce_stats(const TensorT<T>& t, const std::set<int>& axes) {
  if (t.empty()) {
    throw DomainError("reduce_stats: empty tensor");
  }
  for (int a : axes) {
    if (a < 0 || a >= t.rank()) {
      throw DomainError("reduce_stats: axis " + std::to_string(a) + " out of range for rank " +
                        std::to_string(t.rank()));
    }
  }
  detail::ReducedIndexMap map(t.shape(), axes);
  const std::int64_t out_n = map.out_shape().numel();
  std::vector<double> sum(static_cast<std::size_t>(out_n), 0.0);
  std::vector<double> sq(static_cast<std::size_t>(out_n), 0.0);
  const std::int64_t n = t.numel();
  for (std::int64_t i = 0; i < n; ++i) {
    sum[static_cast<std::size_t>(map(i))] += static_cast<double>(t[i]);
  }
  const double count = static_cast<double>(n / out_n);
  for (auto& s : sum) s /= count;
  for (std::int64_t i = 0; i < n; ++i) {
    const std::size_t o = static_cast<std::size_t>(map(i));
    const double d = static_cast<double>(t[i]) - sum[o];
    sq[o] += d * d;
  }
  MeanStd<T> result{TensorT<T>(map.out_shape()), TensorT<T>(map.out_shape())};
  for (std::int64_t o = 0; o < out_n; ++o) {
    result.mean[o] = static_cast<T>(sum[static_cast<std::size_t>(o)]);
    result.std[o] = static_cast<T>(std::sqrt(sq[static_cast<std::size_t>(o)] / count));
  }
  return result;
}

template <class T, class F>
TensorT<T> map_elementwise(const TensorT<T>& t, F f) {
  TensorT<T> out(t.shape());
  const std::int64_t n = t.numel();
  for (std::int64_t i = 0; i < n; ++i) {
    out[i] = f(t[i]);
  }
  return out;
}

template <class T>
TensorT<T> relu(const TensorT<T>& t) {
  return map_elementwise(t, [](T v) { return v > T(0) ? v : T(0); });
}

template <class T>
TensorT<T> scale_add(const TensorT<T>& t, T scale, T offset) {
  return map_elementwise(t, [=](T v) { return scale * v + offset; });
}

// log10 with the input floored at `floor`, so zeros stay finite.
template <class T>
TensorT<T> log10_clamped(const TensorT<T>& t, T floor) {
  return map_elementwise(t, [=](T v) { return static_cast<T>(std::log10(std::max(v, floor))); });
}

}  // namespace specgrad
