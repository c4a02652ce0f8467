#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "specgrad/tensor.hpp"

namespace specgrad {

// Decoded PCM audio, channel-deinterleaved, values in [-1, 1].
struct AudioBuffer {
  Tensor samples;  // (channels, length)
  double sample_rate = 0.0;
};

// Reads RIFF/WAVE with fmt codes 1 (16-bit PCM) or 3 (32-bit IEEE float),
// 1-2 channels. 16-bit samples are scaled by 1/32768.
AudioBuffer read_wav(const std::string& path);

// KTF1 binary tensor file:
//   magic "KTF1" | dtype u8 (0 = f32le, 1 = f64le) | rank u8 |
//   dims rank x u32le | payload row-major scalars | crc32(payload) u32le
enum class KtfDtype : std::uint8_t { kFloat32 = 0, kFloat64 = 1 };

// Writes to a temporary file in the same directory and renames on success,
// so a failed write never leaves a partial output behind.
void write_tensor(const std::string& path, const Tensor& t);
void write_tensor(const std::string& path, const Tensor64& t);

using AnyTensor = std::variant<Tensor, Tensor64>;

AnyTensor read_tensor_any(const std::string& path);

// Throws FormatError when the file's dtype does not match T.
template <class T>
TensorT<T> read_tensor(const std::string& path);

extern template Tensor read_tensor<float>(const std::string&);
extern template Tensor64 read_tensor<double>(const std::string&);

}  // namespace specgrad
