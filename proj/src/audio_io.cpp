#include "specgrad/audio_io.hpp"

#include <unistd.h>
#include <zlib.h>

#include <atomic>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <vector>

#include "specgrad/errors.hpp"

namespace specgrad {

namespace {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; byte-swapped hosts are not supported");

constexpr std::int64_t kMaxDim = std::int64_t(1) << 31;

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<unsigned char> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path);
  }
  in.seekg(0, std::ios::end);
  const std::streamoff size = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<unsigned char> bytes(static_cast<std::size_t>(size));
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), size)) {
    throw IoError("failed reading " + path);
  }
  return bytes;
}

std::uint32_t crc32_of(const unsigned char* data, std::size_t len) {
  uLong crc = crc32(0L, Z_NULL, 0);
  while (len > 0) {
    const uInt chunk = static_cast<uInt>(std::min<std::size_t>(len, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    len -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

constexpr std::uint16_t kWaveFormatPcm = 1;
constexpr std::uint16_t kWaveFormatIeeeFloat = 3;

}  // namespace

AudioBuffer read_wav(const std::string& path) {
  const std::vector<unsigned char> bytes = read_file(path);
  if (bytes.size() < 12) {
    throw CorruptFileError(path + ": truncated RIFF header");
  }
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw FormatError(path + ": not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t sample_rate = 0;
  const unsigned char* data_ptr = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t chunk_size = read_u32(hdr + 4);
    pos += 8;
    if (pos + chunk_size > bytes.size()) {
      throw CorruptFileError(path + ": chunk extends past end of file");
    }
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_size < 16) {
        throw CorruptFileError(path + ": fmt chunk too small");
      }
      const unsigned char* f = bytes.data() + pos;
      format = read_u16(f);
      channels = read_u16(f + 2);
      sample_rate = read_u32(f + 4);
      block_align = read_u16(f + 12);
      bits = read_u16(f + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data_ptr = bytes.data() + pos;
      data_size = chunk_size;
    }
    pos += chunk_size + (chunk_size & 1);  // chunks are word-aligned
  }

  if (!have_fmt) {
    throw CorruptFileError(path + ": missing fmt chunk");
  }
  if (format != kWaveFormatPcm && format != kWaveFormatIeeeFloat) {
    throw UnsupportedFormatError(path + ": unsupported codec id " + std::to_string(format) +
                                 " (only PCM=1 and IEEE float=3)");
  }
  if (channels < 1 || channels > 2) {
    throw UnsupportedFormatError(path + ": unsupported channel count " +
                                 std::to_string(channels));
  }
  if (format == kWaveFormatPcm && bits != 16) {
    throw UnsupportedFormatError(path + ": PCM must be 16-bit, got " + std::to_string(bits));
  }
  if (format == kWaveFormatIeeeFloat && bits != 32) {
    throw UnsupportedFormatError(path + ": float must be 32-bit, got " + std::to_string(bits));
  }
  if (data_ptr == nullptr) {
    throw CorruptFileError(path + ": missing data chunk");
  }
  if (sample_rate == 0) {
    throw CorruptFileError(path + ": zero sample rate");
  }

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes =
      block_align != 0 ? block_align : bytes_per_sample * channels;
  if (frame_bytes != bytes_per_sample * channels) {
    throw CorruptFileError(path + ": block alignment " + std::to_string(frame_bytes) +
                           " inconsistent with " + std::to_string(bits) + "-bit x " +
                           std::to_string(channels) + " channels");
  }
  const std::int64_t frames = static_cast<std::int64_t>(data_size / frame_bytes);
  if (frames < 1) {
    throw CorruptFileError(path + ": data chunk holds no complete frame");
  }
  if (frames > kMaxDim) {
    throw CorruptFileError(path + ": declared length exceeds supported size");
  }

  AudioBuffer buffer;
  buffer.sample_rate = static_cast<double>(sample_rate);
  buffer.samples = Tensor(Shape{channels, frames});
  if (format == kWaveFormatPcm) {
    for (std::int64_t i = 0; i < frames; ++i) {
      for (std::int64_t c = 0; c < channels; ++c) {
        const unsigned char* p = data_ptr + (i * channels + c) * 2;
        const std::int16_t raw = static_cast<std::int16_t>(read_u16(p));
        buffer.samples(c, i) = static_cast<float>(raw) / 32768.0f;
      }
    }
  } else {
    for (std::int64_t i = 0; i < frames; ++i) {
      for (std::int64_t c = 0; c < channels; ++c) {
        float v;
        std::memcpy(&v, data_ptr + (i * channels + c) * 4, 4);
        buffer.samples(c, i) = v;
      }
    }
  }
  return buffer;
}

namespace {

template <class T>
void write_tensor_impl(const std::string& path, const TensorT<T>& t, KtfDtype dtype) {
  if (t.empty()) {
    throw DomainError("write_tensor: empty tensor");
  }
  namespace fs = std::filesystem;
  static std::atomic<std::uint64_t> write_counter{0};
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp-" + std::to_string(::getpid()) + "-" + std::to_string(++write_counter);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open " + tmp.string() + " for writing");
    }
    out.write("KTF1", 4);
    const std::uint8_t dt = static_cast<std::uint8_t>(dtype);
    const std::uint8_t rank = static_cast<std::uint8_t>(t.rank());
    out.write(reinterpret_cast<const char*>(&dt), 1);
    out.write(reinterpret_cast<const char*>(&rank), 1);
    for (int a = 0; a < t.rank(); ++a) {
      const std::uint32_t d = static_cast<std::uint32_t>(t.dim(a));
      out.write(reinterpret_cast<const char*>(&d), 4);
    }
    const std::size_t payload_len = static_cast<std::size_t>(t.numel()) * sizeof(T);
    out.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(payload_len));
    const std::uint32_t crc =
        crc32_of(reinterpret_cast<const unsigned char*>(t.data()), payload_len);
    out.write(reinterpret_cast<const char*>(&crc), 4);
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw IoError("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
  }
}

template <class T>
TensorT<T> parse_payload(const std::string& path, const std::vector<unsigned char>& bytes,
                         std::size_t offset, const std::vector<std::int64_t>& dims) {
  Shape shape(dims);
  const std::size_t payload_len = static_cast<std::size_t>(shape.numel()) * sizeof(T);
  if (offset + payload_len + 4 > bytes.size()) {
    throw CorruptFileError(path + ": truncated payload");
  }
  const std::uint32_t stored_crc = read_u32(bytes.data() + offset + payload_len);
  const std::uint32_t actual_crc = crc32_of(bytes.data() + offset, payload_len);
  if (stored_crc != actual_crc) {
    throw CorruptFileError(path + ": payload CRC mismatch");
  }
  std::vector<T> data(static_cast<std::size_t>(shape.numel()));
  std::memcpy(data.data(), bytes.data() + offset, payload_len);
  return TensorT<T>(std::move(shape), std::move(data));
}

}  // namespace

void write_tensor(const std::string& path, const Tensor& t) {
  write_tensor_impl(path, t, KtfDtype::kFloat32);
}

void write_tensor(const std::string& path, const Tensor64& t) {
  write_tensor_impl(path, t, KtfDtype::kFloat64);
}

AnyTensor read_tensor_any(const std::string& path) {
  const std::vector<unsigned char> bytes = read_file(path);
  if (bytes.size() < 6) {
    throw CorruptFileError(path + ": truncated header");
  }
  if (std::memcmp(bytes.data(), "KTF1", 4) != 0) {
    throw FormatError(path + ": bad magic, not a KTF1 file");
  }
  const std::uint8_t dtype = bytes[4];
  const std::uint8_t rank = bytes[5];
  if (dtype > 1) {
    throw FormatError(path + ": unknown dtype code " + std::to_string(dtype));
  }
  if (rank < 1 || rank > kMaxRank) {
    throw FormatError(path + ": rank " + std::to_string(rank) + " out of range");
  }
  if (bytes.size() < 6 + static_cast<std::size_t>(rank) * 4) {
    throw CorruptFileError(path + ": truncated dimension list");
  }
  std::vector<std::int64_t> dims(rank);
  std::int64_t numel = 1;
  for (int a = 0; a < rank; ++a) {
    const std::uint32_t d = read_u32(bytes.data() + 6 + a * 4);
    if (d == 0 || d > kMaxDim) {
      throw FormatError(path + ": dimension " + std::to_string(a) + " out of range");
    }
    dims[static_cast<std::size_t>(a)] = d;
    numel *= d;
    if (numel > (std::int64_t(1) << 40)) {
      throw FormatError(path + ": declared size is implausibly large");
    }
  }
  const std::size_t offset = 6 + static_cast<std::size_t>(rank) * 4;
  if (dtype == static_cast<std::uint8_t>(KtfDtype::kFloat32)) {
    return parse_payload<float>(path, bytes, offset, dims);
  }
  return parse_payload<double>(path, bytes, offset, dims);
}

template <class T>
TensorT<T> read_tensor(const std::string& path) {
  AnyTensor any = read_tensor_any(path);
  if (!std::holds_alternative<TensorT<T>>(any)) {
    throw FormatError(path + ": stored dtype does not match the requested precision");
  }
  return std::get<TensorT<T>>(std::move(any));
}

template Tensor read_tensor<float>(const std::string&);
template Tensor64 read_tensor<double>(const std::string&);

}  // namespace specgrad
