#pragma once

#include <stdexcept>
#include <string>

namespace specgrad {

// Precondition violations on operation inputs: bad shapes, out-of-range
// values, incompatible operands.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Invalid configuration values (StftConfig, FilterbankConfig, ...).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// File-level failures.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Recognized container but unsupported encoding (e.g. compressed WAV codec).
class UnsupportedFormatError : public IoError {
 public:
  explicit UnsupportedFormatError(const std::string& what) : IoError(what) {}
};

// Bad magic bytes or a structurally invalid file.
class FormatError : public IoError {
 public:
  explicit FormatError(const std::string& what) : IoError(what) {}
};

// Truncated payload or checksum mismatch.
class CorruptFileError : public IoError {
 public:
  explicit CorruptFileError(const std::string& what) : IoError(what) {}
};

}  // namespace specgrad
