#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace addthin {

/// A serialized artifact was written with a format version this build cannot read.
class VersionMismatch : public std::runtime_error {
 public:
  VersionMismatch(const std::string& what, std::uint32_t found, std::uint32_t expected)
      : std::runtime_error(what + ": format version " + std::to_string(found) + ", expected " +
                           std::to_string(expected)),
        found_(found),
        expected_(expected) {}
  [[nodiscard]] std::uint32_t found() const { return found_; }
  [[nodiscard]] std::uint32_t expected() const { return expected_; }

 private:
  std::uint32_t found_;
  std::uint32_t expected_;
};

/// The requested operation is not available for this model (e.g. forecasting
/// with an unconditional checkpoint).
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Non-finite value produced where a finite one is required.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace addthin
