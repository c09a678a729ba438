#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace shortkit {

/// Invalid specification or configuration (bad dimensions, unknown keys, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid data handed to an operation (non-finite values, empty dataset, ...).
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem failure (unreadable config, unwritable output directory, ...).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Training produced a non-finite loss or gradient. Carries the step at which
/// the divergence was detected.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& msg, std::int64_t step)
      : std::runtime_error(msg + " (step " + std::to_string(step) + ")"), step_(step) {}
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

/// A metric's preconditions do not hold on the given data (a class or group
/// is absent, too few positive predictions, ...).
class MetricUndefinedError : public std::runtime_error {
 public:
  explicit MetricUndefinedError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Operation not applicable to this kind of data.
class UnsupportedError : public std::runtime_error {
 public:
  explicit UnsupportedError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Internal invariant violated (e.g. a frozen parameter changed).
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& msg) : std::logic_error(msg) {}
};

/// Not enough usable sweep points to run the correlation test.
class UnderpoweredError : public std::runtime_error {
 public:
  explicit UnderpoweredError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Every point of a sweep was excluded; no analysis is possible.
class SweepDegenerateError : public std::runtime_error {
 public:
  explicit SweepDegenerateError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace shortkit
