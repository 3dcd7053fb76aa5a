#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace octnet {

/// File access or on-disk format problem.
struct io_error : std::runtime_error {
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite values or a failed numerical procedure.
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

/// Rejection sampling exhausted its attempt budget.
struct generation_error : std::runtime_error {
  std::uint64_t attempts;
  generation_error(const std::string& what, std::uint64_t attempts)
      : std::runtime_error(what), attempts(attempts) {}
};

/// Map synthesis could not satisfy its layout constraints.
struct synth_error : std::runtime_error {
  explicit synth_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace octnet
