#pragma once

#include <stdexcept>
#include <string>

namespace conelq {

struct SingularVolatility : std::runtime_error {
  explicit SingularVolatility(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonConvergence : std::runtime_error {
  double residual;
  NonConvergence(const std::string& msg, double res)
      : std::runtime_error(msg + " (residual " + std::to_string(res) + ")"), residual(res) {}
};

struct UnsupportedRepresentation : std::runtime_error {
  explicit UnsupportedRepresentation(const std::string& msg) : std::runtime_error(msg) {}
};

struct InfeasiblePoint : std::runtime_error {
  explicit InfeasiblePoint(const std::string& msg) : std::runtime_error(msg) {}
};

struct InfeasibleControl : std::runtime_error {
  explicit InfeasibleControl(const std::string& msg) : std::runtime_error(msg) {}
};

struct InfeasibleDualControl : std::runtime_error {
  explicit InfeasibleDualControl(const std::string& msg) : std::runtime_error(msg) {}
};

struct NonpositiveA : std::runtime_error {
  explicit NonpositiveA(const std::string& msg) : std::runtime_error(msg) {}
};

struct ZeroInitialWealth : std::runtime_error {
  explicit ZeroInitialWealth(const std::string& msg) : std::runtime_error(msg) {}
};

struct SchemaError : std::runtime_error {
  explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigValueError : std::runtime_error {
  explicit ConfigValueError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace conelq
