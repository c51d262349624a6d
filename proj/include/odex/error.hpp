#pragma once

#include <stdexcept>
#include <string>

namespace odex {

enum class ErrorKind {
  InvalidPredictor,      // identity/inverse link evaluated at eta <= 0
  MissingGamma,          // day-1 run without a day effect
  MissingCache,          // efficiency requested before the optimum cache is built
  Divergence,            // Fisher scoring failed to converge
  RankDeficient,         // singular model matrix
  PredictorOutOfDomain,  // fitted/predicted mean left the Gamma support
  Parse,                 // malformed CSV/JSON input
  Dimension,             // incompatible shapes between inputs
  InvalidArgument,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace odex
