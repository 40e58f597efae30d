#pragma once

#include <stdexcept>
#include <string>

namespace diffcover {

// Cover construction ran out of its shell/chart budget before covering the region.
struct ConstructionError : std::runtime_error {
  explicit ConstructionError(const std::string& msg) : std::runtime_error(msg) {}
};

// A chart inverse failed (or left its domain) at a verification point.
struct ChartDomainError : std::runtime_error {
  explicit ChartDomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// A point that should lie in some inner set of a cover does not.
struct CoverageError : std::runtime_error {
  explicit CoverageError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NotPositiveSemidefiniteError : std::runtime_error {
  explicit NotPositiveSemidefiniteError(const std::string& msg)
      : std::runtime_error(msg) {}
};

// A delta sequence was exhausted before the certificate condition was met.
struct InsufficientSequenceError : std::runtime_error {
  explicit InsufficientSequenceError(const std::string& msg)
      : std::runtime_error(msg) {}
};

// A warp function left its admissible range (f(r) <= 0 for r > 0).
struct ManifoldDomainError : std::runtime_error {
  explicit ManifoldDomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// A declared bound was violated by an observed sample (e.g. |f| > bound).
struct ContractViolation : std::runtime_error {
  explicit ContractViolation(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace diffcover
