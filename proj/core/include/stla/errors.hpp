#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <utility>

namespace stla {

/// Parse failure; carries the byte offset into the source text.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& message, std::size_t offset)
      : std::runtime_error(message + " (at offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Identifier that is neither a declared variable nor a builtin.
class UnknownIdentifier : public std::runtime_error {
 public:
  explicit UnknownIdentifier(std::string name)
      : std::runtime_error("unknown identifier '" + name + "'"), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

/// Evaluation left a function's domain: sqrt/log of a negative number,
/// division by zero, nonintegral power of a nonpositive base.
class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& message, std::string subexpression)
      : std::runtime_error(message + " in '" + subexpression + "'"),
        subexpression_(std::move(subexpression)) {}
  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  std::string subexpression_;
};

class InvalidControl : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation called on a system of the wrong kind.
class KindMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownExample : public std::runtime_error {
 public:
  explicit UnknownExample(const std::string& name)
      : std::runtime_error("unknown registry example '" + name + "'") {}
};

/// Malformed or inconsistent system/target input file.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonSquare : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// nonsym_witness was handed a (numerically) symmetric matrix.
class SymmetricInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// All residuals fell below the roundoff floor; no slope can be fit.
class DegenerateFit : public std::runtime_error {
 public:
  DegenerateFit(const std::string& message, std::size_t clamped)
      : std::runtime_error(message), clamped_(clamped) {}
  std::size_t clamped() const noexcept { return clamped_; }

 private:
  std::size_t clamped_;
};

/// Trajectory blow-up; carries the last finite state reached.
class IntegrationDiverged : public std::runtime_error {
 public:
  IntegrationDiverged(const std::string& message, Eigen::VectorXd last_state, double last_time)
      : std::runtime_error(message), last_state_(std::move(last_state)), last_time_(last_time) {}
  const Eigen::VectorXd& last_state() const noexcept { return last_state_; }
  double last_time() const noexcept { return last_time_; }

 private:
  Eigen::VectorXd last_state_;
  double last_time_;
};

}  // namespace stla
