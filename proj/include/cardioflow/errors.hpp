#pragma once

#include <stdexcept>
#include <string>

namespace cardioflow {

// Exit codes used by the command line tool.
enum class ExitCode : int { kSuccess = 0, kUsage = 2, kData = 3, kNumerical = 4 };

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, ExitCode code = ExitCode::kData)
      : std::runtime_error(what), code_(code) {}
  ExitCode exit_code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

/// A parameter is outside its admissible range; `field()` names it.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& msg)
      : Error("invalid " + field + ": " + msg, ExitCode::kUsage), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class ConfigurationError : public Error {
 public:
  explicit ConfigurationError(const std::string& msg) : Error(msg, ExitCode::kUsage) {}
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& msg) : Error(msg) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& msg) : Error(msg) {}
};

class MissingStructureError : public Error {
 public:
  explicit MissingStructureError(int code)
      : Error("structure with label code " + std::to_string(code) + " is empty"), code_(code) {}
  int code() const noexcept { return code_; }

 private:
  int code_;
};

class DegenerateSegmentError : public Error {
 public:
  DegenerateSegmentError(int segment, const std::string& what)
      : Error("segment " + std::to_string(segment) + ": " + what), segment_(segment) {}
  int segment() const noexcept { return segment_; }

 private:
  int segment_;
};

class InsufficientStackError : public Error {
 public:
  explicit InsufficientStackError(const std::string& msg) : Error(msg) {}
};

class UnsupportedSequenceError : public Error {
 public:
  explicit UnsupportedSequenceError(const std::string& msg) : Error(msg) {}
};

class DegenerateGeometryError : public Error {
 public:
  explicit DegenerateGeometryError(const std::string& msg) : Error(msg) {}
};

class DegenerateTrainingError : public Error {
 public:
  explicit DegenerateTrainingError(const std::string& msg) : Error(msg) {}
};

class BindingError : public Error {
 public:
  explicit BindingError(std::string feature)
      : Error("feature '" + feature + "' is missing or not finite"), feature_(std::move(feature)) {}
  const std::string& feature() const noexcept { return feature_; }

 private:
  std::string feature_;
};

/// Raised when the flow energy becomes non-finite during optimization.
class NumericalFailure : public Error {
 public:
  NumericalFailure(int iteration, const std::string& msg)
      : Error(msg + " (iteration " + std::to_string(iteration) + ")", ExitCode::kNumerical),
        iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

}  // namespace cardioflow
