#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace thermrange {

/// Coarse error class, used by the CLI to choose an exit code and to
/// print a greppable one-line message.
enum class ErrorClass {
  validation,  // bad argument or precondition (exit 2)
  io,          // parse or filesystem failure (exit 3)
  numeric,     // internal numeric failure (exit 4)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, const std::string& what) : std::runtime_error(what), class_(cls) {}
  ErrorClass error_class() const noexcept { return class_; }
  virtual const char* tag() const noexcept = 0;

 private:
  ErrorClass class_;
};

/// Argument outside the mathematical domain of a function (λ ≤ 0, T ≤ 0, ...).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorClass::validation, what) {}
  const char* tag() const noexcept override { return "domain_error"; }
};

/// Documented precondition violated (span, resolution, dimensions, ...).
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what) : Error(ErrorClass::validation, what) {}
  const char* tag() const noexcept override { return "precondition_error"; }
};

/// Two spectra on different wavelength grids were combined.
class GridMismatchError : public Error {
 public:
  explicit GridMismatchError(const std::string& what) : Error(ErrorClass::validation, what) {}
  const char* tag() const noexcept override { return "grid_mismatch"; }
};

/// Configuration or command-line value is invalid.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorClass::validation, what) {}
  const char* tag() const noexcept override { return "config_error"; }
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorClass::io, what) {}
  const char* tag() const noexcept override { return "io_error"; }
};

/// Malformed binary file. Carries the byte offset where parsing failed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::uint64_t byte_offset)
      : Error(ErrorClass::io, what + " (at byte offset " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}
  std::uint64_t byte_offset() const noexcept { return offset_; }
  const char* tag() const noexcept override { return "parse_error"; }

 private:
  std::uint64_t offset_;
};

/// Failure while reading a Spectrum CSV. `row` is the 1-based line number
/// in the file (the header is line 1), or 0 when not tied to a row.
class SpectrumFileError : public Error {
 public:
  enum class Reason { missing_file, malformed_row, negative_value, coverage_gap };

  SpectrumFileError(Reason reason, std::size_t row, const std::string& what)
      : Error(reason == Reason::missing_file || reason == Reason::malformed_row ? ErrorClass::io
                                                                                : ErrorClass::validation,
              what),
        reason_(reason),
        row_(row) {}

  Reason reason() const noexcept { return reason_; }
  std::size_t row() const noexcept { return row_; }
  const char* tag() const noexcept override {
    switch (reason_) {
      case Reason::missing_file: return "missing_file";
      case Reason::malformed_row: return "malformed_row";
      case Reason::negative_value: return "negative_value";
      case Reason::coverage_gap: return "coverage_gap";
    }
    return "spectrum_file_error";
  }

 private:
  Reason reason_;
  std::size_t row_;
};

/// The closed-form bispectral estimate does not exist for this input
/// (non-positive log ratio argument or equal attenuations).
class UndefinedEstimateError : public Error {
 public:
  explicit UndefinedEstimateError(const std::string& what) : Error(ErrorClass::numeric, what) {}
  const char* tag() const noexcept override { return "undefined_estimate"; }
};

/// Iterative solver produced a non-finite value.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, long iteration)
      : Error(ErrorClass::numeric, what + " (iteration " + std::to_string(iteration) + ")"),
        iteration_(iteration) {}
  long iteration() const noexcept { return iteration_; }
  const char* tag() const noexcept override { return "numeric_error"; }

 private:
  long iteration_;
};

}  // namespace thermrange
