#ifndef DASML_ERRORS_HPP_
#define DASML_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dasml {

/// Base of every error raised by the library. The CLI maps ConfigError to
/// exit code 2 and everything else to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DASML_DEFINE_ERROR(Name)        \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  };

DASML_DEFINE_ERROR(ZeroNorm)
DASML_DEFINE_ERROR(DimensionMismatch)
DASML_DEFINE_ERROR(ShapeMismatch)
DASML_DEFINE_ERROR(KOutOfRange)
DASML_DEFINE_ERROR(KTooLarge)
DASML_DEFINE_ERROR(LengthMismatch)
DASML_DEFINE_ERROR(InvalidConfig)
DASML_DEFINE_ERROR(EmptyFile)
DASML_DEFINE_ERROR(NotEnoughClasses)
DASML_DEFINE_ERROR(NoValidTriplet)
DASML_DEFINE_ERROR(LabelOutOfRange)
DASML_DEFINE_ERROR(CorruptCheckpoint)
DASML_DEFINE_ERROR(RuntimeAbort)

#undef DASML_DEFINE_ERROR

class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::size_t column, const std::string& what)
      : Error("row " + std::to_string(row) + ", column " +
              std::to_string(column) + ": " + what),
        row_(row),
        column_(column) {}

  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

// Raised for malformed run configurations (unknown keys, bad values).
class ConfigError : public InvalidConfig {
 public:
  using InvalidConfig::InvalidConfig;
};

}  // namespace dasml

#endif  // DASML_ERRORS_HPP_
