#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chooserank {

enum class ErrorKind {
  InvalidArgument,
  TopKTooShort,
  FullRankingRequired,
  DimensionMismatch,
  MixedUniverse,
  SingularSystem,
  UnsupportedModel,
  NonFiniteLoss,
  TooFewItems,
  NTooLarge,
  UnknownCheck,
  TiesUnsupported,
  MalformedLine,
  MissingAlternativesCount,
  IdOutOfRange,
  SchemaMismatch,
  UnknownFamily,
  IoError,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a machine-readable category so
// the CLI can report it on a single line.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace chooserank
