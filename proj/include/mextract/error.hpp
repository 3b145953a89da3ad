#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mextract {

enum class ErrorCode {
  // schema
  MalformedJson,
  UnknownAnswerType,
  InvalidBounds,
  OptionsOnNonString,
  StructFieldUnresolved,
  UnknownSpecKey,
  DuplicateKey,
  // metadata
  NoJsonFound,
  // scorer
  EmptyExistenceSet,
  // benchmark store
  MissingSchema,
  MissingGuidelines,
  GoldTypeError,
  ExistenceKeyMismatch,
  MissingText,
  // extractor
  BudgetImpossible,
  EndpointUnreachable,
  AuthMissing,
  // pref-gen
  NotJson,
  NoEligibleAttribute,
  // corpus
  InvalidCategory,
  // generic
  Io,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Error raised by every mextract module. `code()` identifies the failure class;
/// `what()` carries a human readable message that names the offending item.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mextract
