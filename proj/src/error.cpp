#include "mextract/error.hpp"

namespace mextract {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::UnknownAnswerType: return "UnknownAnswerType";
    case ErrorCode::InvalidBounds: return "InvalidBounds";
    case ErrorCode::OptionsOnNonString: return "OptionsOnNonString";
    case ErrorCode::StructFieldUnresolved: return "StructFieldUnresolved";
    case ErrorCode::UnknownSpecKey: return "UnknownSpecKey";
    case ErrorCode::DuplicateKey: return "DuplicateKey";
    case ErrorCode::NoJsonFound: return "NoJsonFound";
    case ErrorCode::EmptyExistenceSet: return "EmptyExistenceSet";
    case ErrorCode::MissingSchema: return "MissingSchema";
    case ErrorCode::MissingGuidelines: return "MissingGuidelines";
    case ErrorCode::GoldTypeError: return "GoldTypeError";
    case ErrorCode::ExistenceKeyMismatch: return "ExistenceKeyMismatch";
    case ErrorCode::MissingText: return "MissingText";
    case ErrorCode::BudgetImpossible: return "BudgetImpossible";
    case ErrorCode::EndpointUnreachable: return "EndpointUnreachable";
    case ErrorCode::AuthMissing: return "AuthMissing";
    case ErrorCode::NotJson: return "NotJson";
    case ErrorCode::NoEligibleAttribute: return "NoEligibleAttribute";
    case ErrorCode::InvalidCategory: return "InvalidCategory";
    case ErrorCode::Io: return "Io";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace mextract
