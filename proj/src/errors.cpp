#include "decorate/errors.hpp"

namespace decorate {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::MalformedRecord: return "MalformedRecord";
    case Errc::MissingShard: return "MissingShard";
    case Errc::IoFailure: return "IoFailure";
    case Errc::UnknownTokenizer: return "UnknownTokenizer";
    case Errc::TooFewDocuments: return "TooFewDocuments";
    case Errc::UnparseableReply: return "UnparseableReply";
    case Errc::TransportError: return "TransportError";
    case Errc::UnknownTag: return "UnknownTag";
    case Errc::PathMismatch: return "PathMismatch";
    case Errc::EmptyReply: return "EmptyReply";
    case Errc::NoComparisons: return "NoComparisons";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::DegenerateInput: return "DegenerateInput";
    case Errc::SchemaError: return "SchemaError";
    case Errc::DuplicateSibling: return "DuplicateSibling";
    case Errc::WrongDepth: return "WrongDepth";
    case Errc::InvalidTagPath: return "InvalidTagPath";
    case Errc::EmptyCounts: return "EmptyCounts";
    case Errc::InvalidDistribution: return "InvalidDistribution";
    case Errc::NonPositiveTau: return "NonPositiveTau";
    case Errc::MissingRatings: return "MissingRatings";
    case Errc::MissingTags: return "MissingTags";
    case Errc::BudgetInfeasible: return "BudgetInfeasible";
    case Errc::MissingStats: return "MissingStats";
    case Errc::ZeroCountPath: return "ZeroCountPath";
    case Errc::IdMismatch: return "IdMismatch";
    case Errc::NonPositiveWeight: return "NonPositiveWeight";
    case Errc::MissingEditedText: return "MissingEditedText";
    case Errc::EmptySource: return "EmptySource";
    case Errc::ScorerFailure: return "ScorerFailure";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::StageNotReady: return "StageNotReady";
  }
  return "Unknown";
}

ErrorClass error_class(Errc code) {
  switch (code) {
    case Errc::UnparseableReply:
    case Errc::TransportError:
    case Errc::EmptyReply:
    case Errc::UnknownTag:
    case Errc::PathMismatch:
      return ErrorClass::Backend;
    case Errc::NonConvergence:
      return ErrorClass::NonConvergence;
    case Errc::InvalidArgument:
      return ErrorClass::Usage;
    default:
      return ErrorClass::Data;
  }
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code), detail_(message) {}

void raise(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace decorate
