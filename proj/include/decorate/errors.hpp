#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace decorate {

enum class Errc {
  // corpus and file handling
  MalformedRecord,
  MissingShard,
  IoFailure,
  UnknownTokenizer,
  // annotation gateway
  TooFewDocuments,
  UnparseableReply,
  TransportError,
  UnknownTag,
  PathMismatch,
  EmptyReply,
  // rating
  NoComparisons,
  NonConvergence,
  LengthMismatch,
  DegenerateInput,
  // taxonomy
  SchemaError,
  DuplicateSibling,
  WrongDepth,
  InvalidTagPath,
  EmptyCounts,
  InvalidDistribution,
  // sampling
  NonPositiveTau,
  MissingRatings,
  MissingTags,
  BudgetInfeasible,
  MissingStats,
  ZeroCountPath,
  IdMismatch,
  NonPositiveWeight,
  MissingEditedText,
  // metrics
  EmptySource,
  ScorerFailure,
  // generic
  InvalidArgument,
  StageNotReady,
};

std::string_view errc_name(Errc code);

// Exit-code class of an error as reported by the command line tool.
enum class ErrorClass { Usage = 1, Data = 2, Backend = 3, NonConvergence = 4 };

ErrorClass error_class(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }
  // The message without the error-name prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

[[noreturn]] void raise(Errc code, const std::string& message);

}  // namespace decorate
