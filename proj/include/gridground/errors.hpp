#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gridground {

enum class ErrorCode {
  OutOfBounds,
  UnknownSymbol,
  InvalidScene,
  GenerationFailure,
  NoVerb,
  UnknownWord,
  MalformedPhrase,
  DimMismatch,
  UnknownAnchor,
  CellCollision,
  TooManyAnchors,
  NoFreePosition,
  InvalidAction,
  FormatError,
  VocabMismatch,
  DegenerateEvidence,
  UnknownSession,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (the session loop, the CLI) can branch on it without string parsing.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gridground
