#include "gridground/errors.hpp"

namespace gridground {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::UnknownSymbol: return "UnknownSymbol";
    case ErrorCode::InvalidScene: return "InvalidScene";
    case ErrorCode::GenerationFailure: return "GenerationFailure";
    case ErrorCode::NoVerb: return "NoVerb";
    case ErrorCode::UnknownWord: return "UnknownWord";
    case ErrorCode::MalformedPhrase: return "MalformedPhrase";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::UnknownAnchor: return "UnknownAnchor";
    case ErrorCode::CellCollision: return "CellCollision";
    case ErrorCode::TooManyAnchors: return "TooManyAnchors";
    case ErrorCode::NoFreePosition: return "NoFreePosition";
    case ErrorCode::InvalidAction: return "InvalidAction";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::VocabMismatch: return "VocabMismatch";
    case ErrorCode::DegenerateEvidence: return "DegenerateEvidence";
    case ErrorCode::UnknownSession: return "UnknownSession";
  }
  return "Unknown";
}

}  // namespace gridground
