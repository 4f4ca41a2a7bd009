#include "tsk/error.hpp"

namespace tsk {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingLabelColumn: return "MissingLabelColumn";
    case ErrorKind::UnknownColumn: return "UnknownColumn";
    case ErrorKind::RaggedRow: return "RaggedRow";
    case ErrorKind::UnparseableNumeric: return "UnparseableNumeric";
    case ErrorKind::EmptyTable: return "EmptyTable";
    case ErrorKind::SingleClassLabel: return "SingleClassLabel";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::TooFewSamples: return "TooFewSamples";
    case ErrorKind::Io: return "Io";
    case ErrorKind::BadModelFile: return "BadModelFile";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::BatchTooSmall: return "BatchTooSmall";
    case ErrorKind::UninitializedRunningStats: return "UninitializedRunningStats";
    case ErrorKind::FoldNotApplicable: return "FoldNotApplicable";
    case ErrorKind::DegenerateRanks: return "DegenerateRanks";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::NumericFailure: return "NumericFailure";
  }
  return "Unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
      return 2;
    case ErrorKind::NumericFailure:
    case ErrorKind::DegenerateRanks:
      return 4;
    default:
      return 3;
  }
}

}  // namespace tsk
