#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tsk {

enum class ErrorKind {
  // data / input
  MissingLabelColumn,
  UnknownColumn,
  RaggedRow,
  UnparseableNumeric,
  EmptyTable,
  SingleClassLabel,
  UnknownLabel,
  TooFewSamples,
  Io,
  BadModelFile,
  // shape / contract
  DimensionMismatch,
  ShapeMismatch,
  BatchTooSmall,
  UninitializedRunningStats,
  FoldNotApplicable,
  DegenerateRanks,
  InvalidArgument,
  // numeric
  NumericFailure,
};

std::string_view to_string(ErrorKind kind);

// Error raised by every module of the library. The kind decides how the
// command line tool maps the failure to an exit code.
class Error : public std::runtime_error {
 public:
  using Context = std::map<std::string, std::string>;

  Error(ErrorKind kind, const std::string& message, Context context = {})
      : std::runtime_error(message), kind_(kind), context_(std::move(context)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const Context& context() const noexcept { return context_; }

 private:
  ErrorKind kind_;
  Context context_;
};

// Exit code for the CLI: 3 for data / model-file problems, 4 for numeric
// failures, 2 for invalid arguments.
int exit_code_for(ErrorKind kind);

}  // namespace tsk
