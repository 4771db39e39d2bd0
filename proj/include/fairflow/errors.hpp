#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fairflow {

// Every failure the engine can report, one code per class. The CLI maps
// these onto its exit-code convention via error_exit_class().
enum class Errc {
  // manifest
  syntax_error,
  schema_error,
  // units
  unknown_unit,
  grammar_error,
  affine_composition,
  dimension_mismatch,
  unknown_element,
  // values
  type_mismatch,
  out_of_range,
  unknown_choice,
  bad_image,
  unknown_input_name,
  missing_input,
  // runner
  step_failed,
  output_missing,
  output_invalid,
  timeout,
  // registry
  tool_not_found,
  revision_not_found,
  // stores
  corrupt_entry,
  io_error,
  duplicate_id,
  // resultsdb
  unknown_field,
  predicate_type_error,
  // exemplars
  degenerate_sweep,
};

inline std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::syntax_error: return "SyntaxError";
    case Errc::schema_error: return "SchemaError";
    case Errc::unknown_unit: return "UnknownUnit";
    case Errc::grammar_error: return "GrammarError";
    case Errc::affine_composition: return "AffineCompositionError";
    case Errc::dimension_mismatch: return "DimensionMismatch";
    case Errc::unknown_element: return "UnknownElement";
    case Errc::type_mismatch: return "TypeMismatch";
    case Errc::out_of_range: return "OutOfRange";
    case Errc::unknown_choice: return "UnknownChoice";
    case Errc::bad_image: return "BadImage";
    case Errc::unknown_input_name: return "UnknownInputName";
    case Errc::missing_input: return "MissingInput";
    case Errc::step_failed: return "StepFailed";
    case Errc::output_missing: return "OutputMissing";
    case Errc::output_invalid: return "OutputInvalid";
    case Errc::timeout: return "Timeout";
    case Errc::tool_not_found: return "ToolNotFound";
    case Errc::revision_not_found: return "RevisionNotFound";
    case Errc::corrupt_entry: return "CorruptEntry";
    case Errc::io_error: return "IOError";
    case Errc::duplicate_id: return "DuplicateId";
    case Errc::unknown_field: return "UnknownField";
    case Errc::predicate_type_error: return "TypeErrorInPredicate";
    case Errc::degenerate_sweep: return "DegenerateSweep";
  }
  return "Error";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Errc code() const { return code_; }

  // Re-wraps with the offending input/field name prefixed, keeping the code.
  static Error annotated(const std::string& field, const Error& e) {
    return Error(e.code_, field + ": " + e.raw_message());
  }

  std::string raw_message() const {
    std::string w = what();
    auto sep = w.find(": ");
    return sep == std::string::npos ? w : w.substr(sep + 2);
  }

 private:
  Errc code_;
};

// Exit-code classes used by the CLI: 1 = user/validation error,
// 2 = execution failure, 3 = internal error.
inline int error_exit_class(Errc c) {
  switch (c) {
    case Errc::step_failed:
    case Errc::output_missing:
    case Errc::output_invalid:
    case Errc::timeout:
      return 2;
    case Errc::corrupt_entry:
    case Errc::io_error:
    case Errc::duplicate_id:
      return 3;
    default:
      return 1;
  }
}

}  // namespace fairflow
