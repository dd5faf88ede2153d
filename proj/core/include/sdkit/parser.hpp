#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdkit/causal_graph.hpp"
#include "sdkit/expr.hpp"
#include "sdkit/model.hpp"

namespace sdkit {

struct SourceSpan {
  std::string file;
  int line = 1;    // 1-based
  int column = 1;  // 1-based byte offset
  int length = 0;  // bytes

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

enum class Severity { Error, Warning };

struct ParseDiagnostic {
  Severity severity = Severity::Error;
  std::string message;
  SourceSpan span;
};

/// `file:line:column: error: message`
std::string format_diagnostic(const ParseDiagnostic& d);

/// `value` is set iff no error diagnostic was produced.
template <class T>
struct ParseResult {
  std::optional<T> value;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return value.has_value(); }
};

/// Parses the line-oriented model language:
///
///   model <name>
///   param <name> = <number> [units <unit>]
///   aux   <name> = <expr> [units <unit>]
///   flow  <name> (<stock|cloud> -> <stock|cloud>) = <expr> [units <unit>]
///   stock <name> = <expr> [units <unit>] [nonneg]
///
/// `//` starts a comment. References are not resolved here; see validate_model.
ParseResult<ModelDefinition> parse_model(std::string_view source, std::string file = "<input>");

/// Canonical text: params, auxes, flows, stocks, each group in declaration order.
std::string serialize_model(const ModelDefinition& model);

/// Parses a single expression (as used in scenario overrides).
ParseResult<Expr> parse_expression(std::string_view text, std::string file = "<expr>");

/// Parses a causal loop diagram edge list, one `From -> To +|- [delay]` per line.
ParseResult<CausalGraph> parse_cld(std::string_view source, std::string file = "<input>");

bool is_reserved_word(std::string_view word);

}  // namespace sdkit
