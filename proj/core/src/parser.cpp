#include "sdkit/parser.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <map>
#include <set>

namespace sdkit {

std::string format_diagnostic(const ParseDiagnostic& d) {
  return d.span.file + ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.column) +
         ": " + (d.severity == Severity::Error ? "error" : "warning") + ": " + d.message;
}

namespace {

constexpr std::array kReserved = {"model", "param", "aux",  "flow", "stock", "units",
                                  "nonneg", "cloud", "if",   "then", "else",  "t",
                                  "exp",   "min",   "max",  "abs",  "delay"};

std::optional<Builtin> builtin_named(std::string_view name) {
  if (name == "exp") return Builtin::Exp;
  if (name == "min") return Builtin::Min;
  if (name == "max") return Builtin::Max;
  if (name == "abs") return Builtin::Abs;
  return std::nullopt;
}

// Error local to one line; `column` is 1-based.
struct LineError {
  std::string message;
  int column;
  int length;
};

struct Token {
  enum class Kind { Ident, Number, Symbol, End } kind = Kind::End;
  std::string_view text;
  int column = 1;
  double number = 0.0;

  bool is(std::string_view s) const { return kind != Kind::End && text == s; }
  bool is_symbol(std::string_view s) const { return kind == Kind::Symbol && text == s; }
};

std::string describe(const Token& tok) {
  if (tok.kind == Token::Kind::End) return "end of line";
  return "'" + std::string(tok.text) + "'";
}

[[noreturn]] void fail_at(const Token& tok, std::string message) {
  throw LineError{std::move(message), tok.column, static_cast<int>(tok.text.size())};
}

// Tokenizes one comment-stripped line on demand, so that trailing unit text
// with arbitrary characters never reaches the tokenizer.
class LineLexer {
 public:
  explicit LineLexer(std::string_view line) : line_(line) {}

  const Token& peek() {
    if (!lookahead_) lookahead_ = scan(pos_, &after_);
    return *lookahead_;
  }

  Token next() {
    Token tok = peek();
    pos_ = after_;
    lookahead_.reset();
    return tok;
  }

  /// Token after the next one.
  Token peek_second() {
    peek();
    std::size_t ignored;
    return scan(after_, &ignored);
  }

  std::size_t offset_of_next() {
    const Token& tok = peek();
    return static_cast<std::size_t>(tok.column - 1);
  }

  std::string_view line() const { return line_; }

 private:
  Token scan(std::size_t pos, std::size_t* end) const {
    while (pos < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos]))) ++pos;
    Token tok;
    tok.column = static_cast<int>(pos) + 1;
    if (pos >= line_.size()) {
      tok.kind = Token::Kind::End;
      tok.text = line_.substr(line_.size());
      *end = pos;
      return tok;
    }
    char c = line_[pos];
    std::size_t start = pos;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (pos < line_.size() &&
             (std::isalnum(static_cast<unsigned char>(line_[pos])) || line_[pos] == '_'))
        ++pos;
      tok.kind = Token::Kind::Ident;
    } else if (std::isdigit(static_cast<unsigned char>(c)) ||
               (c == '.' && pos + 1 < line_.size() &&
                std::isdigit(static_cast<unsigned char>(line_[pos + 1])))) {
      auto digits = [&] {
        while (pos < line_.size() && std::isdigit(static_cast<unsigned char>(line_[pos]))) ++pos;
      };
      digits();
      if (pos < line_.size() && line_[pos] == '.') {
        ++pos;
        digits();
      }
      if (pos < line_.size() && (line_[pos] == 'e' || line_[pos] == 'E')) {
        std::size_t mark = pos++;
        if (pos < line_.size() && (line_[pos] == '+' || line_[pos] == '-')) ++pos;
        if (pos < line_.size() && std::isdigit(static_cast<unsigned char>(line_[pos])))
          digits();
        else
          pos = mark;
      }
      // Glued trailing characters ("1.2.3", "3x") make the whole run malformed.
      bool glued = false;
      while (pos < line_.size() && (std::isalnum(static_cast<unsigned char>(line_[pos])) || line_[pos] == '_' ||
                                    line_[pos] == '.')) {
        glued = true;
        ++pos;
      }
      tok.kind = Token::Kind::Number;
      std::string_view text = line_.substr(start, pos - start);
      if (glued)
        throw LineError{"malformed number '" + std::string(text) + "'", tok.column, static_cast<int>(text.size())};
      auto res = std::from_chars(text.data(), text.data() + text.size(), tok.number);
      if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw LineError{"malformed number '" + std::string(text) + "'", tok.column,
                        static_cast<int>(text.size())};
    } else {
      static constexpr std::array<std::string_view, 4> two = {"->", "<=", ">=", "||"};
      tok.kind = Token::Kind::Symbol;
      std::string_view rest = line_.substr(pos);
      bool matched = false;
      for (auto s : two) {
        if (rest.substr(0, 2) == s) {
          pos += 2;
          matched = true;
          break;
        }
      }
      if (!matched) {
        if (std::string_view("+-*/^(),=<>").find(c) == std::string_view::npos) {
          // Report the whole UTF-8 sequence as one character.
          std::size_t len = 1;
          while (pos + len < line_.size() &&
                 (static_cast<unsigned char>(line_[pos + len]) & 0xC0) == 0x80)
            ++len;
          throw LineError{"unexpected character '" + std::string(line_.substr(pos, len)) + "'",
                          tok.column, static_cast<int>(len)};
        }
        ++pos;
      }
    }
    tok.text = line_.substr(start, pos - start);
    *end = pos;
    return tok;
  }

  std::string_view line_;
  std::size_t pos_ = 0;
  std::size_t after_ = 0;
  std::optional<Token> lookahead_;
};

class ExprParser {
 public:
  explicit ExprParser(LineLexer& lex) : lex_(lex) {}

  Expr expression() { return additive(); }

 private:
  Expr additive() {
    Expr lhs = multiplicative();
    while (true) {
      const Token& tok = lex_.peek();
      if (tok.is_symbol("+")) {
        lex_.next();
        lhs = Expr::binary(BinaryOp::Add, lhs, multiplicative());
      } else if (tok.is_symbol("-")) {
        lex_.next();
        lhs = Expr::binary(BinaryOp::Sub, lhs, multiplicative());
      } else {
        return lhs;
      }
    }
  }

  Expr multiplicative() {
    Expr lhs = unary();
    while (true) {
      const Token& tok = lex_.peek();
      if (tok.is_symbol("*")) {
        lex_.next();
        lhs = Expr::binary(BinaryOp::Mul, lhs, unary());
      } else if (tok.is_symbol("/")) {
        lex_.next();
        lhs = Expr::binary(BinaryOp::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    if (lex_.peek().is_symbol("-")) {
      lex_.next();
      // `-3` is a negative literal unless the literal is itself a power base.
      if (lex_.peek().kind == Token::Kind::Number && !lex_.peek_second().is_symbol("^"))
        return Expr::number(-lex_.next().number);
      return Expr::negate(unary());
    }
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (lex_.peek().is_symbol("^")) {
      lex_.next();
      return Expr::binary(BinaryOp::Pow, base, unary());
    }
    return base;
  }

  Expr primary() {
    Token tok = lex_.next();
    switch (tok.kind) {
      case Token::Kind::Number: return Expr::number(tok.number);
      case Token::Kind::End: fail_at(tok, "expected an expression, found end of line");
      case Token::Kind::Symbol:
        if (tok.is_symbol("(")) {
          Expr inner = expression();
          expect(")");
          return inner;
        }
        fail_at(tok, "expected an expression, found " + describe(tok));
      case Token::Kind::Ident: break;
    }
    if (tok.text == "t") return Expr::time();
    if (tok.text == "if") return conditional();
    if (auto fn = builtin_named(tok.text)) {
      if (!lex_.peek().is_symbol("("))
        fail_at(tok, "function '" + std::string(tok.text) + "' requires arguments");
      lex_.next();
      std::vector<Expr> args{expression()};
      while (lex_.peek().is_symbol(",")) {
        lex_.next();
        args.push_back(expression());
      }
      Token close = lex_.peek();
      expect(")");
      bool unary_fn = *fn == Builtin::Exp || *fn == Builtin::Abs;
      if ((unary_fn && args.size() != 1) || (!unary_fn && args.size() < 2))
        throw LineError{"wrong number of arguments to " + std::string(tok.text), tok.column,
                        close.column - tok.column + 1};
      return Expr::call(*fn, std::move(args));
    }
    if (lex_.peek().is_symbol("("))
      fail_at(tok, "unknown function '" + std::string(tok.text) + "'");
    if (is_reserved_word(tok.text))
      fail_at(tok, "reserved word '" + std::string(tok.text) + "' cannot be used as a variable");
    return Expr::variable(std::string(tok.text));
  }

  Expr conditional() {
    Expr lhs = additive();
    Token op = lex_.next();
    Comparator cmp;
    if (op.is_symbol("<")) cmp = Comparator::Less;
    else if (op.is_symbol("<=")) cmp = Comparator::LessEqual;
    else if (op.is_symbol(">")) cmp = Comparator::Greater;
    else if (op.is_symbol(">=")) cmp = Comparator::GreaterEqual;
    else fail_at(op, "expected a comparison (<, <=, >, >=), found " + describe(op));
    Expr rhs = additive();
    expect_word("then");
    Expr then_branch = expression();
    expect_word("else");
    Expr else_branch = expression();
    return Expr::conditional(cmp, lhs, rhs, then_branch, else_branch);
  }

  void expect(std::string_view symbol) {
    Token tok = lex_.next();
    if (!tok.is_symbol(symbol))
      fail_at(tok, "expected '" + std::string(symbol) + "', found " + describe(tok));
  }

  void expect_word(std::string_view word) {
    Token tok = lex_.next();
    if (tok.kind != Token::Kind::Ident || tok.text != word)
      fail_at(tok, "expected '" + std::string(word) + "', found " + describe(tok));
  }

  LineLexer& lex_;
};

std::string_view strip_comment(std::string_view line) {
  auto pos = line.find("//");
  return pos == std::string_view::npos ? line : line.substr(0, pos);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Splits on '\n' and drops a trailing '\r' so both line-ending styles parse alike.
std::vector<std::string_view> split_lines(std::string_view source) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= source.size()) {
    std::size_t end = source.find('\n', start);
    if (end == std::string_view::npos) end = source.size();
    std::string_view line = source.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == source.size()) break;
    start = end + 1;
  }
  return lines;
}

Token expect_identifier(LineLexer& lex, std::string_view what) {
  Token tok = lex.next();
  if (tok.kind != Token::Kind::Ident) fail_at(tok, "expected " + std::string(what) + ", found " + describe(tok));
  if (is_reserved_word(tok.text))
    fail_at(tok, "reserved word '" + std::string(tok.text) + "' cannot be used as a name");
  return tok;
}

void expect_symbol(LineLexer& lex, std::string_view symbol) {
  Token tok = lex.next();
  if (!tok.is_symbol(symbol))
    fail_at(tok, "expected '" + std::string(symbol) + "', found " + describe(tok));
}

struct Trailer {
  std::optional<Unit> units;
  bool non_negative = false;
};

// Parses `[units <unit>] [nonneg]` at the end of a declaration.
Trailer parse_trailer(LineLexer& lex, bool allow_nonneg) {
  Trailer out;
  Token tok = lex.peek();
  if (tok.kind == Token::Kind::End) return out;
  std::string_view line = lex.line();
  if (tok.kind == Token::Kind::Ident && tok.text == "units") {
    std::size_t start = static_cast<std::size_t>(tok.column - 1) + tok.text.size();
    std::string_view tail = line.substr(start);
    std::size_t lead = tail.find_first_not_of(" \t");
    if (lead == std::string_view::npos)
      throw LineError{"expected a unit after 'units'", tok.column, static_cast<int>(tok.text.size())};
    std::string_view rest = trim(tail);
    std::size_t rest_col = start + lead;
    // A final standalone `nonneg` word is the stock flag, not part of the unit.
    if (rest.size() >= 6 && rest.substr(rest.size() - 6) == "nonneg" &&
        (rest.size() == 6 || std::isspace(static_cast<unsigned char>(rest[rest.size() - 7])))) {
      if (!allow_nonneg)
        throw LineError{"'nonneg' is only valid on stocks",
                        static_cast<int>(rest_col + rest.size() - 6) + 1, 6};
      out.non_negative = true;
      rest = trim(rest.substr(0, rest.size() - 6));
    }
    if (rest.empty())
      throw LineError{"expected a unit before 'nonneg'", tok.column, static_cast<int>(tok.text.size())};
    out.units = Unit::parse(rest);
    if (!out.units)
      throw LineError{"malformed unit '" + std::string(rest) + "'", static_cast<int>(rest_col) + 1,
                      static_cast<int>(rest.size())};
    return out;
  }
  if (tok.kind == Token::Kind::Ident && tok.text == "nonneg") {
    if (!allow_nonneg) fail_at(tok, "'nonneg' is only valid on stocks");
    lex.next();
    out.non_negative = true;
    Token after = lex.peek();
    if (after.kind != Token::Kind::End) fail_at(after, "unexpected " + describe(after) + " after 'nonneg'");
    return out;
  }
  fail_at(tok, "unexpected " + describe(tok) + " after expression");
}

struct PendingEndpoint {
  std::string name;
  int line;
  int column;
};

class ModelParser {
 public:
  ModelParser(std::string_view source, std::string file) : source_(source), file_(std::move(file)) {}

  ParseResult<ModelDefinition> run() {
    auto lines = split_lines(source_);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      line_no_ = static_cast<int>(i) + 1;
      std::string_view body = strip_comment(lines[i]);
      try {
        parse_line(body);
      } catch (const LineError& e) {
        error(e.message, e.column, e.length);
      }
    }
    for (const auto& ep : endpoints_) {
      auto it = kinds_.find(ep.name);
      if (it == kinds_.end())
        error_at(ep.line, ep.column, static_cast<int>(ep.name.size()),
                 "dangling endpoint: no stock named '" + ep.name + "'");
      else if (it->second != VariableKind::Stock)
        error_at(ep.line, ep.column, static_cast<int>(ep.name.size()),
                 "endpoint '" + ep.name + "' is a " + to_string(it->second) + ", not a stock");
    }
    ParseResult<ModelDefinition> result;
    result.diagnostics = std::move(diagnostics_);
    if (!has_error_) result.value = std::move(builder_).build();
    return result;
  }

 private:
  void parse_line(std::string_view body) {
    LineLexer lex(body);
    Token keyword = lex.next();
    if (keyword.kind == Token::Kind::End) return;
    if (keyword.kind != Token::Kind::Ident)
      fail_at(keyword, "expected a declaration keyword, found " + describe(keyword));

    if (keyword.text == "model") {
      Token name = expect_identifier(lex, "a model name");
      if (saw_model_) fail_at(keyword, "duplicate 'model' line");
      saw_model_ = true;
      builder_.set_name(std::string(name.text));
      expect_end(lex);
    } else if (keyword.text == "param") {
      Token name = declare(lex, VariableKind::Parameter);
      expect_symbol(lex, "=");
      bool negative = false;
      if (lex.peek().is_symbol("-") || lex.peek().is_symbol("+")) negative = lex.next().text == "-";
      Token value = lex.next();
      if (value.kind != Token::Kind::Number) fail_at(value, "expected a number, found " + describe(value));
      Trailer tr = parse_trailer(lex, false);
      builder_.add(ParameterDef{std::string(name.text), negative ? -value.number : value.number, tr.units});
    } else if (keyword.text == "aux") {
      Token name = declare(lex, VariableKind::Auxiliary);
      expect_symbol(lex, "=");
      Expr expr = ExprParser(lex).expression();
      Trailer tr = parse_trailer(lex, false);
      builder_.add(AuxiliaryDef{std::string(name.text), expr, tr.units});
    } else if (keyword.text == "flow") {
      Token name = declare(lex, VariableKind::Flow);
      expect_symbol(lex, "(");
      Endpoint source = endpoint(lex);
      expect_symbol(lex, "->");
      Endpoint target = endpoint(lex);
      expect_symbol(lex, ")");
      expect_symbol(lex, "=");
      Expr rate = ExprParser(lex).expression();
      Trailer tr = parse_trailer(lex, false);
      if (source == target)
        throw LineError{"flow '" + std::string(name.text) + "' must connect two distinct endpoints",
                        name.column, static_cast<int>(name.text.size())};
      builder_.add(FlowDef{std::string(name.text), source, target, rate, tr.units});
    } else if (keyword.text == "stock") {
      Token name = declare(lex, VariableKind::Stock);
      expect_symbol(lex, "=");
      Expr initial = ExprParser(lex).expression();
      Trailer tr = parse_trailer(lex, true);
      StockDef def;
      def.name = std::string(name.text);
      def.initial = initial;
      def.units = tr.units;
      def.non_negative = tr.non_negative;
      builder_.add(std::move(def));
    } else {
      fail_at(keyword, "unknown keyword '" + std::string(keyword.text) + "'");
    }
  }

  // Reads a declared name and records its kind. A duplicate abandons the line.
  Token declare(LineLexer& lex, VariableKind kind) {
    Token name = expect_identifier(lex, "a name");
    auto [it, inserted] = kinds_.emplace(std::string(name.text), kind);
    if (!inserted) {
      fail_at(name, "duplicate name '" + std::string(name.text) + "'");
    }
    return name;
  }

  Endpoint endpoint(LineLexer& lex) {
    Token tok = lex.next();
    if (tok.kind != Token::Kind::Ident) fail_at(tok, "expected a stock name or 'cloud', found " + describe(tok));
    if (tok.text == "cloud") return std::nullopt;
    if (is_reserved_word(tok.text))
      fail_at(tok, "reserved word '" + std::string(tok.text) + "' cannot be an endpoint");
    endpoints_.push_back({std::string(tok.text), line_no_, tok.column});
    return std::string(tok.text);
  }

  static void expect_end(LineLexer& lex) {
    Token tok = lex.peek();
    if (tok.kind != Token::Kind::End) fail_at(tok, "unexpected " + describe(tok));
  }

  void error(std::string message, int column, int length) {
    error_at(line_no_, column, length, std::move(message));
  }

  void error_at(int line, int column, int length, std::string message) {
    has_error_ = true;
    diagnostics_.push_back({Severity::Error, std::move(message), SourceSpan{file_, line, column, length}});
  }

  std::string_view source_;
  std::string file_;
  int line_no_ = 0;
  bool saw_model_ = false;
  bool has_error_ = false;
  ModelBuilder builder_;
  std::map<std::string, VariableKind> kinds_;
  std::vector<PendingEndpoint> endpoints_;
  std::vector<ParseDiagnostic> diagnostics_;
};

}  // namespace

bool is_reserved_word(std::string_view word) {
  for (auto r : kReserved)
    if (word == r) return true;
  return false;
}

ParseResult<ModelDefinition> parse_model(std::string_view source, std::string file) {
  return ModelParser(source, std::move(file)).run();
}

ParseResult<Expr> parse_expression(std::string_view text, std::string file) {
  ParseResult<Expr> result;
  LineLexer lex(text);
  try {
    if (text.find('\n') != std::string_view::npos)
      throw LineError{"expression must fit on one line", static_cast<int>(text.find('\n')) + 1, 1};
    Expr e = ExprParser(lex).expression();
    Token tok = lex.peek();
    if (tok.kind != Token::Kind::End) fail_at(tok, "unexpected " + describe(tok) + " after expression");
    result.value = e;
  } catch (const LineError& e) {
    result.diagnostics.push_back({Severity::Error, e.message, SourceSpan{file, 1, e.column, e.length}});
  }
  return result;
}

ParseResult<CausalGraph> parse_cld(std::string_view source, std::string file) {
  ParseResult<CausalGraph> result;
  CausalGraph graph;
  bool has_error = false;
  auto lines = split_lines(source);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    int line_no = static_cast<int>(i) + 1;
    LineLexer lex(strip_comment(lines[i]));
    try {
      Token from = lex.next();
      if (from.kind == Token::Kind::End) continue;
      if (from.kind != Token::Kind::Ident) fail_at(from, "expected a variable name, found " + describe(from));
      Token arrow = lex.next();
      if (!arrow.is_symbol("->")) fail_at(arrow, "malformed arrow: expected '->', found " + describe(arrow));
      Token to = lex.next();
      if (to.kind != Token::Kind::Ident) fail_at(to, "expected a variable name, found " + describe(to));
      Token sign = lex.next();
      CausalEdge edge{std::string(from.text), std::string(to.text), Polarity::Positive, false};
      if (sign.is_symbol("+")) edge.polarity = Polarity::Positive;
      else if (sign.is_symbol("-")) edge.polarity = Polarity::Negative;
      else fail_at(sign, "missing polarity: expected '+' or '-', found " + describe(sign));
      Token mark = lex.next();
      if (mark.is("delay") || mark.is_symbol("||")) {
        edge.delayed = true;
        mark = lex.next();
      }
      if (mark.kind != Token::Kind::End) fail_at(mark, "unexpected " + describe(mark));
      SourceSpan span{file, line_no, from.column, to.column + static_cast<int>(to.text.size()) - from.column};
      if (edge.from == edge.to)
        result.diagnostics.push_back({Severity::Warning, "self-loop on '" + edge.from + "'", span});
      if (!graph.add_edge(edge))
        result.diagnostics.push_back({Severity::Warning, "duplicate edge ignored", span});
    } catch (const LineError& e) {
      has_error = true;
      result.diagnostics.push_back({Severity::Error, e.message, SourceSpan{file, line_no, e.column, e.length}});
    }
  }
  if (!has_error) result.value = std::move(graph);
  return result;
}

std::string serialize_model(const ModelDefinition& model) {
  std::string out = "model " + model.name() + "\n";
  auto trailer = [](const std::optional<Unit>& u) {
    return u ? " units " + u->to_string() : std::string();
  };
  auto endpoint = [](const Endpoint& e) { return e ? *e : std::string("cloud"); };
  for (const auto& p : model.parameters())
    out += "param " + p.name + " = " + format_number(p.value) + trailer(p.units) + "\n";
  for (const auto& a : model.auxiliaries())
    out += "aux " + a.name + " = " + format_expr(a.expr) + trailer(a.units) + "\n";
  for (const auto& f : model.flows())
    out += "flow " + f.name + " (" + endpoint(f.source) + " -> " + endpoint(f.target) + ") = " +
           format_expr(f.rate) + trailer(f.units) + "\n";
  for (const auto& s : model.stocks())
    out += "stock " + s.name + " = " + format_expr(s.initial) + trailer(s.units) +
           (s.non_negative ? " nonneg" : "") + "\n";
  return out;
}

}  // namespace sdkit
