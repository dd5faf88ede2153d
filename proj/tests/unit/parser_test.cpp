#include <gtest/gtest.h>

#include "random_model.hpp"
#include "sdkit/lending.hpp"
#include "sdkit/parser.hpp"
#include "sdkit/validate.hpp"

using namespace sdkit;

namespace {

bool mentions(const std::vector<ParseDiagnostic>& diags, const std::string& needle) {
  for (const auto& d : diags)
    if (d.message.find(needle) != std::string::npos) return true;
  return false;
}

// Every span lies inside the text: 1-based line and column, length within the line.
void expect_spans_inside(const std::string& text, const std::vector<ParseDiagnostic>& diags) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  for (const auto& d : diags) {
    ASSERT_GE(d.span.line, 1) << d.message;
    ASSERT_LE(d.span.line, static_cast<int>(lines.size())) << d.message;
    const auto& line = lines[d.span.line - 1];
    EXPECT_GE(d.span.column, 1) << d.message;
    EXPECT_GE(d.span.length, 0) << d.message;
    EXPECT_LE(d.span.column - 1 + d.span.length, static_cast<int>(line.size()) + 1) << d.message;
  }
}

}  // namespace

TEST(ParseModel, FlowExamples) {
  auto r = parse_model(
      "stock O = 1000 units people\n"
      "param alpha = 0.5\nparam tau = 10000\naux g = 1\nparam pi = 0.8\nparam upsilon = 10\n"
      "flow p (O -> cloud) = O * pi / upsilon\n"
      "flow r (cloud -> O) = alpha * tau * g\n");
  ASSERT_TRUE(r.ok());
  const FlowDef* p = r.value->flow("p");
  ASSERT_NE(p, nullptr);
  EXPECT_EQ(p->source, std::optional<std::string>("O"));
  EXPECT_EQ(p->target, std::nullopt);
  EXPECT_EQ(format_expr(p->rate), "O * pi / upsilon");
  const FlowDef* rr = r.value->flow("r");
  EXPECT_EQ(rr->source, std::nullopt);
  EXPECT_EQ(rr->target, std::optional<std::string>("O"));
}

TEST(ParseModel, StockWithoutFlows) {
  auto r = parse_model("stock O = 1000 units people\n");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.value->stock("O")->units, Unit::parse("people"));
  EXPECT_TRUE(validate_model(*r.value).ok());
}

TEST(ParseModel, NonnegAndComments) {
  auto r = parse_model("model x // name\n// whole line\nstock S = 1 units points/people nonneg // tail\n");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.value->name(), "x");
  EXPECT_TRUE(r.value->stock("S")->non_negative);
  EXPECT_EQ(r.value->stock("S")->units->to_string(), "points/people");
}

TEST(ParseModel, CrLfIsAccepted) {
  std::string unix_text = "model m\nparam k = 2\nstock S = k\nflow f (S -> cloud) = S * k\n";
  std::string dos_text;
  for (char c : unix_text) dos_text += c == '\n' ? std::string("\r\n") : std::string(1, c);
  auto a = parse_model(unix_text);
  auto b = parse_model(dos_text);
  ASSERT_TRUE(a.ok() && b.ok());
  EXPECT_EQ(*a.value, *b.value);
}

TEST(ParseModel, Diagnostics) {
  struct Case {
    std::string text;
    std::string needle;
    int line;
  };
  std::vector<Case> cases = {
      {"model m\nvar x = 1\n", "unknown keyword", 2},
      {"param a = 1\nparam a = 2\n", "duplicate name", 2},
      {"flow f (X -> cloud) = 1\n", "dangling endpoint", 1},
      {"param k = 1\nflow f (k -> cloud) = 1\n", "not a stock", 2},
      {"aux a = (1 + \n", "expected an expression", 1},
      {"param p = 1.2.3\n", "malformed number", 1},
      {"param then = 1\n", "reserved word", 1},
      {"stock S = 0\nflow f (S -> S) = 1\n", "distinct endpoints", 2},
      {"aux a = exp(1, 2)\n", "wrong number of arguments", 1},
      {"aux a = foo(1)\n", "unknown function", 1},
      {"param a = 1 units people^x\n", "malformed unit", 1},
      {"aux a = 3x\n", "malformed number", 1},
      {"aux a = 3 $ 4\n", "unexpected character", 1},
  };
  for (const auto& c : cases) {
    auto r = parse_model(c.text, "case.sd");
    EXPECT_FALSE(r.ok()) << c.text;
    EXPECT_TRUE(mentions(r.diagnostics, c.needle)) << c.text << " -> "
                                                   << (r.diagnostics.empty() ? "" : r.diagnostics[0].message);
    ASSERT_FALSE(r.diagnostics.empty());
    EXPECT_EQ(r.diagnostics[0].span.line, c.line) << c.text;
    EXPECT_EQ(r.diagnostics[0].span.file, "case.sd");
    expect_spans_inside(c.text, r.diagnostics);
  }
}

TEST(ParseModel, DiagnosticFormat) {
  auto r = parse_model("model m\nvar x = 1\n", "f.sd");
  ASSERT_FALSE(r.diagnostics.empty());
  EXPECT_EQ(format_diagnostic(r.diagnostics[0]).rfind("f.sd:2:1: error: ", 0), 0u);
}

TEST(ParseModel, UnicodeCharacterSpan) {
  std::string text = "aux a = 2 × 3\n";
  auto r = parse_model(text);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.diagnostics[0].span.column, 11);
  EXPECT_EQ(r.diagnostics[0].span.length, 2);
  expect_spans_inside(text, r.diagnostics);
}

TEST(Serialize, EmptyModel) {
  auto r = parse_model("model m");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(serialize_model(*r.value), "model m\n");
}

TEST(Serialize, CanonicalOrderAndParentheses) {
  auto r = parse_model("model m\nstock S = 1 nonneg\naux a = -(b + c)\nparam b = 1\nparam c = 2 units people\n"
                       "flow f (S -> cloud) = a\n");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(serialize_model(*r.value),
            "model m\n"
            "param b = 1\n"
            "param c = 2 units people\n"
            "aux a = -(b + c)\n"
            "flow f (S -> cloud) = a\n"
            "stock S = 1 nonneg\n");
}

TEST(Serialize, BundledModelRoundTrips) {
  ModelDefinition m = lending::build_model();
  std::string text = serialize_model(m);
  auto again = parse_model(text);
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(*again.value, m);
  EXPECT_EQ(serialize_model(*again.value), text);

  auto verbatim = lending::Config{};
  verbatim.verbatim_flows = true;
  ModelDefinition v = lending::build_model(verbatim);
  EXPECT_EQ(*parse_model(serialize_model(v)).value, v);
}

TEST(Serialize, RandomModelsRoundTrip) {
  sdkit::testing::RandomModels gen(20240611);
  for (int i = 0; i < 200; ++i) {
    ModelDefinition m = gen.model();
    std::string text = serialize_model(m);
    auto r = parse_model(text);
    ASSERT_TRUE(r.ok()) << text << (r.diagnostics.empty() ? "" : format_diagnostic(r.diagnostics[0]));
    EXPECT_EQ(*r.value, m) << text;
    EXPECT_EQ(serialize_model(*r.value), text);
  }
}

TEST(Serialize, RandomExpressionsRoundTrip) {
  sdkit::testing::RandomModels gen(7);
  std::vector<std::string> names{"a", "b", "S_A"};
  for (int i = 0; i < 2000; ++i) {
    Expr e = gen.expr(names, 5);
    std::string text = format_expr(e);
    auto r = parse_expression(text);
    ASSERT_TRUE(r.ok()) << text;
    EXPECT_EQ(*r.value, e) << text;
  }
}

TEST(ParseModel, MutatedInputsYieldSpansInside) {
  // Corrupt each line of a valid model in a few ways; the parser must never
  // crash and every diagnostic must point into the input.
  std::string base = lending::model_source();
  sdkit::testing::RandomModels gen(99);
  const std::string junk = "()=-><>$#@!,^*+ \t";
  for (int i = 0; i < 300; ++i) {
    std::string text = base;
    int edits = gen.uniform(1, 4);
    for (int k = 0; k < edits; ++k) {
      std::size_t at = static_cast<std::size_t>(gen.uniform(0, static_cast<int>(text.size()) - 1));
      switch (gen.uniform(0, 2)) {
        case 0: text.erase(at, static_cast<std::size_t>(gen.uniform(1, 5))); break;
        case 1: text.insert(at, 1, junk[static_cast<std::size_t>(gen.uniform(0, static_cast<int>(junk.size()) - 1))]); break;
        default: text[at] = junk[static_cast<std::size_t>(gen.uniform(0, static_cast<int>(junk.size()) - 1))];
      }
    }
    auto r = parse_model(text);
    expect_spans_inside(text, r.diagnostics);
    bool has_error = false;
    for (const auto& d : r.diagnostics) has_error |= d.severity == Severity::Error;
    EXPECT_EQ(r.ok(), !has_error);
  }
}

TEST(ParseCld, Edges) {
  auto r = parse_cld(
      "PaymentsMade -> AverageCreditScore + delay\n"
      "LoanDefaults -> AverageCreditScore -\n");
  ASSERT_TRUE(r.ok());
  const auto& e = r.value->edges();
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0], (CausalEdge{"PaymentsMade", "AverageCreditScore", Polarity::Positive, true}));
  EXPECT_EQ(e[1], (CausalEdge{"LoanDefaults", "AverageCreditScore", Polarity::Negative, false}));
}

TEST(ParseCld, SelfLoopAcceptedWithWarning) {
  auto r = parse_cld("A -> A +\n");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.value->edges().size(), 1u);
  ASSERT_EQ(r.diagnostics.size(), 1u);
  EXPECT_EQ(r.diagnostics[0].severity, Severity::Warning);
}

TEST(ParseCld, Errors) {
  auto missing = parse_cld("A -> B\n");
  EXPECT_FALSE(missing.ok());
  EXPECT_TRUE(mentions(missing.diagnostics, "missing polarity"));
  auto arrow = parse_cld("A => B +\n");
  EXPECT_FALSE(arrow.ok());
  EXPECT_TRUE(mentions(arrow.diagnostics, "malformed arrow"));
  expect_spans_inside("A => B +\n", arrow.diagnostics);
}

TEST(ParseCld, ParallelEdgesNeedDistinctMarks) {
  auto r = parse_cld("A -> B +\nA -> B -\nA -> B +\n");
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r.value->edges().size(), 2u);
  EXPECT_TRUE(mentions(r.diagnostics, "duplicate edge"));
}
