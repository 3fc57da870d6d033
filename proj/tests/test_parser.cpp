#include <doctest.h>

#include <string>
#include <vector>

#include "promptlog/parser.hpp"

using namespace promptlog;

TEST_CASE("numbered answers split on the first hyphen delimiter") {
  const auto [answers, diagnostics] = parse_numbered_answers(
      "(1) normal - no alert present\n(2) abnormal - kernel error keyword", 2);
  REQUIRE(answers.size() == 2);
  CHECK(diagnostics.format_valid());
  CHECK(answers[0].ordinal == 1);
  CHECK(answers[0].answer == "normal");
  CHECK(answers[0].reason == "no alert present");
  CHECK(answers[1].answer == "abnormal");
  CHECK(answers[1].reason == "kernel error keyword");
}

TEST_CASE("hyphens after the separator stay in the reason") {
  const auto [answers, _] =
      parse_numbered_answers("(1) Took <*> ms - time - including re-tries", 1);
  REQUIRE(answers.size() == 1);
  CHECK(answers[0].answer == "Took <*> ms");
  CHECK(answers[0].reason == "time - including re-tries");
}

TEST_CASE("bare hyphens split when no spaced delimiter exists") {
  const auto [answers, _] = parse_numbered_answers("(1) normal-no alert", 1);
  REQUIRE(answers.size() == 1);
  CHECK(answers[0].answer == "normal");
  CHECK(answers[0].reason == "no alert");
}

TEST_CASE("omitted ordinals are diagnosed") {
  const auto [answers, diagnostics] = parse_numbered_answers("(1) ok - fine", 2);
  CHECK(answers.size() == 1);
  CHECK(diagnostics.missing_ordinals == std::vector<std::size_t>{2});
  CHECK_FALSE(diagnostics.format_valid());
}

TEST_CASE("preamble chatter is tolerated and recorded") {
  const auto [answers, diagnostics] =
      parse_numbered_answers("preamble text\n(1) A <*> B - variable is an id", 1);
  REQUIRE(answers.size() == 1);
  CHECK(diagnostics.format_valid());
  CHECK(diagnostics.extra_lines == std::vector<std::string>{"preamble text"});
  CHECK(answers[0].answer == "A <*> B");
}

TEST_CASE("duplicate ordinals keep the first occurrence") {
  const auto [answers, diagnostics] =
      parse_numbered_answers("(1) first - a\n(1) second - b", 1);
  REQUIRE(answers.size() == 1);
  CHECK(answers[0].answer == "first");
  CHECK(diagnostics.duplicate_ordinals == std::vector<std::size_t>{1});
}

TEST_CASE("out-of-range ordinals count as extra lines") {
  const auto [answers, diagnostics] = parse_numbered_answers("(1) a - b\n(3) c - d", 2);
  CHECK(answers.size() == 1);
  CHECK(diagnostics.extra_lines == std::vector<std::string>{"(3) c - d"});
  CHECK(diagnostics.missing_ordinals == std::vector<std::size_t>{2});
}

TEST_CASE("the parser never throws on arbitrary text") {
  for (const char* text : {"", "no numbers at all", "(((\n)))", "(1)", "(0) x - y",
                           "(99999999999) x", "()", "( 1 ) x - y", "\n\n\n"}) {
    CHECK_NOTHROW(parse_numbered_answers(text, 3));
  }
}

TEST_CASE("numbered lists keep the whole line as the answer") {
  const auto [answers, diagnostics] =
      parse_numbered_list("(1) Extract the log template - with care\n(2) Parse it", 2);
  REQUIRE(answers.size() == 2);
  CHECK(diagnostics.format_valid());
  CHECK(answers[0].answer == "Extract the log template - with care");
  CHECK(answers[0].reason.empty());
}

TEST_CASE("template normalization canonicalizes wildcard spellings") {
  SUBCASE("angle bracket spelling") {
    const LogTemplate t = normalize_template("Connection from 〈*〉 closed");
    CHECK(t.text == "Connection from <*> closed");
    REQUIRE(t.tokens.size() == 4);
    CHECK_FALSE(t.tokens[0].is_variable());
    CHECK_FALSE(t.tokens[1].is_variable());
    CHECK(t.tokens[2].is_variable());
    CHECK_FALSE(t.tokens[3].is_variable());
  }
  SUBCASE("identity") {
    CHECK(normalize_template("took <*> ms").text == "took <*> ms");
  }
  SUBCASE("bracket variants and whitespace collapse") {
    std::vector<std::string> notes;
    const LogTemplate t = normalize_template("send [*] bytes  to {*}", &notes);
    CHECK(t.text == "send <*> bytes to <*>");
    CHECK(notes.size() >= 3);  // two bracket rewrites plus the collapse note
  }
  SUBCASE("lone star is a wildcard only as a whole token") {
    CHECK(normalize_template("a * b").text == "a <*> b");
    CHECK(normalize_template("a*b").text == "a*b");
    CHECK_FALSE(normalize_template("a*b").tokens[0].is_variable());
  }
  SUBCASE("mixed tokens count as variables") {
    const LogTemplate t = normalize_template("id=<*> ready");
    CHECK(t.tokens[0].is_variable());
    CHECK(t.text == "<*> ready");
  }
  SUBCASE("other spellings") {
    CHECK(normalize_template("user <VAR> logged in").text == "user <*> logged in");
    CHECK(normalize_template("wrote {{variable}} records").text == "wrote <*> records");
  }
  SUBCASE("empty input is an error") {
    CHECK_THROWS_AS(normalize_template("   "), Error);
  }
}

TEST_CASE("template normalization is idempotent") {
  for (const char* raw :
       {"Connection from 〈*〉 closed", "send [*] bytes  to {*}", "a * b", "plain text",
        "id=<*> up", "user <VAR> did {{variable}} things", "x\t y"}) {
    const LogTemplate once = normalize_template(raw);
    CHECK(normalize_template(once.text).text == once.text);
  }
}

TEST_CASE("verdicts normalize by first recognized keyword") {
  CHECK(normalize_verdict("Abnormal") == Verdict::Abnormal);
  CHECK(normalize_verdict("0") == Verdict::Normal);
  CHECK(normalize_verdict("1") == Verdict::Abnormal);
  CHECK(normalize_verdict("the log is normal.") == Verdict::Normal);
  CHECK(normalize_verdict("this one is abnormal, clearly") == Verdict::Abnormal);
  CHECK(normalize_verdict("ANOMALY detected") == Verdict::Abnormal);
  CHECK(normalize_verdict("anomalous entry") == Verdict::Abnormal);
  CHECK_FALSE(try_normalize_verdict("maybe").has_value());
  CHECK_FALSE(try_normalize_verdict("10").has_value());
  CHECK_THROWS_AS(normalize_verdict("unclear"), Error);
}

TEST_CASE("coverage requires exactly the expected ordinals") {
  const auto make = [](std::initializer_list<std::size_t> ordinals) {
    std::vector<ParsedAnswer> answers;
    for (std::size_t i : ordinals) answers.push_back({i, "normal", ""});
    return answers;
  };
  CHECK(validate_coverage(make({1, 2, 3}), 3, Task::Parsing));
  CHECK_FALSE(validate_coverage(make({1, 3}), 3, Task::Parsing));
  CHECK_FALSE(validate_coverage(make({1, 2}), 3, Task::Parsing));

  std::vector<ParsedAnswer> answers = {{1, "normal", ""}, {2, "maybe", ""}};
  CHECK(validate_coverage(answers, 2, Task::Parsing));
  CHECK_FALSE(validate_coverage(answers, 2, Task::Anomaly));
}
