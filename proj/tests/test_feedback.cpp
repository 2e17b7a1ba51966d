#include <gtest/gtest.h>

#include <random>

#include "fixture.hpp"
#include "generators.hpp"
#include "ta_gate/corpus.hpp"
#include "ta_gate/feedback.hpp"
#include "ta_gate/text.hpp"

using namespace ta_gate;
using namespace ta_gate::feedback;
using nlohmann::json;

namespace {

json expected() { return json::parse(corpus::read_file(fixture::root() / "feedback" / "expected.json")); }

std::string doc(const std::string& name) { return corpus::read_file(fixture::root() / "feedback" / (name + ".md")); }

}  // namespace

TEST(ParserCorpus, EveryDocumentClassified) {
  auto exp = expected();
  ASSERT_GE(exp.size(), 20u);
  for (const auto& [name, e] : exp.items()) {
    SCOPED_TRACE(name);
    auto p = parse_feedback(doc(name));
    EXPECT_EQ(to_string(p.verdict), e["verdict"].get<std::string>());
    EXPECT_EQ(p.structure.compliant, e["compliant"].get<bool>());
    EXPECT_EQ(p.structure.missing_sections, e["missing"].get<std::vector<std::string>>());
    EXPECT_EQ(p.structure.extra_sections, e["extra"].get<std::vector<std::string>>());
    EXPECT_EQ(p.structure.misplaced_code, e["misplaced_code"].get<bool>());
    EXPECT_EQ(p.structure.verdict_line_found, e["verdict_line_found"].get<bool>());
    EXPECT_EQ(p.issues.size(), e["issues"].get<std::size_t>());
    EXPECT_EQ(p.steps.size(), e["steps"].get<std::size_t>());
    EXPECT_EQ(p.corrected_code.has_value(), e["corrected"].get<bool>());
    if (e.contains("corrected_code")) EXPECT_EQ(p.corrected_code.value_or(""), e["corrected_code"].get<std::string>());
  }
}

TEST(ParserCorpus, CoversEveryCategory) {
  auto exp = expected();
  bool compliant = false, missing = false, extra = false, misplaced = false, no_verdict = false, variant = false;
  for (const auto& [name, e] : exp.items()) {
    compliant |= e["compliant"].get<bool>() && !e["misplaced_code"].get<bool>();
    missing |= !e["missing"].empty();
    extra |= !e["extra"].empty();
    misplaced |= e["misplaced_code"].get<bool>();
    no_verdict |= !e["verdict_line_found"].get<bool>();
    variant |= name.find("verdict") != std::string::npos;
  }
  EXPECT_TRUE(compliant && missing && extra && misplaced && no_verdict && variant);
}

TEST(Verdict, Variants) {
  EXPECT_EQ(extract_verdict("Is the function correct according to the problem definition [YES/NO]? NO"),
            Verdict::Incorrect);
  EXPECT_EQ(extract_verdict("... correct according to the problem definition [YES/NO]? yes."), Verdict::Correct);
  EXPECT_EQ(extract_verdict("no verdict here"), Verdict::Unparseable);
  EXPECT_EQ(extract_verdict("Is it correct according to the problem definition? Yes, it is."), Verdict::Correct);
  EXPECT_EQ(extract_verdict("correct according to the problem definition [YES/NO]? maybe"), Verdict::Unparseable);
  // the last line wins
  EXPECT_EQ(extract_verdict("correct according to the problem definition? NO\n"
                            "correct according to the problem definition? YES\n"),
            Verdict::Correct);
  // "nothing" is not "no"
  EXPECT_EQ(extract_verdict("correct according to the problem definition? nothing to add"), Verdict::Unparseable);
}

TEST(Parser, SpecExamples) {
  auto p = parse_feedback(doc("01_compliant_incorrect"));
  EXPECT_EQ(p.verdict, Verdict::Incorrect);
  EXPECT_EQ(p.issues.size(), 2u);
  EXPECT_TRUE(p.corrected_code.has_value());
  EXPECT_TRUE(p.structure.compliant);
  EXPECT_FALSE(p.structure.misplaced_code);

  auto q = parse_feedback(doc("07_extra_suggestions_with_code"));
  EXPECT_EQ(q.structure.extra_sections, std::vector<std::string>{"Suggestions"});
  EXPECT_TRUE(q.structure.misplaced_code);
  EXPECT_FALSE(q.structure.compliant);
}

TEST(Parser, StepsAndIssuesText) {
  auto p = parse_feedback(doc("01_compliant_incorrect"));
  ASSERT_EQ(p.steps.size(), 3u);
  EXPECT_EQ(p.steps[0], "It loops over the input.");
  EXPECT_EQ(p.issues[1], "An empty input raises an exception.");
}

TEST(Parser, AnomaliesAreRecorded) {
  auto p = parse_feedback(doc("14_verdict_conflicting"));
  EXPECT_FALSE(p.structure.notes.empty());
  auto q = parse_feedback(
      "# Feedback\n\n## Brief Code Explanation\n\n1. x\n\n"
      "Is the function correct according to the problem definition [YES/NO]? YES\n\n"
      "## Main Issues\n\n- Something is off.\n\n## Corrected Version\n\n```python\nx = 1\n```\n");
  EXPECT_EQ(q.verdict, Verdict::Correct);
  EXPECT_EQ(q.issues.size(), 1u);
  EXPECT_TRUE(q.corrected_code.has_value());
  EXPECT_EQ(q.structure.notes.size(), 2u);
}

TEST(Parser, SectionContentPreservation) {
  auto exp = expected();
  for (const auto& [name, e] : exp.items()) {
    if (!e["compliant"].get<bool>()) continue;
    SCOPED_TRACE(name);
    auto raw = text::normalize_newlines(doc(name));
    auto p = parse_feedback(raw);
    auto again = parse_feedback(render_sections(p));
    ASSERT_EQ(again.sections.size(), p.sections.size());
    for (std::size_t i = 0; i < p.sections.size(); ++i) {
      EXPECT_EQ(text::trim_right(again.sections[i].body), text::trim_right(p.sections[i].body));
      EXPECT_EQ(again.sections[i].kind, p.sections[i].kind);
    }
    // already in schema order: reproduces the document
    EXPECT_EQ(text::trim_right(render_sections(p)), text::trim_right(raw));
  }
}

TEST(Parser, StrippingCorrectedVersionKeepsTheRest) {
  auto exp = expected();
  for (const auto& [name, e] : exp.items()) {
    if (!e["compliant"].get<bool>()) continue;
    SCOPED_TRACE(name);
    auto p = parse_feedback(doc(name));
    auto stripped = strip_corrected_version(doc(name));
    auto s = parse_feedback(stripped);
    EXPECT_EQ(s.steps, p.steps);
    EXPECT_EQ(s.verdict, p.verdict);
    EXPECT_EQ(s.issues, p.issues);
    EXPECT_FALSE(s.corrected_code.has_value());
  }
}

TEST(Parser, ExemplarClosure) {
  for (const auto& problem : fixture::problems())
    for (const auto& ex : problem.exemplars) {
      auto p = parse_feedback(ex.feedback);
      EXPECT_TRUE(p.structure.compliant);
      EXPECT_NE(p.verdict, Verdict::Unparseable);
    }
}

TEST(Fences, RemoveCodeFences) {
  EXPECT_EQ(remove_code_fences("a ```x``` b"), "a  b");
  EXPECT_FALSE(contains_code_fence(remove_code_fences("``````` ~~~ ``")));
  EXPECT_FALSE(contains_code_fence(remove_code_fences("`` ` ``` ` ``")));
  EXPECT_EQ(remove_code_fences("use `x` here"), "use `x` here");
  std::mt19937 rng(3);
  const char alphabet[] = "`~ a\n";
  for (int i = 0; i < 2000; ++i) {
    std::string s(rng() % 40, ' ');
    for (auto& c : s) c = alphabet[rng() % 5];
    ASSERT_FALSE(contains_code_fence(remove_code_fences(s))) << s;
  }
}

TEST(ParserFuzz, TotalOnTenThousandInputs) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 10000; ++i) {
    auto input = gen::feedback_document(rng);
    ParsedFeedback p;
    ASSERT_NO_THROW(p = parse_feedback(input)) << "case " << i;
    ASSERT_EQ(p.raw, input);
    ASSERT_EQ(p.structure.compliant, p.structure.missing_sections.empty() && p.structure.extra_sections.empty());
    ASSERT_EQ(p.verdict, extract_verdict(input));
    if (!p.structure.verdict_line_found) ASSERT_EQ(p.verdict, Verdict::Unparseable);
    ASSERT_NO_THROW(render_sections(p));
    ASSERT_NO_THROW(strip_corrected_version(input));
  }
}
