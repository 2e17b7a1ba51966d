#include <gtest/gtest.h>

#include "fixture.hpp"
#include "ta_gate/prompt.hpp"
#include "ta_gate/text.hpp"

using namespace ta_gate;

namespace {

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) s.replace(pos, from.size(), to);
}

// The published template, filled in by plain substitution.
std::string fill_template(const corpus::ProblemSpec& p, const std::string& sample_code, const std::string& sample_feedback,
                          const std::string& code) {
  std::string t =
      "You are a teacher who should provide feedback for undergraduate computer programming\n"
      "assignments. You will be provided with the code of a Python function implemented by a student\n"
      "called <FUNCTION_NAME>. <FUNCTION_DESCRIPTION>.\n"
      "\n"
      "The code should pass the following asserts:\n"
      "\n"
      "<ASSERTS>"
      "\n"
      "Q: Please provide feedback for the following implementation of <FUNCTION_NAME>:\n"
      "\n"
      "<SAMPLE_IMPLEMENTATION>"
      "\n"
      "<SAMPLE_FEEDBACK>"
      "\n"
      "Q: Please provide feedback for the following implementation of <FUNCTION_NAME>:\n"
      "\n"
      "<IMPLEMENTATION_TO_BE_ANALYZED>";
  std::string asserts;
  for (const auto& a : p.asserts) asserts += a + "\n";
  replace_all(t, "<ASSERTS>", asserts);
  replace_all(t, "<FUNCTION_NAME>", p.function_name);
  replace_all(t, "<FUNCTION_DESCRIPTION>", p.description);
  replace_all(t, "<SAMPLE_IMPLEMENTATION>", "```python\n" + sample_code + "```\n");
  replace_all(t, "<SAMPLE_FEEDBACK>", sample_feedback);
  replace_all(t, "<IMPLEMENTATION_TO_BE_ANALYZED>", "```python\n" + code + "```\n");
  return t;
}

corpus::ProblemSpec one_exemplar_problem() {
  auto p = fixture::problems().front();
  p.exemplars.resize(1);
  return p;
}

}  // namespace

TEST(Prompt, MatchesPublishedTemplate) {
  auto p = one_exemplar_problem();
  corpus::Submission s{"P1/x", p.id, "def rotated_palindrome(s):\n    return False\n", {}};
  auto r = prompt::render_prompt(p, s);
  EXPECT_EQ(r.text, fill_template(p, p.exemplars[0].code, p.exemplars[0].feedback, s.code));
  EXPECT_EQ(r.digest, text::sha256_hex(r.text));
  EXPECT_EQ(r.problem_id, "P1");
  EXPECT_EQ(r.submission_id, "P1/x");
}

TEST(Prompt, OneQuestionPerExemplarPlusSubmission) {
  auto problems = fixture::problems();
  for (const auto& p : problems) {
    corpus::Submission s{p.id + "/x", p.id, "pass\n", {}};
    auto text = prompt::render_prompt(p, s).text;
    std::size_t n = 0;
    for (auto pos = text.find(prompt::kQuestionLead); pos != std::string::npos;
         pos = text.find(prompt::kQuestionLead, pos + 1))
      ++n;
    EXPECT_EQ(n, p.exemplars.size() + 1);
    EXPECT_TRUE(text.ends_with("```python\npass\n```\n"));
  }
}

TEST(Prompt, DeterministicAndSensitiveToCode) {
  auto p = one_exemplar_problem();
  corpus::Submission a{"P1/a", p.id, "x = 1\n", {}};
  corpus::Submission b{"P1/b", p.id, "x = 2\n", {}};
  EXPECT_EQ(prompt::render_prompt(p, a).digest, prompt::render_prompt(p, a).digest);
  EXPECT_NE(prompt::render_prompt(p, a).digest, prompt::render_prompt(p, b).digest);
  // the submission id is provenance only
  corpus::Submission a2{"P1/other", p.id, "x = 1\n", {}};
  EXPECT_EQ(prompt::render_prompt(p, a).text, prompt::render_prompt(p, a2).text);
}

TEST(Prompt, LineEndingsNormalized) {
  auto p = one_exemplar_problem();
  corpus::Submission crlf{"P1/a", p.id, "x = 1\r\ny = 2\r\n", {}};
  corpus::Submission lf{"P1/a", p.id, "x = 1\ny = 2\n", {}};
  EXPECT_EQ(prompt::render_prompt(p, crlf).text, prompt::render_prompt(p, lf).text);
}

TEST(Prompt, MismatchedProblem) {
  auto p = one_exemplar_problem();
  corpus::Submission s{"P2/a", "P2", "x = 1\n", {}};
  EXPECT_THROW(prompt::render_prompt(p, s), prompt::MismatchedProblem);
}

TEST(Prompt, FenceOutgrowsBackticksInCode) {
  auto f = prompt::fence_code("s = '```'\n");
  EXPECT_TRUE(f.starts_with("````python\n"));
  EXPECT_TRUE(f.ends_with("\n````\n"));
  EXPECT_EQ(prompt::fence_code("x"), "```python\nx\n```\n");
}
