#include "ta_gate/prompt.hpp"

#include <algorithm>

#include "ta_gate/text.hpp"

namespace ta_gate::prompt {

namespace {

std::string with_single_trailing_newline(std::string s) {
  while (!s.empty() && s.back() == '\n') s.pop_back();
  s.push_back('\n');
  return s;
}

std::string_view description_sentence(std::string_view desc) {
  desc = text::trim(desc);
  while (!desc.empty() && desc.back() == '.') desc.remove_suffix(1);
  return desc;
}

void append_question(std::string& out, const std::string& function_name, std::string_view code) {
  out += kQuestionLead;
  out += function_name;
  out += ":\n\n";
  out += fence_code(code);
}

}  // namespace

std::string fence_code(std::string_view code) {
  std::string body = with_single_trailing_newline(text::normalize_newlines(code));
  std::size_t longest = 0;
  std::size_t run = 0;
  for (char c : body) {
    run = c == '`' ? run + 1 : 0;
    longest = std::max(longest, run);
  }
  std::string fence(std::max<std::size_t>(3, longest + 1), '`');
  return fence + "python\n" + body + fence + "\n";
}

RenderedPrompt render_prompt(const corpus::ProblemSpec& problem, const corpus::Submission& submission) {
  if (submission.problem_id != problem.id)
    throw MismatchedProblem("submission " + submission.id + " belongs to problem " + submission.problem_id +
                            ", not " + problem.id);
  const auto& name = problem.function_name;
  std::string out;
  out += "You are a teacher who should provide feedback for undergraduate computer programming\n";
  out += "assignments. You will be provided with the code of a Python function implemented by a student\n";
  out += "called " + name + ".";
  if (auto desc = description_sentence(problem.description); !desc.empty()) {
    out += ' ';
    out += text::normalize_newlines(desc);
    out += '.';
  }
  out += "\n\nThe code should pass the following asserts:\n\n";
  for (const auto& a : problem.asserts) {
    out += text::trim_right(text::normalize_newlines(a));
    out += '\n';
  }

  for (const auto& ex : problem.exemplars) {
    out += '\n';
    append_question(out, name, ex.code);
    out += '\n';
    auto fb = text::normalize_newlines(ex.feedback);
    auto first = text::trim(fb);
    if (!text::starts_with_icase(first, "# Feedback")) out += "# Feedback\n\n";
    out += with_single_trailing_newline(std::string(text::trim(fb)));
  }

  out += '\n';
  append_question(out, name, submission.code);

  RenderedPrompt r;
  r.digest = text::sha256_hex(out);
  r.text = std::move(out);
  r.problem_id = problem.id;
  r.submission_id = submission.id;
  return r;
}

}  // namespace ta_gate::prompt
