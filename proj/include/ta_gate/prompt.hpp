#pragma once

#include <string>

#include "ta_gate/corpus.hpp"
#include "ta_gate/error.hpp"

namespace ta_gate::prompt {

inline constexpr std::string_view kQuestionLead = "Q: Please provide feedback for the following implementation of ";

struct RenderedPrompt {
  std::string text;
  std::string problem_id;
  std::string submission_id;
  std::string digest;  // sha256 of text

  bool operator==(const RenderedPrompt&) const = default;
};

class MismatchedProblem : public Error {
 public:
  explicit MismatchedProblem(const std::string& msg) : Error("MismatchedProblem", msg) {}
};

/// Teacher-role statement, the asserts, one Q/feedback pair per exemplar and
/// a final unanswered Q block holding the submission code. Code is fenced as
/// ```python; line endings are normalized, nothing else is rewritten.
RenderedPrompt render_prompt(const corpus::ProblemSpec& problem, const corpus::Submission& submission);

/// Fence long enough not to collide with any backtick run inside `code`.
std::string fence_code(std::string_view code);

}  // namespace ta_gate::prompt
