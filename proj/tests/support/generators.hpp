#pragma once

// Random inputs shared by the unit tests and the acceptance binary.

#include <random>
#include <string>
#include <vector>

#include "ta_gate/feedback.hpp"

namespace gen {

/// Markdown-ish fragments plus raw bytes, at most 64 KiB.
inline std::string feedback_document(std::mt19937_64& rng) {
  static const std::vector<std::string> fragments = {
      "# Feedback\n", "## Brief Code Explanation\n", "## Main Issues (if the function is not correct)\n",
      "## Corrected Version (if the function is not correct)\n", "## Suggestions\n", "# Other\n", "#\n", "##\n",
      "### Deep\n", "1. step\n", "2) step\n", "- issue\n", "* issue\n", "  continued\n", "```python\n", "```\n",
      "~~~\n", "````\n", "Is the function correct according to the problem definition [YES/NO]? YES\n",
      "Is the function correct according to the problem definition [YES/NO]? NO\n",
      "correct according to the problem definition", "? ", "yes", "no", "\r\n", "\r", "\n", "\t", " ", "`", "**",
      "(if the function is not correct)", "- None\n", "N/A\n", "\xc3\xa9", "\xff\xfe", std::string(1, '\0'),
  };
  std::uniform_int_distribution<int> kind(0, 9);
  std::size_t target = rng() % 4 == 0 ? rng() % (64 << 10) : rng() % 600;
  std::string out;
  while (out.size() < target) {
    if (kind(rng) < 8) {
      out += fragments[rng() % fragments.size()];
    } else {
      auto n = rng() % 16;
      for (std::size_t i = 0; i < n; ++i) out += static_cast<char>(rng() % 256);
    }
  }
  if (out.size() > (64u << 10)) out.resize(64u << 10);
  return out;
}

// Markers make any feedback-derived text detectable in a payload.
inline std::string marker(std::mt19937_64& rng) { return "MK" + std::to_string(rng() % 1000000000) + "Z"; }

inline std::string noisy_text(std::mt19937_64& rng, std::vector<std::string>& markers) {
  static const std::vector<std::string> pieces = {"```", "```python\n", "~~~", "````", "\n", " ", "`", "x = 1", "##",
                                                  "- ", "1. ", "```\n"};
  std::string s;
  auto n = rng() % 8;
  for (std::size_t i = 0; i < n; ++i) {
    if (rng() % 3 == 0) {
      markers.push_back(marker(rng));
      s += markers.back();
    } else {
      s += pieces[rng() % pieces.size()];
    }
  }
  return s;
}

/// Field-level random ParsedFeedback, not necessarily reachable by the parser.
inline ta_gate::feedback::ParsedFeedback synthetic_feedback(std::mt19937_64& rng, std::vector<std::string>& markers) {
  ta_gate::feedback::ParsedFeedback fb;
  fb.verdict = static_cast<ta_gate::feedback::Verdict>(rng() % 3);
  for (auto n = rng() % 6; n > 0; --n) fb.issues.push_back(noisy_text(rng, markers));
  for (auto n = rng() % 4; n > 0; --n) fb.steps.push_back(noisy_text(rng, markers));
  if (rng() % 2) fb.corrected_code = noisy_text(rng, markers);
  fb.raw = noisy_text(rng, markers);
  fb.structure.verdict_line_found = rng() % 2;
  fb.structure.compliant = rng() % 2;
  fb.structure.misplaced_code = rng() % 2;
  return fb;
}

/// Parser output for a random marked-up document.
inline ta_gate::feedback::ParsedFeedback parsed_feedback(std::mt19937_64& rng, std::vector<std::string>& markers) {
  static const std::vector<std::string> frame = {
      "# Feedback\n", "## Brief Code Explanation\n", "## Main Issues\n", "## Corrected Version\n", "## Extra\n",
      "Is the function correct according to the problem definition [YES/NO]? YES\n",
      "Is the function correct according to the problem definition [YES/NO]? NO\n", "```python\n", "```\n", "~~~\n",
      "\n"};
  std::string doc;
  for (auto n = 5 + rng() % 30; n > 0; --n) {
    switch (rng() % 4) {
      case 0:
        doc += frame[rng() % frame.size()];
        break;
      case 1:
        markers.push_back(marker(rng));
        doc += "1. " + markers.back() + "\n";
        break;
      case 2:
        markers.push_back(marker(rng));
        doc += "- " + markers.back() + " " + noisy_text(rng, markers) + "\n";
        break;
      default:
        doc += noisy_text(rng, markers) + "\n";
    }
  }
  return ta_gate::feedback::parse_feedback(doc);
}

}  // namespace gen
