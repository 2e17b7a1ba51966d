#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ta_gate::feedback {

inline constexpr std::string_view kVerdictPhrase = "correct according to the problem definition";
inline constexpr std::string_view kExplanationSection = "Brief Code Explanation";
inline constexpr std::string_view kIssuesSection = "Main Issues";
inline constexpr std::string_view kCorrectedSection = "Corrected Version";
inline constexpr std::string_view kFeedbackHeading = "Feedback";

enum class Verdict { Correct, Incorrect, Unparseable };

const char* to_string(Verdict v);
Verdict verdict_from_string(std::string_view s);

enum class SectionKind { Feedback, Explanation, Issues, Corrected, Extra };

/// One heading-delimited part of a feedback document. `heading_line` is the
/// heading as written; `body` is everything up to the next level-1/2 heading,
/// newlines included, so that preamble + heading_line + "\n" + body + ...
/// reassembles the (newline-normalized) document exactly.
struct Section {
  SectionKind kind = SectionKind::Extra;
  int level = 2;
  std::string title;
  std::string heading_line;
  std::string body;
  bool has_newline = true;  // false only for a heading on the very last line
};

struct StructureReport {
  std::vector<std::string> missing_sections;
  std::vector<std::string> extra_sections;
  bool misplaced_code = false;
  bool verdict_line_found = false;
  bool compliant = false;
  /// Anomalies that do not affect compliance (conflicting verdict lines,
  /// corrected code under a Correct verdict, ...).
  std::vector<std::string> notes;

  bool operator==(const StructureReport&) const = default;
};

struct ParsedFeedback {
  std::string raw;
  std::vector<std::string> steps;
  Verdict verdict = Verdict::Unparseable;
  std::vector<std::string> issues;
  std::optional<std::string> corrected_code;
  StructureReport structure;

  std::string preamble;
  std::vector<Section> sections;
};

/// Decides the verdict from the last line containing the verdict phrase.
/// The first YES/NO word after the question mark wins; anything else is
/// Unparseable.
Verdict extract_verdict(std::string_view raw);

/// Total: never throws for any input.
ParsedFeedback parse_feedback(std::string_view raw);

/// Reassembles the document from its sections in schema order (preamble,
/// "# Feedback", explanation, issues, corrected version, then any extras in
/// document order).
std::string render_sections(const ParsedFeedback& parsed);

/// The document with every Corrected Version section removed.
std::string strip_corrected_version(std::string_view raw);

/// True if `s` contains a Markdown code-fence marker (``` or ~~~).
bool contains_code_fence(std::string_view s);

/// Removes fenced regions and stray fence markers from free text.
std::string remove_code_fences(std::string_view s);

}  // namespace ta_gate::feedback
