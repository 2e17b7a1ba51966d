#include "ta_gate/feedback.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "ta_gate/text.hpp"

namespace ta_gate::feedback {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Correct:
      return "Correct";
    case Verdict::Incorrect:
      return "Incorrect";
    case Verdict::Unparseable:
      return "Unparseable";
  }
  return "Unparseable";
}

Verdict verdict_from_string(std::string_view s) {
  if (s == "Correct") return Verdict::Correct;
  if (s == "Incorrect") return Verdict::Incorrect;
  return Verdict::Unparseable;
}

namespace {

struct Line {
  std::size_t begin = 0;
  std::size_t end = 0;  // excludes '\n'
  bool has_newline = false;
};

std::vector<Line> scan_lines(std::string_view s) {
  std::vector<Line> lines;
  std::size_t start = 0;
  while (start < s.size()) {
    auto nl = s.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back({start, s.size(), false});
      break;
    }
    lines.push_back({start, nl, true});
    start = nl + 1;
  }
  return lines;
}

bool is_blank(std::string_view line) { return text::trim(line).empty(); }

std::string_view skip_indent(std::string_view line) {
  while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
  return line;
}

struct Fence {
  char ch = '`';
  std::size_t len = 0;
};

std::optional<Fence> fence_open(std::string_view line) {
  line = skip_indent(line);
  if (line.empty() || (line.front() != '`' && line.front() != '~')) return std::nullopt;
  char ch = line.front();
  std::size_t n = 0;
  while (n < line.size() && line[n] == ch) ++n;
  if (n < 3) return std::nullopt;
  return Fence{ch, n};
}

bool fence_close(std::string_view line, const Fence& open) {
  line = skip_indent(line);
  std::size_t n = 0;
  while (n < line.size() && line[n] == open.ch) ++n;
  return n >= open.len && text::trim(line.substr(n)).empty();
}

struct Heading {
  int level = 0;
  std::string title;
};

std::optional<Heading> parse_heading(std::string_view line) {
  std::size_t spaces = 0;
  while (spaces < line.size() && spaces < 4 && line[spaces] == ' ') ++spaces;
  if (spaces > 3) return std::nullopt;
  line.remove_prefix(spaces);
  std::size_t hashes = 0;
  while (hashes < line.size() && line[hashes] == '#') ++hashes;
  if (hashes == 0 || hashes > 6) return std::nullopt;
  auto rest = line.substr(hashes);
  if (!rest.empty() && rest.front() != ' ' && rest.front() != '\t') return std::nullopt;
  rest = text::trim(rest);
  // optional closing sequence
  auto last = rest.find_last_not_of('#');
  if (last == std::string_view::npos) {
    rest = {};
  } else if (last + 1 < rest.size() && (rest[last] == ' ' || rest[last] == '\t')) {
    rest = text::trim(rest.substr(0, last + 1));
  }
  return Heading{static_cast<int>(hashes), std::string(rest)};
}

// Heading text with emphasis markers and a trailing colon removed.
std::string clean_title(std::string_view title) {
  auto t = text::trim(title);
  while (!t.empty() && (t.front() == '*' || t.front() == '_')) t.remove_prefix(1);
  while (!t.empty() && (t.back() == '*' || t.back() == '_' || t.back() == ':')) t.remove_suffix(1);
  return std::string(text::trim(t));
}

// Title used for schema matching: the parenthetical suffix is ignored.
std::string match_title(std::string_view title) {
  auto cleaned = clean_title(title);
  auto paren = cleaned.find('(');
  if (paren != std::string::npos) cleaned = std::string(text::trim(std::string_view(cleaned).substr(0, paren)));
  return cleaned;
}

SectionKind classify_heading(int level, std::string_view title) {
  auto t = match_title(title);
  if (level == 1) {
    return text::starts_with_icase(t, kFeedbackHeading) ? SectionKind::Feedback : SectionKind::Extra;
  }
  if (text::starts_with_icase(t, kExplanationSection)) return SectionKind::Explanation;
  if (text::starts_with_icase(t, kIssuesSection)) return SectionKind::Issues;
  if (text::starts_with_icase(t, kCorrectedSection)) return SectionKind::Corrected;
  return SectionKind::Extra;
}

bool has_verdict_phrase(std::string_view line) { return text::contains_icase(line, kVerdictPhrase); }

// "1. text", "12) text"
std::optional<std::string_view> ordered_item(std::string_view line) {
  auto t = skip_indent(line);
  std::size_t digits = 0;
  while (digits < t.size() && digits < 9 && std::isdigit(static_cast<unsigned char>(t[digits]))) ++digits;
  if (digits == 0 || digits >= t.size()) return std::nullopt;
  if (t[digits] != '.' && t[digits] != ')') return std::nullopt;
  auto rest = t.substr(digits + 1);
  if (!rest.empty() && rest.front() != ' ' && rest.front() != '\t') return std::nullopt;
  return text::trim(rest);
}

// "- text", "* text", "+ text", or a lone marker.
std::optional<std::string_view> bullet_item(std::string_view line) {
  auto t = skip_indent(line);
  if (t.empty() || (t.front() != '-' && t.front() != '*' && t.front() != '+')) return std::nullopt;
  auto rest = t.substr(1);
  if (!rest.empty() && rest.front() != ' ' && rest.front() != '\t') return std::nullopt;
  return text::trim(rest);
}

enum class ListStyle { Ordered, Any };

// List items of a section body. Fenced regions and bare verdict lines are
// skipped and terminate the current item.
std::vector<std::string> list_items(std::string_view body, ListStyle style) {
  std::vector<std::string> items;
  bool open = false;
  std::optional<Fence> fence;
  for (auto line : text::split_lines(body)) {
    if (fence) {
      if (fence_close(line, *fence)) fence.reset();
      continue;
    }
    if (auto f = fence_open(line)) {
      fence = f;
      open = false;
      continue;
    }
    if (is_blank(line)) continue;
    std::optional<std::string_view> item = ordered_item(line);
    if (!item && style == ListStyle::Any) item = bullet_item(line);
    if (item) {
      items.emplace_back(*item);
      open = true;
      continue;
    }
    if (has_verdict_phrase(line)) {
      open = false;
      continue;
    }
    bool indented = !line.empty() && (line.front() == ' ' || line.front() == '\t');
    if (open && indented) {
      auto& last = items.back();
      if (!last.empty()) last += ' ';
      last += text::trim(line);
    } else {
      open = false;
    }
  }
  return items;
}

bool is_placeholder_issue(std::string_view item) {
  auto t = text::to_lower(text::trim(item));
  while (!t.empty() && (t.back() == '.' || t.back() == '!')) t.pop_back();
  static constexpr std::array<std::string_view, 10> kPlaceholders = {
      "", "-", "--", "none", "n/a", "na", "no issues", "nothing", "not applicable", "\xe2\x80\x94"};
  return std::find(kPlaceholders.begin(), kPlaceholders.end(), t) != kPlaceholders.end();
}

struct FenceScan {
  bool any_fence = false;
  std::string contents;
};

FenceScan scan_fences(std::string_view body) {
  FenceScan out;
  std::optional<Fence> fence;
  for (auto line_view : text::split_lines(body)) {
    if (fence) {
      if (fence_close(line_view, *fence)) {
        fence.reset();
      } else {
        out.contents.append(line_view);
        out.contents.push_back('\n');
      }
      continue;
    }
    if (auto f = fence_open(line_view)) {
      fence = f;
      out.any_fence = true;
    }
  }
  return out;
}

}  // namespace

Verdict extract_verdict(std::string_view raw) {
  std::string normalized = text::normalize_newlines(raw);
  std::optional<std::string_view> verdict_line;
  for (auto line : text::split_lines(normalized)) {
    if (has_verdict_phrase(line)) verdict_line = line;
  }
  if (!verdict_line) return Verdict::Unparseable;

  std::string lower = text::to_lower(*verdict_line);
  auto phrase_at = lower.rfind(kVerdictPhrase);
  std::size_t start = phrase_at + kVerdictPhrase.size();
  auto q = lower.find('?', start);
  if (q != std::string::npos) {
    start = q + 1;
  } else {
    while (start < lower.size() && (lower[start] == ' ' || lower[start] == '\t')) ++start;
    if (start < lower.size() && lower[start] == '[') {
      auto close = lower.find(']', start);
      start = close == std::string::npos ? lower.size() : close + 1;
    }
  }

  std::size_t i = start;
  while (i < lower.size()) {
    while (i < lower.size() && !std::isalpha(static_cast<unsigned char>(lower[i]))) ++i;
    std::size_t j = i;
    while (j < lower.size() && std::isalpha(static_cast<unsigned char>(lower[j]))) ++j;
    std::string_view word(lower.data() + i, j - i);
    if (word == "yes") return Verdict::Correct;
    if (word == "no") return Verdict::Incorrect;
    i = j;
  }
  return Verdict::Unparseable;
}

ParsedFeedback parse_feedback(std::string_view raw) {
  ParsedFeedback out;
  out.raw = std::string(raw);
  const std::string doc = text::normalize_newlines(raw);
  const std::string_view view(doc);

  // Split into preamble + level-1/2 sections, ignoring headings inside fences.
  struct Cut {
    Line heading;
    Heading parsed;
  };
  std::vector<Cut> cuts;
  {
    std::optional<Fence> fence;
    for (const auto& line : scan_lines(view)) {
      auto content = view.substr(line.begin, line.end - line.begin);
      if (fence) {
        if (fence_close(content, *fence)) fence.reset();
        continue;
      }
      if (auto f = fence_open(content)) {
        fence = f;
        continue;
      }
      if (auto h = parse_heading(content); h && h->level <= 2) cuts.push_back({line, *h});
    }
  }

  out.preamble = std::string(view.substr(0, cuts.empty() ? view.size() : cuts.front().heading.begin));
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const auto& cut = cuts[i];
    Section section;
    section.level = cut.parsed.level;
    section.title = clean_title(cut.parsed.title);
    section.kind = classify_heading(cut.parsed.level, cut.parsed.title);
    section.heading_line = std::string(view.substr(cut.heading.begin, cut.heading.end - cut.heading.begin));
    section.has_newline = cut.heading.has_newline;
    std::size_t body_begin = cut.heading.has_newline ? cut.heading.end + 1 : cut.heading.end;
    std::size_t body_end = i + 1 < cuts.size() ? cuts[i + 1].heading.begin : view.size();
    section.body = std::string(view.substr(body_begin, body_end - body_begin));
    out.sections.push_back(std::move(section));
  }

  auto& report = out.structure;

  // A repeated schema section counts as extra; only the first is authoritative.
  std::array<const Section*, 3> primary{nullptr, nullptr, nullptr};
  auto slot = [](SectionKind k) -> int {
    switch (k) {
      case SectionKind::Explanation:
        return 0;
      case SectionKind::Issues:
        return 1;
      case SectionKind::Corrected:
        return 2;
      default:
        return -1;
    }
  };
  for (auto& section : out.sections) {
    int s = slot(section.kind);
    if (s >= 0) {
      if (primary[static_cast<std::size_t>(s)] == nullptr) {
        primary[static_cast<std::size_t>(s)] = &section;
        continue;
      }
      report.notes.push_back("duplicate section: " + section.title);
      section.kind = SectionKind::Extra;
    }
    if (section.kind == SectionKind::Extra) report.extra_sections.push_back(section.title);
  }
  static constexpr std::array<std::string_view, 3> kNames = {kExplanationSection, kIssuesSection,
                                                             kCorrectedSection};
  for (std::size_t s = 0; s < primary.size(); ++s) {
    if (primary[s] == nullptr) report.missing_sections.emplace_back(kNames[s]);
  }

  // Code fences: only the primary Corrected Version section may hold them.
  if (scan_fences(out.preamble).any_fence) report.misplaced_code = true;
  for (const auto& section : out.sections) {
    auto scan = scan_fences(section.body);
    if (&section == primary[2]) {
      if (scan.any_fence) out.corrected_code = std::move(scan.contents);
      else if (!text::trim(section.body).empty())
        report.notes.push_back("corrected version section has no fenced code block");
    } else if (scan.any_fence) {
      report.misplaced_code = true;
    }
  }

  out.verdict = extract_verdict(doc);
  {
    int decided_yes = 0;
    int decided_no = 0;
    for (auto line : text::split_lines(doc)) {
      if (!has_verdict_phrase(line)) continue;
      report.verdict_line_found = true;
      auto v = extract_verdict(line);
      if (v == Verdict::Correct) ++decided_yes;
      if (v == Verdict::Incorrect) ++decided_no;
    }
    if (decided_yes > 0 && decided_no > 0) report.notes.push_back("conflicting verdict lines; last one used");
  }

  if (primary[0] != nullptr) out.steps = list_items(primary[0]->body, ListStyle::Ordered);
  if (primary[1] != nullptr) {
    for (auto& item : list_items(primary[1]->body, ListStyle::Any)) {
      if (text::trim(item).empty()) continue;
      if (out.verdict == Verdict::Correct && is_placeholder_issue(item)) continue;
      out.issues.push_back(std::move(item));
    }
  }

  if (out.verdict == Verdict::Correct) {
    if (out.corrected_code) report.notes.push_back("corrected code present under a Correct verdict");
    if (!out.issues.empty()) report.notes.push_back("issues listed under a Correct verdict");
  }

  report.compliant = report.missing_sections.empty() && report.extra_sections.empty();
  return out;
}

std::string render_sections(const ParsedFeedback& parsed) {
  std::string out = parsed.preamble;
  auto emit = [&out](const Section& s) {
    out += s.heading_line;
    if (s.has_newline) out += '\n';
    out += s.body;
  };
  for (auto kind : {SectionKind::Feedback, SectionKind::Explanation, SectionKind::Issues,
                    SectionKind::Corrected, SectionKind::Extra}) {
    for (const auto& s : parsed.sections)
      if (s.kind == kind) emit(s);
  }
  return out;
}

std::string strip_corrected_version(std::string_view raw) {
  auto parsed = parse_feedback(raw);
  std::string out = parsed.preamble;
  for (const auto& s : parsed.sections) {
    if (classify_heading(s.level, s.title) == SectionKind::Corrected) continue;
    out += s.heading_line;
    if (s.has_newline) out += '\n';
    out += s.body;
  }
  return out;
}

bool contains_code_fence(std::string_view s) {
  return s.find("```") != std::string_view::npos || s.find("~~~") != std::string_view::npos;
}

std::string remove_code_fences(std::string_view s) {
  std::string out(s);
  // Removing one region can splice a new marker together, so repeat.
  while (contains_code_fence(out)) {
  for (std::string_view marker : {std::string_view("```"), std::string_view("~~~")}) {
    std::string next;
    std::size_t pos = 0;
    while (pos < out.size()) {
      auto open = out.find(marker, pos);
      if (open == std::string::npos) {
        next.append(out, pos, std::string::npos);
        break;
      }
      next.append(out, pos, open - pos);
      auto close = out.find(marker, open + marker.size());
      if (close == std::string::npos) break;  // unterminated: drop the rest
      pos = close + marker.size();
      while (pos < out.size() && out[pos] == marker.front()) ++pos;
    }
    out = std::move(next);
  }
  }
  return out;
}

}  // namespace ta_gate::feedback
