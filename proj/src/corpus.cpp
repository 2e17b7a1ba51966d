#include "ta_gate/corpus.hpp"

#include <cctype>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include "ta_gate/feedback.hpp"
#include "ta_gate/text.hpp"

namespace ta_gate::corpus {

using nlohmann::json;

namespace {

bool is_token(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    bool ok = std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-' || c == '.';
    if (!ok) return false;
  }
  return true;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s.front())) != 0) return false;
  for (char c : s) {
    if (std::isalnum(static_cast<unsigned char>(c)) == 0 && c != '_') return false;
  }
  return true;
}

const std::regex& exemplar_verdict_line() {
  static const std::regex re(
      R"(^Is the function correct according to the problem definition \[YES/NO\]\? (YES|NO)$)");
  return re;
}

[[noreturn]] void invalid(const ProblemSpec& p, const std::string& field, const std::string& why) {
  throw InvalidProblem(field, "problem '" + p.id + "': invalid " + field + ": " + why);
}

std::string stem_of(const std::filesystem::path& path) { return path.stem().string(); }

}  // namespace

void validate_problem(const ProblemSpec& p) {
  if (!is_token(p.id)) invalid(p, "id", "must be a non-empty token of [A-Za-z0-9_.-]");
  if (!is_identifier(p.function_name)) invalid(p, "function_name", "must be an identifier");
  if (p.asserts.empty()) invalid(p, "asserts", "at least one assert is required");
  for (const auto& a : p.asserts) {
    if (!text::contains_identifier(a, p.function_name))
      invalid(p, "asserts", "assert does not reference " + p.function_name + ": " + a);
  }
  if (!(p.timeout_seconds > 0.0)) invalid(p, "timeout_seconds", "must be positive");
  for (const auto& ex : p.exemplars) {
    if (text::trim(ex.code).empty()) invalid(p, "exemplar.code", "empty exemplar code");
    auto fb = text::normalize_newlines(ex.feedback);
    bool exact_line = false;
    for (auto line : text::split_lines(fb)) {
      std::string l(text::trim_right(line));
      if (std::regex_match(l, exemplar_verdict_line())) exact_line = true;
    }
    if (!exact_line) invalid(p, "exemplar.feedback", "missing the YES/NO verdict line");
    auto parsed = feedback::parse_feedback(fb);
    if (parsed.verdict == feedback::Verdict::Unparseable)
      invalid(p, "exemplar.feedback", "verdict is unparseable");
    if (!parsed.structure.compliant) invalid(p, "exemplar.feedback", "feedback sections are not compliant");
  }
}

json to_json(const ProblemSpec& p) {
  json exemplars = json::array();
  for (const auto& ex : p.exemplars) exemplars.push_back({{"code", ex.code}, {"feedback", ex.feedback}});
  return json{{"id", p.id},
              {"function_name", p.function_name},
              {"description", p.description},
              {"asserts", p.asserts},
              {"exemplars", exemplars},
              {"timeout_seconds", p.timeout_seconds}};
}

ProblemSpec problem_from_json(const json& j) {
  if (!j.is_object()) throw ManifestSyntax("problem entry is not an object");
  ProblemSpec p;
  auto str = [&](const char* key, bool required) -> std::string {
    if (!j.contains(key)) {
      if (required) throw InvalidProblem(key, std::string("missing field ") + key);
      return {};
    }
    if (!j.at(key).is_string()) throw InvalidProblem(key, std::string("field must be a string: ") + key);
    return j.at(key).get<std::string>();
  };
  p.id = str("id", true);
  p.function_name = str("function_name", true);
  p.description = str("description", false);
  if (!j.contains("asserts") || !j.at("asserts").is_array())
    throw InvalidProblem("asserts", "problem '" + p.id + "': asserts must be a list of strings");
  for (const auto& a : j.at("asserts")) {
    if (!a.is_string()) throw InvalidProblem("asserts", "problem '" + p.id + "': assert is not a string");
    p.asserts.push_back(a.get<std::string>());
  }
  if (j.contains("exemplars")) {
    if (!j.at("exemplars").is_array()) throw InvalidProblem("exemplars", "exemplars must be a list");
    for (const auto& e : j.at("exemplars")) {
      if (!e.is_object() || !e.contains("code") || !e.contains("feedback") || !e.at("code").is_string() ||
          !e.at("feedback").is_string())
        throw InvalidProblem("exemplars", "problem '" + p.id + "': exemplar needs string code and feedback");
      p.exemplars.push_back({e.at("code").get<std::string>(), e.at("feedback").get<std::string>()});
    }
  }
  if (j.contains("timeout_seconds")) {
    if (!j.at("timeout_seconds").is_number())
      throw InvalidProblem("timeout_seconds", "timeout_seconds must be a number");
    p.timeout_seconds = j.at("timeout_seconds").get<double>();
  }
  return p;
}

std::vector<ProblemSpec> parse_manifest(std::string_view text_in) {
  std::vector<json> docs;
  auto trimmed = text::trim(text_in);
  try {
    if (!trimmed.empty() && trimmed.front() == '[') {
      auto arr = json::parse(trimmed);
      for (auto& d : arr) docs.push_back(std::move(d));
    } else {
      std::size_t line_no = 0;
      for (auto line : text::split_lines(text_in)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        try {
          docs.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
          throw ManifestSyntax("manifest line " + std::to_string(line_no) + ": " + e.what());
        }
      }
    }
  } catch (const json::parse_error& e) {
    throw ManifestSyntax(e.what());
  }

  std::vector<ProblemSpec> problems;
  std::set<std::string> ids;
  for (const auto& d : docs) {
    auto p = problem_from_json(d);
    validate_problem(p);
    if (!ids.insert(p.id).second) throw DuplicateId(p.id);
    problems.push_back(std::move(p));
  }
  return problems;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IoError", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<ProblemSpec> load_manifest(const std::filesystem::path& path) {
  return parse_manifest(read_file(path));
}

std::string serialize_manifest(const std::vector<ProblemSpec>& problems) {
  std::string out;
  for (const auto& p : problems) {
    out += to_json(p).dump();
    out += '\n';
  }
  return out;
}

void save_manifest(const std::filesystem::path& path, const std::vector<ProblemSpec>& problems) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("IoError", "cannot write " + path.string());
  out << serialize_manifest(problems);
}

bool defines_function(std::string_view code, std::string_view name) {
  for (auto line : text::split_lines(code)) {
    auto t = text::trim(line);
    if (t.substr(0, 6) == "async ") t = text::trim(t.substr(6));
    if (t.substr(0, 4) != "def ") continue;
    t = text::trim(t.substr(4));
    if (t.substr(0, name.size()) != name) continue;
    t = text::trim(t.substr(name.size()));
    if (!t.empty() && t.front() == '(') return true;
  }
  return false;
}

std::vector<Submission> extract_from_notebook(std::string_view notebook_json, const ProblemSpec& problem,
                                              const std::string& origin_path) {
  json nb;
  try {
    nb = json::parse(notebook_json);
  } catch (const json::parse_error& e) {
    throw NotebookSyntax(origin_path + ": " + e.what());
  }
  if (!nb.is_object() || !nb.contains("cells") || !nb.at("cells").is_array())
    throw NotebookSyntax(origin_path + ": no cells array");

  std::optional<std::pair<int, std::string>> last;
  const auto& cells = nb.at("cells");
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& cell = cells[i];
    if (!cell.is_object() || !cell.contains("cell_type") || !cell.contains("source"))
      throw NotebookSyntax(origin_path + ": cell " + std::to_string(i) + " lacks cell_type/source");
    if (cell.at("cell_type") != "code") continue;
    std::string source;
    const auto& src = cell.at("source");
    if (src.is_string()) {
      source = src.get<std::string>();
    } else if (src.is_array()) {
      for (const auto& part : src) {
        if (!part.is_string()) throw NotebookSyntax(origin_path + ": non-string source line");
        source += part.get<std::string>();
      }
    } else {
      throw NotebookSyntax(origin_path + ": cell source must be a string or list");
    }
    if (defines_function(source, problem.function_name)) last = {static_cast<int>(i), std::move(source)};
  }
  if (!last) throw NoDefinitionFound(origin_path + ": no cell defines " + problem.function_name);

  std::filesystem::path p(origin_path);
  return {Submission{problem.id + "/" + stem_of(p), problem.id, std::move(last->second),
                     Origin{origin_path, last->first}}};
}

std::vector<Submission> extract_submissions(const std::filesystem::path& path, const ProblemSpec& problem) {
  auto bytes = read_file(path);
  if (path.extension() == ".ipynb") return extract_from_notebook(bytes, problem, path.string());
  if (text::trim(bytes).empty() || !defines_function(bytes, problem.function_name))
    throw NoDefinitionFound(path.string() + ": no definition of " + problem.function_name);
  return {Submission{problem.id + "/" + stem_of(path), problem.id, std::move(bytes), Origin{path.string(), {}}}};
}

}  // namespace ta_gate::corpus
