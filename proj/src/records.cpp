#include "ta_gate/records.hpp"

#include <set>
#include <unordered_map>

#include "ta_gate/corpus.hpp"
#include "ta_gate/text.hpp"

namespace ta_gate::metrics {

using nlohmann::json;

CorrectedCodeReport make_corrected_report(std::string_view student_code, std::string_view corrected_code,
                                          const sandbox::ExecutionReport& corrected_execution) {
  using sandbox::Outcome;
  CorrectedCodeReport r;
  r.present = true;
  r.compiles = corrected_execution.outcome != Outcome::CompileError;
  r.runtime_exception = corrected_execution.outcome == Outcome::RuntimeException;
  r.asserts_ok = corrected_execution.asserts_ok;
  r.cer = compute_cer(student_code, corrected_code);
  return r;
}

namespace {

json structure_json(const feedback::StructureReport& s) {
  return json{{"missing_sections", s.missing_sections},
              {"extra_sections", s.extra_sections},
              {"misplaced_code", s.misplaced_code},
              {"verdict_line_found", s.verdict_line_found},
              {"compliant", s.compliant},
              {"notes", s.notes}};
}

json feedback_json(const feedback::ParsedFeedback& f) {
  json code = f.corrected_code ? json(*f.corrected_code) : json(nullptr);
  return json{{"raw", f.raw},
              {"verdict", feedback::to_string(f.verdict)},
              {"steps", f.steps},
              {"issues", f.issues},
              {"corrected_code", code},
              {"structure", structure_json(f.structure)}};
}

json corrected_json(const CorrectedCodeReport& c) {
  json cer = c.cer ? json{{"num", c.cer->num}, {"den", c.cer->den}} : json(nullptr);
  return json{{"present", c.present},
              {"compiles", c.compiles},
              {"runtime_exception", c.runtime_exception},
              {"asserts_ok", c.asserts_ok},
              {"cer", cer}};
}

[[noreturn]] void bad_record(const std::string& why) { throw Error("RecordSyntax", "malformed record: " + why); }

}  // namespace

json to_json(const EvaluationRecord& r) {
  return json{{"submission_id", r.submission_id},
              {"problem_id", r.problem_id},
              {"model_id", r.model_id},
              {"cell", to_string(r.cell)},
              {"request_key", r.request_key},
              {"execution", sandbox::to_json(r.execution)},
              {"feedback", feedback_json(r.feedback)},
              {"corrected", corrected_json(r.corrected)}};
}

EvaluationRecord record_from_json(const json& j) {
  try {
    EvaluationRecord r;
    r.submission_id = j.at("submission_id").get<std::string>();
    r.problem_id = j.at("problem_id").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    r.request_key = j.value("request_key", "");
    r.execution = sandbox::execution_from_json(j.at("execution"));
    r.feedback = feedback::parse_feedback(j.at("feedback").at("raw").get<std::string>());
    const auto& c = j.at("corrected");
    r.corrected.present = c.at("present").get<bool>();
    r.corrected.compiles = c.at("compiles").get<bool>();
    r.corrected.runtime_exception = c.at("runtime_exception").get<bool>();
    r.corrected.asserts_ok = c.at("asserts_ok").get<bool>();
    if (!c.at("cer").is_null())
      r.corrected.cer = Ratio::of(c.at("cer").at("num").get<std::int64_t>(), c.at("cer").at("den").get<std::int64_t>());
    r.cell = cell_from_string(j.at("cell").get<std::string>());
    if (r.cell != classify(r.execution, r.feedback.verdict))
      bad_record(r.submission_id + ": stored cell disagrees with execution and verdict");
    return r;
  } catch (const json::exception& e) {
    bad_record(e.what());
  }
}

namespace {

bool parse_bool(std::string_view field, std::size_t line_no) {
  auto v = text::to_lower(text::trim(field));
  if (v == "1" || v == "true" || v == "yes" || v == "y") return true;
  if (v == "0" || v == "false" || v == "no" || v == "n" || v.empty()) return false;
  throw AnnotationSyntax("line " + std::to_string(line_no) + ": not a boolean: " + std::string(field));
}

}  // namespace

std::vector<AnnotationLabel> parse_annotations(std::string_view csv) {
  auto doc = text::normalize_newlines(csv);
  auto lines = text::split_lines(doc);
  if (lines.empty()) throw AnnotationSyntax("empty annotation file");
  auto header = text::parse_csv_line(lines.front());
  for (auto& h : header) h = std::string(text::trim(h));
  const std::vector<std::string> expected = {"feedback_id", "one_or_more_real", "uninvolved", "non_existent"};
  if (header != expected) throw AnnotationSyntax("header must be: " + text::join(expected, ","));

  std::vector<AnnotationLabel> labels;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    auto f = text::parse_csv_line(lines[i]);
    if (f.size() != 4) throw AnnotationSyntax("line " + std::to_string(i + 1) + ": expected 4 fields");
    AnnotationLabel l{std::string(text::trim(f[0])), parse_bool(f[1], i + 1), parse_bool(f[2], i + 1),
                      parse_bool(f[3], i + 1)};
    if (l.feedback_id.empty()) throw AnnotationSyntax("line " + std::to_string(i + 1) + ": empty feedback_id");
    if (l.non_existent && !l.uninvolved)
      throw AnnotationSyntax("line " + std::to_string(i + 1) + ": non_existent requires uninvolved");
    if (!seen.insert(l.feedback_id).second) throw AnnotationSyntax("duplicate label for " + l.feedback_id);
    labels.push_back(std::move(l));
  }
  return labels;
}

std::vector<AnnotationLabel> load_annotations(const std::filesystem::path& path) {
  return parse_annotations(corpus::read_file(path));
}

std::vector<const AnnotationLabel*> join_labels(const std::vector<AnnotationLabel>& labels,
                                                const std::vector<EvaluationRecord>& records) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < records.size(); ++i) index.emplace(records[i].feedback_id(), i);
  std::vector<const AnnotationLabel*> joined(records.size(), nullptr);
  for (const auto& label : labels) {
    auto it = index.find(label.feedback_id);
    if (it == index.end()) throw DanglingLabel("no record for feedback id " + label.feedback_id);
    const auto& rec = records[it->second];
    if (rec.execution.asserts_ok)
      throw ScopeViolation("label " + label.feedback_id + " refers to a submission that passes its asserts");
    if (label.non_existent && !label.uninvolved)
      throw AnnotationSyntax(label.feedback_id + ": non_existent requires uninvolved");
    joined[it->second] = &label;
  }
  return joined;
}

AnnotationStats annotation_stats(const std::vector<AnnotationLabel>& labels,
                                 const std::vector<EvaluationRecord>& records) {
  auto joined = join_labels(labels, records);
  AnnotationStats s;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].execution.asserts_ok) continue;
    ++s.n_faulty;
    if (const auto* l = joined[i]) {
      s.one_or_more += l->one_or_more_real ? 1 : 0;
      s.uninvolved += l->uninvolved ? 1 : 0;
      s.non_existent += l->non_existent ? 1 : 0;
    }
  }
  return s;
}

}  // namespace ta_gate::metrics
