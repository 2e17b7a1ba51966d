#include "ta_gate/report.hpp"

#include <fstream>
#include <sstream>
#include <tuple>

#include "ta_gate/text.hpp"

namespace ta_gate::metrics {

using nlohmann::json;
using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

namespace {

void add_stats(AnnotationStats& into, const AnnotationStats& from) {
  into.n_faulty += from.n_faulty;
  into.one_or_more += from.one_or_more;
  into.uninvolved += from.uninvolved;
  into.non_existent += from.non_existent;
}

auto stats_tie(const AnnotationStats& s) { return std::tie(s.n_faulty, s.one_or_more, s.uninvolved, s.non_existent); }

auto counts_tie(const GroupStats& g) {
  return std::tie(g.total, g.runtime_exceptions, g.compile_errors, g.timeouts, g.assert_failures, g.asserts_ok,
                  g.asserts_not_ok, g.cm, g.unparseable, g.cv_present, g.cv_compiles, g.cv_runtime,
                  g.cv_asserts_ok, g.cer_sum, g.misplaced_code, g.missing_sections, g.extra_sections, g.compliant,
                  g.labeled);
}

std::string pct(std::int64_t num, std::int64_t den) { return percent_or_na(ratio_or_undefined(num, den)); }

std::string mean_cer_percent(const GroupStats& g) {
  if (g.cv_present == 0) return "NA";
  cpp_rational mean = g.cer_sum / g.cv_present;
  cpp_int n = boost::multiprecision::numerator(mean);
  cpp_int d = boost::multiprecision::denominator(mean);
  cpp_int tenths = (2 * n * 1000 + d) / (2 * d);
  cpp_int whole = tenths / 10;
  cpp_int frac = tenths % 10;
  return whole.str() + "." + frac.str();
}

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) { row(header); }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << text::csv_escape(fields[i]);
    }
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

std::string s(std::int64_t v) { return std::to_string(v); }

}  // namespace

void GroupStats::add(const EvaluationRecord& record, const AnnotationLabel* label) {
  using sandbox::Outcome;
  ++total;
  switch (record.execution.outcome) {
    case Outcome::RuntimeException:
      ++runtime_exceptions;
      break;
    case Outcome::CompileError:
      ++compile_errors;
      break;
    case Outcome::Timeout:
      ++timeouts;
      break;
    case Outcome::AssertFailure:
      ++assert_failures;
      break;
    case Outcome::Pass:
      break;
  }
  if (record.execution.asserts_ok) ++asserts_ok;
  else ++asserts_not_ok;

  switch (classify(record.execution, record.feedback.verdict)) {
    case Cell::TP:
      ++cm.tp;
      break;
    case Cell::FN:
      ++cm.fn;
      break;
    case Cell::FP:
      ++cm.fp;
      break;
    case Cell::TN:
      ++cm.tn;
      break;
    case Cell::Unparseable:
      ++unparseable;
      break;
  }

  const auto& cv = record.corrected;
  if (cv.present) {
    ++cv_present;
    cv_compiles += cv.compiles ? 1 : 0;
    cv_runtime += cv.runtime_exception ? 1 : 0;
    cv_asserts_ok += cv.asserts_ok ? 1 : 0;
    if (cv.cer) cer_sum += cpp_rational(cv.cer->num, cv.cer->den);
  }

  const auto& st = record.feedback.structure;
  misplaced_code += st.misplaced_code ? 1 : 0;
  missing_sections += st.missing_sections.empty() ? 0 : 1;
  extra_sections += st.extra_sections.empty() ? 0 : 1;
  compliant += st.compliant ? 1 : 0;

  if (!record.execution.asserts_ok) {
    AnnotationStats one;
    one.n_faulty = 1;
    if (label != nullptr) {
      ++labeled;
      one.one_or_more = label->one_or_more_real ? 1 : 0;
      one.uninvolved = label->uninvolved ? 1 : 0;
      one.non_existent = label->non_existent ? 1 : 0;
    }
    add_stats(annotations, one);
    if (cv.present) add_stats(by_cv[cv.asserts_ok ? 0 : 1], one);
  }
}

GroupStats& GroupStats::merge(const GroupStats& o) {
  total += o.total;
  runtime_exceptions += o.runtime_exceptions;
  compile_errors += o.compile_errors;
  timeouts += o.timeouts;
  assert_failures += o.assert_failures;
  asserts_ok += o.asserts_ok;
  asserts_not_ok += o.asserts_not_ok;
  cm += o.cm;
  unparseable += o.unparseable;
  cv_present += o.cv_present;
  cv_compiles += o.cv_compiles;
  cv_runtime += o.cv_runtime;
  cv_asserts_ok += o.cv_asserts_ok;
  cer_sum += o.cer_sum;
  misplaced_code += o.misplaced_code;
  missing_sections += o.missing_sections;
  extra_sections += o.extra_sections;
  compliant += o.compliant;
  labeled += o.labeled;
  add_stats(annotations, o.annotations);
  add_stats(by_cv[0], o.by_cv[0]);
  add_stats(by_cv[1], o.by_cv[1]);
  return *this;
}

bool GroupStats::operator==(const GroupStats& o) const {
  return counts_tie(*this) == counts_tie(o) && stats_tie(annotations) == stats_tie(o.annotations) &&
         stats_tie(by_cv[0]) == stats_tie(o.by_cv[0]) && stats_tie(by_cv[1]) == stats_tie(o.by_cv[1]);
}

void Report::add(const EvaluationRecord& record, const AnnotationLabel* label) {
  groups[{record.problem_id, record.model_id}].add(record, label);
}

Report& Report::merge(const Report& other) {
  for (const auto& [key, stats] : other.groups) groups[key].merge(stats);
  annotated = annotated || other.annotated;
  return *this;
}

bool Report::operator==(const Report& other) const {
  return annotated == other.annotated && groups == other.groups;
}

Report build_report(const std::vector<EvaluationRecord>& records, const std::vector<AnnotationLabel>* labels) {
  if (records.empty()) throw EmptyInput("no evaluation records");
  Report report;
  std::vector<const AnnotationLabel*> joined(records.size(), nullptr);
  if (labels != nullptr) {
    joined = join_labels(*labels, records);
    report.annotated = true;
  }
  for (std::size_t i = 0; i < records.size(); ++i) report.add(records[i], joined[i]);
  return report;
}

std::map<std::string, std::string> render_tables(const Report& report) {
  Csv general({"problem_id", "model_id", "total", "runtime_ex", "runtime_ex_pct", "compile_errors", "timeouts",
               "assert_failures", "asserts_ok", "asserts_ok_pct", "asserts_not_ok", "asserts_not_ok_pct"});
  Csv classification({"problem_id", "model_id", "tp", "fn", "fp", "tn", "unparseable", "accuracy_pct",
                      "sensitivity_pct", "specificity_pct"});
  Csv corrected({"problem_id", "model_id", "cv_present", "compile", "compile_pct", "runtime_ex", "runtime_ex_pct",
                 "asserts_ok", "asserts_ok_pct", "mean_cer_pct"});
  Csv structure({"problem_id", "model_id", "feedbacks", "misplaced_code", "misplaced_code_pct", "missing_sections",
                 "missing_sections_pct", "extra_sections", "extra_sections_pct", "correct_structure",
                 "correct_structure_pct"});
  std::vector<std::string> op_header = {"problem_id", "model_id", "classified", "tn", "fp", "manual_eval_pct",
                                        "erroneous_lower_bound_pct"};
  if (report.annotated) op_header.push_back("erroneous_pct");
  Csv operational(op_header);
  Csv annotations({"problem_id", "model_id", "n_faulty", "labeled", "one_or_more", "one_or_more_pct", "uninvolved",
                   "uninvolved_pct", "non_existent", "non_existent_pct"});
  Csv crosstab({"problem_id", "model_id", "cv_outcome", "n", "one_or_more", "one_or_more_pct", "uninvolved",
                "uninvolved_pct"});

  for (const auto& [key, g] : report.groups) {
    const auto& [problem, model] = key;
    general.row({problem, model, s(g.total), s(g.runtime_exceptions), pct(g.runtime_exceptions, g.total),
                 s(g.compile_errors), s(g.timeouts), s(g.assert_failures), s(g.asserts_ok), pct(g.asserts_ok, g.total),
                 s(g.asserts_not_ok), pct(g.asserts_not_ok, g.total)});
    auto m = compute_metrics(g.cm);
    classification.row({problem, model, s(g.cm.tp), s(g.cm.fn), s(g.cm.fp), s(g.cm.tn), s(g.unparseable),
                        percent_or_na(m.accuracy), percent_or_na(m.sensitivity), percent_or_na(m.specificity)});
    corrected.row({problem, model, s(g.cv_present), s(g.cv_compiles), pct(g.cv_compiles, g.cv_present),
                   s(g.cv_runtime), pct(g.cv_runtime, g.cv_present), s(g.cv_asserts_ok),
                   pct(g.cv_asserts_ok, g.cv_present), mean_cer_percent(g)});
    structure.row({problem, model, s(g.total), s(g.misplaced_code), pct(g.misplaced_code, g.total),
                   s(g.missing_sections), pct(g.missing_sections, g.total), s(g.extra_sections),
                   pct(g.extra_sections, g.total), s(g.compliant), pct(g.compliant, g.total)});
    std::vector<std::string> op = {problem, model, s(g.cm.total()), s(g.cm.tn), s(g.cm.fp),
                                   pct(g.cm.tn, g.cm.total()), pct(g.cm.fp, g.cm.fp + g.cm.tn)};
    if (report.annotated) {
      const auto& a = g.annotations;
      op.push_back(pct(a.n_faulty - a.one_or_more, a.n_faulty));
    }
    operational.row(op);
    if (report.annotated) {
      const auto& a = g.annotations;
      annotations.row({problem, model, s(a.n_faulty), s(g.labeled), s(a.one_or_more),
                       percent_or_na(a.one_or_more_frac()), s(a.uninvolved), percent_or_na(a.uninvolved_frac()),
                       s(a.non_existent), percent_or_na(a.non_existent_frac())});
      for (int cv = 0; cv < 2; ++cv) {
        const auto& b = g.by_cv[static_cast<std::size_t>(cv)];
        crosstab.row({problem, model, cv == 0 ? "cv_asserts_ok" : "cv_asserts_not_ok", s(b.n_faulty),
                      s(b.one_or_more), percent_or_na(b.one_or_more_frac()), s(b.uninvolved),
                      percent_or_na(b.uninvolved_frac())});
      }
    }
  }

  std::map<std::string, std::string> tables = {{"general", general.str()},
                                               {"classification", classification.str()},
                                               {"corrected", corrected.str()},
                                               {"structure", structure.str()},
                                               {"operational", operational.str()}};
  if (report.annotated) {
    tables["annotations"] = annotations.str();
    tables["cv_crosstab"] = crosstab.str();
  }
  return tables;
}

json summary_json(const Report& report) {
  json groups = json::array();
  std::int64_t records = 0;
  for (const auto& [key, g] : report.groups) {
    records += g.total;
    auto m = compute_metrics(g.cm);
    json counts = {{"total", g.total},
                   {"runtime_exceptions", g.runtime_exceptions},
                   {"compile_errors", g.compile_errors},
                   {"timeouts", g.timeouts},
                   {"assert_failures", g.assert_failures},
                   {"asserts_ok", g.asserts_ok},
                   {"asserts_not_ok", g.asserts_not_ok},
                   {"tp", g.cm.tp},
                   {"fn", g.cm.fn},
                   {"fp", g.cm.fp},
                   {"tn", g.cm.tn},
                   {"unparseable", g.unparseable},
                   {"cv_present", g.cv_present},
                   {"cv_compiles", g.cv_compiles},
                   {"cv_runtime_exceptions", g.cv_runtime},
                   {"cv_asserts_ok", g.cv_asserts_ok},
                   {"misplaced_code", g.misplaced_code},
                   {"missing_sections", g.missing_sections},
                   {"extra_sections", g.extra_sections},
                   {"correct_structure", g.compliant}};
    json ratios = {{"accuracy", to_json(m.accuracy)},
                   {"sensitivity", to_json(m.sensitivity)},
                   {"specificity", to_json(m.specificity)},
                   {"manual_eval_fraction", to_json(ratio_or_undefined(g.cm.tn, g.cm.total()))},
                   {"erroneous_lower_bound", to_json(ratio_or_undefined(g.cm.fp, g.cm.fp + g.cm.tn))},
                   {"mean_cer_percent", mean_cer_percent(g)}};
    json entry = {{"problem_id", key.first}, {"model_id", key.second}, {"counts", counts}, {"ratios", ratios}};
    if (report.annotated) {
      const auto& a = g.annotations;
      entry["annotations"] = {{"n_faulty", a.n_faulty},
                              {"labeled", g.labeled},
                              {"one_or_more", to_json(a.one_or_more_frac())},
                              {"uninvolved", to_json(a.uninvolved_frac())},
                              {"non_existent", to_json(a.non_existent_frac())},
                              {"erroneous", to_json(ratio_or_undefined(a.n_faulty - a.one_or_more, a.n_faulty))}};
    }
    groups.push_back(std::move(entry));
  }
  return json{{"records", records}, {"annotated", report.annotated}, {"groups", groups}};
}

void write_report(const Report& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, csv] : render_tables(report)) {
    std::ofstream out(dir / (name + ".csv"), std::ios::binary | std::ios::trunc);
    out << csv;
    if (!out) throw Error("IoError", "cannot write report table " + name);
  }
  std::ofstream out(dir / "summary.json", std::ios::binary | std::ios::trunc);
  out << summary_json(report).dump(2) << '\n';
  if (!out) throw Error("IoError", "cannot write summary.json");
}

}  // namespace ta_gate::metrics
