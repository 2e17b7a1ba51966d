#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ta_gate/feedback.hpp"
#include "ta_gate/metrics.hpp"
#include "ta_gate/sandbox.hpp"

namespace ta_gate::metrics {

/// What happened to the LLM's corrected version of a faulty submission.
struct CorrectedCodeReport {
  bool present = false;
  bool compiles = false;
  bool runtime_exception = false;
  bool asserts_ok = false;
  std::optional<Ratio> cer;  // set iff present

  bool operator==(const CorrectedCodeReport&) const = default;
};

CorrectedCodeReport make_corrected_report(std::string_view student_code, std::string_view corrected_code,
                                          const sandbox::ExecutionReport& corrected_execution);

struct EvaluationRecord {
  std::string submission_id;
  std::string problem_id;
  std::string model_id;
  sandbox::ExecutionReport execution;
  feedback::ParsedFeedback feedback;
  CorrectedCodeReport corrected;
  Cell cell = Cell::Unparseable;
  /// Provenance for resumable runs; empty when not produced by the pipeline.
  std::string request_key;

  /// Identifier that annotation files use to refer to this feedback.
  std::string feedback_id() const { return model_id + ":" + submission_id; }
};

nlohmann::json to_json(const EvaluationRecord& r);
/// Re-parses the stored raw feedback; throws RecordSyntax if the stored cell
/// disagrees with the recomputed one.
EvaluationRecord record_from_json(const nlohmann::json& j);

/// Human label for one feedback on a faulty submission.
struct AnnotationLabel {
  std::string feedback_id;
  bool one_or_more_real = false;
  bool uninvolved = false;
  bool non_existent = false;

  bool operator==(const AnnotationLabel&) const = default;
};

class AnnotationSyntax : public Error {
 public:
  explicit AnnotationSyntax(const std::string& msg) : Error("AnnotationSyntax", msg) {}
};

class ScopeViolation : public Error {
 public:
  explicit ScopeViolation(const std::string& msg) : Error("ScopeViolation", msg) {}
};

class DanglingLabel : public Error {
 public:
  explicit DanglingLabel(const std::string& msg) : Error("DanglingLabel", msg) {}
};

/// Header line `feedback_id,one_or_more_real,uninvolved,non_existent`;
/// booleans as 1/0, true/false or yes/no.
std::vector<AnnotationLabel> parse_annotations(std::string_view csv);
std::vector<AnnotationLabel> load_annotations(const std::filesystem::path& path);

struct AnnotationStats {
  std::int64_t n_faulty = 0;
  std::int64_t one_or_more = 0;
  std::int64_t uninvolved = 0;
  std::int64_t non_existent = 0;

  MaybeRatio one_or_more_frac() const { return ratio_or_undefined(one_or_more, n_faulty); }
  MaybeRatio uninvolved_frac() const { return ratio_or_undefined(uninvolved, n_faulty); }
  MaybeRatio non_existent_frac() const { return ratio_or_undefined(non_existent, uninvolved); }
};

/// Joins labels to records by feedback id. Throws DanglingLabel for an
/// unknown id, ScopeViolation for a label on an asserts-ok record.
std::vector<const AnnotationLabel*> join_labels(const std::vector<AnnotationLabel>& labels,
                                                const std::vector<EvaluationRecord>& records);

/// Fractions over all assert-failing records; non_existent over the
/// uninvolved subset. Unlabeled faulty records count as negatives.
AnnotationStats annotation_stats(const std::vector<AnnotationLabel>& labels,
                                 const std::vector<EvaluationRecord>& records);

}  // namespace ta_gate::metrics
