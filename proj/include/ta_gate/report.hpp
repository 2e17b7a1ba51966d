#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ta_gate/records.hpp"

namespace ta_gate::metrics {

using GroupKey = std::pair<std::string, std::string>;  // (problem_id, model_id)

/// Mergeable per-(problem, model) counts. Every field is a plain sum, so
/// add() and merge() commute and associate.
struct GroupStats {
  // submissions
  std::int64_t total = 0;
  std::int64_t runtime_exceptions = 0;
  std::int64_t compile_errors = 0;
  std::int64_t timeouts = 0;
  std::int64_t assert_failures = 0;
  std::int64_t asserts_ok = 0;
  std::int64_t asserts_not_ok = 0;
  // verdicts
  ConfusionMatrix cm;
  std::int64_t unparseable = 0;
  // corrected versions
  std::int64_t cv_present = 0;
  std::int64_t cv_compiles = 0;
  std::int64_t cv_runtime = 0;
  std::int64_t cv_asserts_ok = 0;
  boost::multiprecision::cpp_rational cer_sum = 0;
  // structure
  std::int64_t misplaced_code = 0;
  std::int64_t missing_sections = 0;
  std::int64_t extra_sections = 0;
  std::int64_t compliant = 0;
  // annotations, over faulty submissions
  std::int64_t labeled = 0;
  AnnotationStats annotations;
  // cross-tab of labels by corrected-version outcome; [0] CV passes, [1] CV fails
  std::array<AnnotationStats, 2> by_cv{};

  void add(const EvaluationRecord& record, const AnnotationLabel* label);
  GroupStats& merge(const GroupStats& other);
  bool operator==(const GroupStats& other) const;
};

struct Report {
  std::map<GroupKey, GroupStats> groups;
  bool annotated = false;

  void add(const EvaluationRecord& record, const AnnotationLabel* label);
  Report& merge(const Report& other);
  bool operator==(const Report& other) const;
};

class EmptyInput : public Error {
 public:
  explicit EmptyInput(const std::string& msg) : Error("EmptyInput", msg) {}
};

/// Folds records (joined with optional labels) into per-group tables.
Report build_report(const std::vector<EvaluationRecord>& records,
                    const std::vector<AnnotationLabel>* labels = nullptr);

/// Table name -> CSV text. Tables: general, classification, corrected,
/// structure, operational; plus annotations and cv_crosstab when annotated.
std::map<std::string, std::string> render_tables(const Report& report);
nlohmann::json summary_json(const Report& report);

/// Writes <name>.csv for every table plus summary.json into `dir`.
void write_report(const Report& report, const std::filesystem::path& dir);

}  // namespace ta_gate::metrics
