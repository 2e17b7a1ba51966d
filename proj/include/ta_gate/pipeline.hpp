#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "ta_gate/gateway.hpp"
#include "ta_gate/records.hpp"
#include "ta_gate/report.hpp"
#include "ta_gate/sandbox.hpp"

namespace ta_gate::pipeline {

struct EvaluationConfig {
  std::filesystem::path manifest;
  /// <dir>/<problem_id>/*.py|*.ipynb
  std::filesystem::path submissions;
  std::filesystem::path cassette;
  std::filesystem::path out;
  std::string model_id;
  gateway::Mode mode = gateway::Mode::Replay;
  nlohmann::json params = nlohmann::json::object();
  std::size_t workers = 4;
  bool resume = false;
  sandbox::SandboxConfig sandbox;
  gateway::RetryPolicy retry;
};

/// A (problem, submission) pair that produced no record.
struct ErrorRow {
  std::string problem_id;
  std::string submission_id;
  std::string stage;  // extract, execute, prompt, complete, execute_corrected
  std::string kind;
  std::string message;

  bool operator==(const ErrorRow&) const = default;
  auto operator<=>(const ErrorRow&) const = default;
};

struct RunRecordSet {
  std::string run_id;
  std::vector<metrics::EvaluationRecord> records;
  nlohmann::json config_snapshot;
  std::vector<ErrorRow> errors;
};

struct RunResult {
  RunRecordSet run;
  metrics::Report report;
};

/// Results-affecting configuration only: input digests, model, mode and
/// params. Paths, worker count and the output directory are left out so
/// that identical inputs give the same run_id.
nlohmann::json config_snapshot(const EvaluationConfig& config);

/// Evaluates every submission, writes records/, report/, errors.csv and
/// run.meta under config.out. `provider` is needed for live and record
/// modes; when null, a chat-completion provider configured from the
/// environment is used.
RunResult run_evaluation(const EvaluationConfig& config, std::shared_ptr<gateway::Provider> provider = nullptr);

/// One pair, start to finish. Throws with the failing stage in StageError.
metrics::EvaluationRecord evaluate_one(const corpus::ProblemSpec& problem, const corpus::Submission& submission,
                                       const sandbox::Sandbox& sandbox, gateway::Gateway& gateway,
                                       const std::string& model_id, const nlohmann::json& params);

class StageError : public Error {
 public:
  StageError(std::string stage, std::string inner_kind, const std::string& msg)
      : Error("StageError", msg), stage_(std::move(stage)), inner_kind_(std::move(inner_kind)) {}
  const std::string& stage() const noexcept { return stage_; }
  const std::string& inner_kind() const noexcept { return inner_kind_; }

 private:
  std::string stage_;
  std::string inner_kind_;
};

/// Reads the records written by run_evaluation. Accepts either the run
/// directory or its records/ subdirectory.
std::vector<metrics::EvaluationRecord> load_records(const std::filesystem::path& dir);

std::string errors_csv(const std::vector<ErrorRow>& errors);

}  // namespace ta_gate::pipeline
