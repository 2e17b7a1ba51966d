#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ta_gate/corpus.hpp"
#include "ta_gate/error.hpp"

namespace ta_gate::sandbox {

enum class Outcome { Pass, CompileError, RuntimeException, AssertFailure, Timeout };

const char* to_string(Outcome o);
Outcome outcome_from_string(std::string_view s);

enum class AssertStatus { Passed, Failed, Error, NotRun };

const char* to_string(AssertStatus s);
AssertStatus assert_status_from_string(std::string_view s);

struct AssertResult {
  std::string source;
  AssertStatus status = AssertStatus::NotRun;

  bool operator==(const AssertResult&) const = default;
};

struct ExecutionReport {
  Outcome outcome = Outcome::RuntimeException;
  std::string detail;
  bool asserts_ok = false;
  /// One entry per problem assert, in manifest order. Asserts after the
  /// first failure are NotRun.
  std::vector<AssertResult> assert_results;

  bool operator==(const ExecutionReport&) const = default;
};

nlohmann::json to_json(const ExecutionReport& r);
ExecutionReport execution_from_json(const nlohmann::json& j);

/// The interpreter binary could not be located. A configuration problem,
/// never an outcome of the code under test.
class SandboxUnavailable : public Error {
 public:
  explicit SandboxUnavailable(const std::string& msg) : Error("SandboxUnavailable", msg) {}
};

struct SandboxConfig {
  /// Interpreter name or path. Empty: $TA_GATE_INTERPRETER, then "python3".
  std::string interpreter;
  /// Parent of the per-call scratch directories. Empty: the system temp dir.
  std::filesystem::path scratch_root;
  /// Maximum number of concurrently running interpreter processes.
  std::ptrdiff_t max_workers = 4;
  /// Per-process file-size and address-space limits.
  std::size_t max_file_bytes = 8u << 20;
  std::size_t max_memory_bytes = 2048u << 20;
};

/// Resolves an interpreter name against PATH; nullopt if not executable.
std::optional<std::string> resolve_interpreter(std::string_view configured);

/// The Python runner program. It loads submission.py and asserts.json from
/// its working directory, installs an audit hook denying sockets, process
/// creation and writes outside the scratch directory, then runs the asserts
/// in order. Exit codes: 0 pass, 1 assert failure, 2 runtime exception,
/// 3 syntax error in the submission, 4 malformed assert.
std::string runner_source();

class Sandbox {
 public:
  explicit Sandbox(SandboxConfig config = {});

  /// Runs `code` against the problem's asserts in a fresh interpreter
  /// process; the first failing assert decides the outcome.
  ExecutionReport execute(std::string_view code, const corpus::ProblemSpec& problem) const;

  const SandboxConfig& config() const noexcept { return config_; }
  const std::optional<std::string>& interpreter() const noexcept { return interpreter_; }

 private:
  SandboxConfig config_;
  std::optional<std::string> interpreter_;
  std::shared_ptr<std::counting_semaphore<>> slots_;
};

}  // namespace ta_gate::sandbox
