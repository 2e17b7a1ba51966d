#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ta_gate/error.hpp"

namespace ta_gate::corpus {

struct Exemplar {
  std::string code;
  std::string feedback;

  bool operator==(const Exemplar&) const = default;
};

struct ProblemSpec {
  std::string id;
  std::string function_name;
  std::string description;
  std::vector<std::string> asserts;
  std::vector<Exemplar> exemplars;
  double timeout_seconds = 5.0;

  bool operator==(const ProblemSpec&) const = default;
};

struct Origin {
  std::string path;
  std::optional<int> cell_index;

  bool operator==(const Origin&) const = default;
};

struct Submission {
  std::string id;
  std::string problem_id;
  std::string code;
  Origin origin;

  bool operator==(const Submission&) const = default;
};

class ManifestSyntax : public Error {
 public:
  explicit ManifestSyntax(const std::string& msg) : Error("ManifestSyntax", msg) {}
};

/// An invariant of a problem definition does not hold; `field()` names it
/// ("asserts", "exemplar.feedback", ...).
class InvalidProblem : public Error {
 public:
  InvalidProblem(std::string field, const std::string& msg)
      : Error("InvalidProblem", msg), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(const std::string& id) : Error("DuplicateId", "duplicate problem id: " + id) {}
};

class NotebookSyntax : public Error {
 public:
  explicit NotebookSyntax(const std::string& msg) : Error("NotebookSyntax", msg) {}
};

class NoDefinitionFound : public Error {
 public:
  explicit NoDefinitionFound(const std::string& msg) : Error("NoDefinitionFound", msg) {}
};

// Manifest: JSON Lines, one problem object per line. A single JSON array of
// problem objects is accepted as well. See README for the field list.
std::vector<ProblemSpec> parse_manifest(std::string_view text);
std::vector<ProblemSpec> load_manifest(const std::filesystem::path& path);
std::string serialize_manifest(const std::vector<ProblemSpec>& problems);
void save_manifest(const std::filesystem::path& path, const std::vector<ProblemSpec>& problems);

/// Throws InvalidProblem if any invariant of `problem` fails.
void validate_problem(const ProblemSpec& problem);

nlohmann::json to_json(const ProblemSpec& problem);
ProblemSpec problem_from_json(const nlohmann::json& j);

/// True if some line of `code` is a `def <name>(` (or `async def`) header.
bool defines_function(std::string_view code, std::string_view function_name);

/// `.ipynb` files are read as notebooks (last code cell defining the target
/// function wins, taken whole); anything else is a single plain source file.
std::vector<Submission> extract_submissions(const std::filesystem::path& path, const ProblemSpec& problem);

/// Notebook variant over in-memory bytes; `origin_path` is recorded as provenance.
std::vector<Submission> extract_from_notebook(std::string_view notebook_json, const ProblemSpec& problem,
                                              const std::string& origin_path);

std::string read_file(const std::filesystem::path& path);

}  // namespace ta_gate::corpus
