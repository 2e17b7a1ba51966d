#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "ta_gate/corpus.hpp"
#include "ta_gate/gateway.hpp"
#include "ta_gate/records.hpp"

namespace fixture {

inline constexpr const char* kModel = "fixture-model";
inline const nlohmann::json kParams = {{"temperature", 0}};

std::filesystem::path root();         // tests/fixtures
std::filesystem::path corpus_dir();   // tests/fixtures/corpus
std::vector<ta_gate::corpus::ProblemSpec> problems();

/// Cassette built from corpus/responses/<problem>/<stem>.md, keyed by the
/// prompt each fixture submission renders to.
ta_gate::gateway::Cassette build_cassette(const std::filesystem::path& corpus);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& p) const { return path_ / p; }

 private:
  std::filesystem::path path_;
};

/// relative path -> file bytes, for every regular file under `dir`.
std::map<std::string, std::string> read_tree(const std::filesystem::path& dir);

void write_file(const std::filesystem::path& path, const std::string& content);

/// Problem used by the 118-submission partition corpus.
ta_gate::corpus::ProblemSpec palindrome_problem();

struct SyntheticCorpus {
  std::vector<std::string> codes;
  int expected_pass = 0;
  int expected_runtime = 0;
  int expected_assert_failure = 0;
};

/// 118 submissions: 59 pass, 14 raise, 45 fail an assert.
SyntheticCorpus partition_corpus();

/// 59 assert-failing records for one model with labels 52 / 31 / 19, plus
/// 59 passing records that stay unlabeled.
struct LabeledRun {
  std::vector<ta_gate::metrics::EvaluationRecord> records;
  std::vector<ta_gate::metrics::AnnotationLabel> labels;
};
LabeledRun labeled_run(std::int64_t one_or_more, std::int64_t uninvolved, std::int64_t non_existent);

}  // namespace fixture
