#include "fixture.hpp"

#include <fstream>
#include <random>

#include "ta_gate/feedback.hpp"
#include "ta_gate/prompt.hpp"

namespace fixture {

namespace fs = std::filesystem;
using namespace ta_gate;

fs::path root() { return TA_GATE_FIXTURES; }
fs::path corpus_dir() { return root() / "corpus"; }

std::vector<corpus::ProblemSpec> problems() { return corpus::load_manifest(corpus_dir() / "manifest.jsonl"); }

gateway::Cassette build_cassette(const fs::path& dir) {
  gateway::Cassette cassette;
  for (const auto& problem : corpus::load_manifest(dir / "manifest.jsonl")) {
    auto sub_dir = dir / "submissions" / problem.id;
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(sub_dir)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      for (const auto& s : corpus::extract_submissions(file, problem)) {
        auto response = dir / "responses" / problem.id / (file.stem().string() + ".md");
        gateway::CompletionRequest req{kModel, prompt::render_prompt(problem, s), kParams};
        cassette.put({req.key(), kModel, kParams, req.prompt.text, corpus::read_file(response),
                      "2024-01-01T00:00:00Z"});
      }
    }
  }
  return cassette;
}

TempDir::TempDir() {
  auto pattern = (fs::temp_directory_path() / "ta-gate-test-XXXXXX").string();
  std::vector<char> buf(pattern.begin(), pattern.end());
  buf.push_back('\0');
  if (::mkdtemp(buf.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
  path_ = buf.data();
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = corpus::read_file(e.path());
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << content;
}

corpus::ProblemSpec palindrome_problem() {
  for (auto& p : problems())
    if (p.id == "P1") return p;
  throw std::runtime_error("fixture manifest has no P1");
}

SyntheticCorpus partition_corpus() {
  SyntheticCorpus c;
  const char* correct[] = {
      "def rotated_palindrome(s):\n    for i in range(len(s)):\n        r = s[i:] + s[:i]\n"
      "        if r == r[::-1]:\n            return True\n    return False\n",
      "def rotated_palindrome(s):\n    return any((s[i:] + s[:i]) == (s[i:] + s[:i])[::-1] for i in range(len(s)))\n",
      "def rotated_palindrome(s):\n    t = s\n    for _ in range(len(s)):\n        if t == t[::-1]:\n"
      "            return True\n        t = t[-1] + t[:-1]\n    return False\n",
  };
  const char* raising[] = {
      "def rotated_palindrome(s):\n    return s[len(s)] == s[0]\n",
      "def rotated_palindrome(s):\n    return undefined_name(s)\n",
      "def rotated_palindrome(s):\n    return len(s) / 0 > 1\n",
      "def rotated_palindrome(s):\n    return s + 1\n",
  };
  const char* failing[] = {
      "def rotated_palindrome(s):\n    return s == s[::-1]\n",
      "def rotated_palindrome(s):\n    return True\n",
      "def rotated_palindrome(s):\n    return len(s) > 2\n",
      "def rotated_palindrome(s):\n    r = s[-1:] + s[:-1]\n    return r == r[::-1]\n",
      "def rotated_palindrome(s):\n    return False\n",
  };
  auto variant = [](const char* code, int i) { return "# variant " + std::to_string(i) + "\n" + code; };
  for (int i = 0; i < 59; ++i) c.codes.push_back(variant(correct[i % 3], i));
  for (int i = 0; i < 14; ++i) c.codes.push_back(variant(raising[i % 4], i));
  for (int i = 0; i < 45; ++i) c.codes.push_back(variant(failing[i % 5], i));
  c.expected_pass = 59;
  c.expected_runtime = 14;
  c.expected_assert_failure = 45;
  return c;
}

LabeledRun labeled_run(std::int64_t one_or_more, std::int64_t uninvolved, std::int64_t non_existent) {
  static const std::string incorrect =
      "# Feedback\n\n## Brief Code Explanation\n\n1. It checks one rotation.\n\n"
      "Is the function correct according to the problem definition [YES/NO]? NO\n\n"
      "## Main Issues\n\n- Only one rotation is checked.\n\n## Corrected Version\n";
  static const std::string correct =
      "# Feedback\n\n## Brief Code Explanation\n\n1. It checks every rotation.\n\n"
      "Is the function correct according to the problem definition [YES/NO]? YES\n\n"
      "## Main Issues\n\n## Corrected Version\n";
  LabeledRun run;
  for (int i = 0; i < 118; ++i) {
    metrics::EvaluationRecord r;
    r.problem_id = "P1";
    r.model_id = "gpt-4-turbo";
    r.submission_id = "P1/s" + std::to_string(1000 + i);
    bool ok = i >= 59;
    r.execution.outcome = ok ? sandbox::Outcome::Pass : sandbox::Outcome::AssertFailure;
    r.execution.asserts_ok = ok;
    r.feedback = feedback::parse_feedback(ok ? correct : incorrect);
    r.cell = metrics::classify(r.execution, r.feedback.verdict);
    run.records.push_back(std::move(r));
  }
  // Spread the three flags so that they overlap without nesting.
  for (std::int64_t i = 0; i < 59; ++i) {
    metrics::AnnotationLabel l;
    l.feedback_id = run.records[static_cast<std::size_t>(i)].feedback_id();
    l.one_or_more_real = i < one_or_more;
    l.uninvolved = i >= 59 - uninvolved;
    l.non_existent = l.uninvolved && i >= 59 - non_existent;
    run.labels.push_back(l);
  }
  return run;
}

}  // namespace fixture
