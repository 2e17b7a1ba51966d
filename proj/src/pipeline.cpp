#include "ta_gate/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <map>
#include <optional>
#include <thread>

#include "ta_gate/corpus.hpp"
#include "ta_gate/prompt.hpp"
#include "ta_gate/text.hpp"

namespace ta_gate::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SourceFile {
  std::size_t problem;
  fs::path path;
  std::string relative;  // "<problem_id>/<name>", used in the snapshot
};

std::vector<SourceFile> discover(const fs::path& root, const std::vector<corpus::ProblemSpec>& problems) {
  if (!fs::is_directory(root)) throw Error("IoError", "submissions directory not found: " + root.string());
  std::vector<SourceFile> files;
  for (std::size_t i = 0; i < problems.size(); ++i) {
    auto dir = root / problems[i].id;
    if (!fs::is_directory(dir)) continue;
    std::vector<fs::path> found;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      auto ext = entry.path().extension().string();
      if (ext == ".py" || ext == ".ipynb") found.push_back(entry.path());
    }
    std::sort(found.begin(), found.end());
    for (auto& p : found) files.push_back({i, p, problems[i].id + "/" + p.filename().string()});
  }
  return files;
}

std::string file_name_for(const std::string& feedback_id) {
  std::string out;
  for (char c : feedback_id) {
    bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out += keep ? c : '_';
  }
  return out + "-" + text::sha256_hex(feedback_id).substr(0, 8) + ".json";
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << content;
  if (!f) throw Error("IoError", "cannot write " + path.string());
}

template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e.kind(), e.what());
  } catch (const std::exception& e) {
    throw StageError(name, "Error", e.what());
  }
}

struct Work {
  const corpus::ProblemSpec* problem;
  corpus::Submission submission;
};

}  // namespace

json config_snapshot(const EvaluationConfig& config) {
  auto problems = corpus::load_manifest(config.manifest);
  json files = json::array();
  for (const auto& f : discover(config.submissions, problems))
    files.push_back({{"path", f.relative}, {"sha256", text::sha256_hex(corpus::read_file(f.path))}});
  return json{{"manifest_sha256", text::sha256_hex(corpus::read_file(config.manifest))},
              {"submissions", files},
              {"model_id", config.model_id},
              {"mode", gateway::to_string(config.mode)},
              {"params", config.params}};
}

metrics::EvaluationRecord evaluate_one(const corpus::ProblemSpec& problem, const corpus::Submission& submission,
                                       const sandbox::Sandbox& sandbox, gateway::Gateway& gw,
                                       const std::string& model_id, const json& params) {
  metrics::EvaluationRecord r;
  r.submission_id = submission.id;
  r.problem_id = problem.id;
  r.model_id = model_id;
  gateway::CompletionRequest request{model_id, stage("prompt", [&] { return prompt::render_prompt(problem, submission); }),
                                     params};
  r.request_key = request.key();
  r.execution = stage("execute", [&] { return sandbox.execute(submission.code, problem); });
  auto text = stage("complete", [&] { return gw.complete(request); });
  r.feedback = feedback::parse_feedback(text);
  if (r.feedback.verdict == feedback::Verdict::Incorrect && r.feedback.corrected_code) {
    auto cv = stage("execute_corrected", [&] { return sandbox.execute(*r.feedback.corrected_code, problem); });
    r.corrected = metrics::make_corrected_report(submission.code, *r.feedback.corrected_code, cv);
  }
  r.cell = metrics::classify(r.execution, r.feedback.verdict);
  return r;
}

std::string errors_csv(const std::vector<ErrorRow>& errors) {
  std::string out = "problem_id,submission_id,stage,kind,message\n";
  for (const auto& e : errors) {
    out += text::join(std::vector<std::string>{text::csv_escape(e.problem_id), text::csv_escape(e.submission_id),
                                               text::csv_escape(e.stage), text::csv_escape(e.kind),
                                               text::csv_escape(e.message)},
                      ",");
    out += '\n';
  }
  return out;
}

namespace {

// request_key -> record, from a previous run in the same output directory.
std::map<std::string, metrics::EvaluationRecord> previous_records(const fs::path& records_dir) {
  std::map<std::string, metrics::EvaluationRecord> out;
  auto index_path = records_dir / "index.json";
  if (!fs::exists(index_path)) return out;
  try {
    auto index = json::parse(corpus::read_file(index_path));
    for (const auto& e : index) {
      auto file = records_dir / e.at("file").get<std::string>();
      if (!fs::exists(file)) continue;  // missing record: recompute
      auto rec = metrics::record_from_json(json::parse(corpus::read_file(file)));
      if (!rec.request_key.empty() && rec.request_key == e.value("request_key", "")) out.emplace(rec.request_key, rec);
    }
  } catch (const std::exception&) {
    out.clear();  // unreadable index: recompute everything
  }
  return out;
}

}  // namespace

RunResult run_evaluation(const EvaluationConfig& config, std::shared_ptr<gateway::Provider> provider) {
  auto problems = corpus::load_manifest(config.manifest);
  auto files = discover(config.submissions, problems);
  if (files.empty()) throw metrics::EmptyInput("no submissions under " + config.submissions.string());

  std::shared_ptr<gateway::Cassette> cassette;
  if (config.mode == gateway::Mode::Replay && !fs::exists(config.cassette))
    throw Error("ConfigError", "replay mode needs an existing cassette: " + config.cassette.string());
  if (config.mode != gateway::Mode::Live) cassette = std::make_shared<gateway::Cassette>(config.cassette);
  if (config.mode != gateway::Mode::Replay && !provider)
    provider = std::make_shared<gateway::ChatCompletionProvider>(gateway::ChatProviderConfig::from_env());

  auto sandbox_config = config.sandbox;
  sandbox_config.max_workers = static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, config.workers));
  sandbox::Sandbox sandbox(sandbox_config);
  if (!sandbox.interpreter())
    throw sandbox::SandboxUnavailable("interpreter not found: " +
                                      (config.sandbox.interpreter.empty() ? "python3" : config.sandbox.interpreter));
  gateway::Gateway gw(config.mode, provider, cassette, config.retry,
                      static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, config.workers)));

  RunResult result;
  auto& run = result.run;
  run.config_snapshot = config_snapshot(config);
  run.run_id = text::sha256_hex(run.config_snapshot.dump() + "\n" + (cassette ? cassette->digest() : ""));

  std::vector<Work> work;
  for (const auto& f : files) {
    const auto& problem = problems[f.problem];
    try {
      for (auto& s : corpus::extract_submissions(f.path, problem)) work.push_back({&problem, std::move(s)});
    } catch (const Error& e) {
      run.errors.push_back({problem.id, problem.id + "/" + f.path.stem().string(), "extract", e.kind(), e.what()});
    }
  }

  const auto records_dir = config.out / "records";
  std::map<std::string, metrics::EvaluationRecord> reusable;
  if (config.resume) reusable = previous_records(records_dir);

  std::vector<std::optional<metrics::EvaluationRecord>> slots(work.size());
  std::vector<std::optional<ErrorRow>> failures(work.size());
  const std::size_t n_workers = std::clamp<std::size_t>(config.workers, 1, std::max<std::size_t>(1, work.size()));
  std::vector<metrics::Report> partial(n_workers);
  std::atomic<std::size_t> next{0};
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = next++; i < work.size(); i = next++) {
          const auto& item = work[i];
          try {
            if (!reusable.empty()) {
              gateway::CompletionRequest request{config.model_id, prompt::render_prompt(*item.problem, item.submission),
                                                 config.params};
              if (auto it = reusable.find(request.key()); it != reusable.end()) {
                slots[i] = it->second;
                partial[w].add(*slots[i], nullptr);
                continue;
              }
            }
            slots[i] = evaluate_one(*item.problem, item.submission, sandbox, gw, config.model_id, config.params);
            partial[w].add(*slots[i], nullptr);
          } catch (const StageError& e) {
            failures[i] = ErrorRow{item.problem->id, item.submission.id, e.stage(), e.inner_kind(), e.what()};
          } catch (const std::exception& e) {
            failures[i] = ErrorRow{item.problem->id, item.submission.id, "evaluate", "Error", e.what()};
          }
        }
      });
    }
  }

  for (std::size_t i = 0; i < work.size(); ++i) {
    if (slots[i]) run.records.push_back(std::move(*slots[i]));
    if (failures[i]) run.errors.push_back(std::move(*failures[i]));
  }
  std::sort(run.errors.begin(), run.errors.end());
  for (const auto& p : partial) result.report.merge(p);

  // Persist. The records directory is rewritten in full so stale files from
  // an earlier run never leak into a later `report`.
  fs::create_directories(config.out);
  fs::remove_all(records_dir);
  fs::create_directories(records_dir);
  json index = json::array();
  for (const auto& r : run.records) {
    auto file = file_name_for(r.feedback_id());
    write_text(records_dir / file, metrics::to_json(r).dump(2) + "\n");
    index.push_back({{"feedback_id", r.feedback_id()},
                     {"problem_id", r.problem_id},
                     {"submission_id", r.submission_id},
                     {"file", file},
                     {"request_key", r.request_key}});
  }
  write_text(records_dir / "index.json", index.dump(2) + "\n");
  write_text(config.out / "errors.csv", errors_csv(run.errors));
  fs::remove_all(config.out / "report");
  if (!run.records.empty()) metrics::write_report(result.report, config.out / "report");
  json meta{{"run_id", run.run_id},
            {"config_snapshot", run.config_snapshot},
            {"cassette_sha256", cassette ? cassette->digest() : ""},
            {"records", run.records.size()},
            {"errors", run.errors.size()}};
  write_text(config.out / "run.meta", meta.dump(2) + "\n");
  return result;
}

std::vector<metrics::EvaluationRecord> load_records(const fs::path& dir) {
  auto records_dir = fs::exists(dir / "records" / "index.json") ? dir / "records" : dir;
  auto index_path = records_dir / "index.json";
  if (!fs::exists(index_path)) throw Error("IoError", "no records index in " + dir.string());
  std::vector<metrics::EvaluationRecord> out;
  json index;
  try {
    index = json::parse(corpus::read_file(index_path));
  } catch (const json::exception& e) {
    throw Error("RecordSyntax", "malformed records index: " + std::string(e.what()));
  }
  for (const auto& e : index) {
    auto file = records_dir / e.at("file").get<std::string>();
    try {
      out.push_back(metrics::record_from_json(json::parse(corpus::read_file(file))));
    } catch (const json::exception& ex) {
      throw Error("RecordSyntax", file.string() + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace ta_gate::pipeline
