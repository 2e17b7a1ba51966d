#include <csignal>
#include <iostream>

#include "CLI11.hpp"
#include "httplib.h"
#include "ta_gate/gating.hpp"
#include "ta_gate/pipeline.hpp"

namespace {

using namespace ta_gate;

nlohmann::json parse_params(const std::string& s) {
  if (s.empty()) return nlohmann::json::object();
  auto j = nlohmann::json::parse(s);
  if (!j.is_object()) throw Error("ConfigError", "--params must be a JSON object");
  return j;
}

httplib::Server* g_server = nullptr;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grounded LLM feedback for programming assignments"};
  app.set_config("--config", "", "TOML/INI file with default flag values");
  app.require_subcommand(1);

  // evaluate
  pipeline::EvaluationConfig eval;
  std::string eval_mode = "replay";
  std::string eval_params;
  std::string interpreter;
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a submissions corpus");
  evaluate->add_option("--manifest", eval.manifest, "Problem manifest (JSONL)")->required()->envname("TA_GATE_MANIFEST");
  evaluate->add_option("--submissions", eval.submissions, "Directory of <problem_id>/ subdirectories")
      ->required()
      ->envname("TA_GATE_SUBMISSIONS");
  evaluate->add_option("--model", eval.model_id, "Model identifier")->required()->envname("TA_GATE_MODEL");
  evaluate->add_option("--mode", eval_mode, "live, record or replay")
      ->check(CLI::IsMember({"live", "record", "replay"}))
      ->envname("TA_GATE_MODE");
  evaluate->add_option("--cassette", eval.cassette, "Cassette file (JSONL)")->envname("TA_GATE_CASSETTE");
  evaluate->add_option("--out", eval.out, "Output directory")->required()->envname("TA_GATE_OUT");
  evaluate->add_option("--workers", eval.workers, "Worker limit")->envname("TA_GATE_WORKERS");
  evaluate->add_option("--params", eval_params, "Sampling parameters as a JSON object")->envname("TA_GATE_PARAMS");
  evaluate->add_option("--interpreter", interpreter, "Python interpreter")->envname("TA_GATE_INTERPRETER");
  evaluate->add_flag("--resume", eval.resume, "Reuse records from a previous run in --out");

  // report
  std::filesystem::path records_dir, annotations, report_out;
  auto* report = app.add_subcommand("report", "Rebuild report tables from stored records");
  report->add_option("--records", records_dir, "Run or records directory")->required()->envname("TA_GATE_RECORDS");
  report->add_option("--annotations", annotations, "Annotation CSV")->envname("TA_GATE_ANNOTATIONS");
  report->add_option("--out", report_out, "Output directory")->required()->envname("TA_GATE_REPORT_OUT");

  // serve
  std::filesystem::path serve_manifest, serve_cassette;
  std::string serve_mode = "replay", serve_model, serve_params, host = "127.0.0.1", cors = "*";
  int port = 8080;
  gating::ServiceConfig service_config;
  auto* serve = app.add_subcommand("serve", "Run the feedback HTTP service");
  serve->add_option("--manifest", serve_manifest, "Problem manifest (JSONL)")->required()->envname("TA_GATE_MANIFEST");
  serve->add_option("--cassette", serve_cassette, "Cassette file (JSONL)")->envname("TA_GATE_CASSETTE");
  serve->add_option("--mode", serve_mode, "replay or live")->check(CLI::IsMember({"replay", "live"}))->envname("TA_GATE_MODE");
  serve->add_option("--model", serve_model, "Model identifier")->required()->envname("TA_GATE_MODEL");
  serve->add_option("--params", serve_params, "Sampling parameters as a JSON object")->envname("TA_GATE_PARAMS");
  serve->add_option("--host", host, "Bind address")->envname("TA_GATE_HOST");
  serve->add_option("--port", port, "Port")->envname("TA_GATE_PORT");
  serve->add_option("--k", service_config.k, "Issues shown per response")->check(CLI::PositiveNumber)->envname("TA_GATE_K");
  serve->add_flag("!--no-explanation", service_config.show_explanation, "Hide the code explanation steps");
  serve->add_option("--cors-origin", cors, "Allowed UI origin")->envname("TA_GATE_CORS_ORIGIN");
  serve->add_option("--interpreter", interpreter, "Python interpreter")->envname("TA_GATE_INTERPRETER");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*evaluate) {
      eval.mode = gateway::mode_from_string(eval_mode);
      eval.params = parse_params(eval_params);
      eval.sandbox.interpreter = interpreter;
      if (eval.mode != gateway::Mode::Live && eval.cassette.empty())
        throw Error("ConfigError", "--cassette is required in record and replay modes");
      auto result = pipeline::run_evaluation(eval);
      std::cout << "run " << result.run.run_id << ": " << result.run.records.size() << " records, "
                << result.run.errors.size() << " errors -> " << eval.out.string() << "\n";
      return 0;
    }
    if (*report) {
      auto records = pipeline::load_records(records_dir);
      std::optional<std::vector<metrics::AnnotationLabel>> labels;
      if (!annotations.empty()) labels = metrics::load_annotations(annotations);
      auto built = metrics::build_report(records, labels ? &*labels : nullptr);
      metrics::write_report(built, report_out);
      std::cout << records.size() << " records -> " << report_out.string() << "\n";
      return 0;
    }
    if (*serve) {
      auto mode = gateway::mode_from_string(serve_mode);
      std::shared_ptr<gateway::Cassette> cassette;
      std::shared_ptr<gateway::Provider> provider;
      if (mode == gateway::Mode::Replay) {
        if (serve_cassette.empty() || !std::filesystem::exists(serve_cassette))
          throw Error("ConfigError", "replay mode needs an existing --cassette");
        cassette = std::make_shared<gateway::Cassette>(serve_cassette);
      } else {
        provider = std::make_shared<gateway::ChatCompletionProvider>(gateway::ChatProviderConfig::from_env());
      }
      sandbox::SandboxConfig sc;
      sc.interpreter = interpreter;
      auto sb = std::make_shared<sandbox::Sandbox>(sc);
      if (!sb->interpreter()) throw sandbox::SandboxUnavailable("python interpreter not found");
      service_config.model_id = serve_model;
      service_config.params = parse_params(serve_params);
      service_config.cors_origin = cors;
      gating::FeedbackService service(corpus::load_manifest(serve_manifest), sb,
                                      std::make_shared<gateway::Gateway>(mode, provider, cassette), service_config);
      httplib::Server server;
      gating::bind_routes(server, service);
      g_server = &server;
      std::signal(SIGINT, [](int) { g_server->stop(); });
      std::signal(SIGTERM, [](int) { g_server->stop(); });
      std::cout << "listening on " << host << ":" << port << std::endl;
      if (!server.listen(host, port)) throw Error("IoError", "cannot listen on " + host + ":" + std::to_string(port));
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error [" << e.kind() << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
