#include "ta_gate/gating.hpp"

#include "httplib.h"
#include "ta_gate/metrics.hpp"
#include "ta_gate/text.hpp"

namespace ta_gate::gating {

using nlohmann::json;

const char* to_string(Action a) {
  switch (a) {
    case Action::ShowPass:
      return "ShowPass";
    case Action::ShowIssues:
      return "ShowIssues";
    case Action::Suppress:
      return "Suppress";
  }
  return "Suppress";
}

const char* to_string(SuppressReason r) {
  switch (r) {
    case SuppressReason::FalseNegative:
      return "FalseNegative";
    case SuppressReason::FalsePositive:
      return "FalsePositive";
    case SuppressReason::Unparseable:
      return "Unparseable";
    case SuppressReason::NonCompliant:
      return "NonCompliant";
  }
  return "Unparseable";
}

namespace {

GateDecision suppress(SuppressReason reason) {
  GateDecision d;
  d.action = Action::Suppress;
  d.suppress_reason = reason;
  d.message = std::string(kSuppressMessage);
  return d;
}

std::vector<std::string> sanitize(const std::vector<std::string>& items, std::size_t limit) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < items.size() && i < limit; ++i) out.push_back(feedback::remove_code_fences(items[i]));
  return out;
}

}  // namespace

GateDecision decide(const sandbox::ExecutionReport& execution, const feedback::ParsedFeedback& fb, std::size_t k,
                    bool show_explanation) {
  if (fb.verdict == feedback::Verdict::Unparseable) {
    if (!fb.structure.verdict_line_found && !fb.structure.compliant) return suppress(SuppressReason::NonCompliant);
    return suppress(SuppressReason::Unparseable);
  }
  switch (metrics::classify(execution, fb.verdict)) {
    case metrics::Cell::TP: {
      GateDecision d;
      d.action = Action::ShowPass;
      d.message = std::string(kPassMessage);
      return d;
    }
    case metrics::Cell::FN:
      return suppress(SuppressReason::FalseNegative);
    case metrics::Cell::FP:
      return suppress(SuppressReason::FalsePositive);
    case metrics::Cell::TN: {
      GateDecision d;
      d.action = Action::ShowIssues;
      d.issues_shown = sanitize(fb.issues, k);
      if (show_explanation) d.explanation_shown = sanitize(fb.steps, fb.steps.size());
      d.caveat = std::string(kCaveat);
      d.message = std::string(kIssuesMessage);
      return d;
    }
    case metrics::Cell::Unparseable:
      break;
  }
  return suppress(SuppressReason::Unparseable);
}

json render_payload(const GateDecision& d, const sandbox::ExecutionReport& execution) {
  json asserts = json::array();
  for (const auto& a : execution.assert_results)
    asserts.push_back({{"assert", a.source}, {"status", sandbox::to_string(a.status)}});
  json body{{"action", to_string(d.action)},
            {"issues", d.issues_shown},
            {"explanation", d.explanation_shown ? json(*d.explanation_shown) : json(nullptr)},
            {"assert_results", asserts},
            {"outcome", sandbox::to_string(execution.outcome)},
            {"caveat", d.caveat.empty() ? json(nullptr) : json(d.caveat)},
            {"message", d.message}};
  if (d.suppress_reason) body["suppress_reason"] = to_string(*d.suppress_reason);
  return body;
}

FeedbackService::FeedbackService(std::vector<corpus::ProblemSpec> problems, std::shared_ptr<sandbox::Sandbox> sandbox,
                                 std::shared_ptr<gateway::Gateway> gateway, ServiceConfig config)
    : sandbox_(std::move(sandbox)), gateway_(std::move(gateway)), config_(std::move(config)) {
  for (auto& p : problems) {
    auto id = p.id;
    problems_.emplace(std::move(id), std::move(p));
  }
}

namespace {

Response error_response(int status, const std::string& msg) { return Response{status, json{{"error", msg}}, {}}; }

}  // namespace

Response FeedbackService::list_problems() const {
  json list = json::array();
  for (const auto& [id, p] : problems_)
    list.push_back(
        {{"id", p.id}, {"function_name", p.function_name}, {"description", p.description}, {"asserts", p.asserts}});
  return Response{200, list, {}};
}

Response FeedbackService::feedback(const std::string& problem_id, std::string_view body) const {
  auto it = problems_.find(problem_id);
  if (it == problems_.end()) return error_response(404, "unknown problem: " + problem_id);
  if (body.size() > config_.max_body_bytes) return error_response(413, "request body too large");

  std::string code;
  try {
    auto j = json::parse(body);
    code = j.at("code").get<std::string>();
  } catch (const json::exception&) {
    return error_response(400, "body must be a JSON object with a string field \"code\"");
  }
  const auto& problem = it->second;

  sandbox::ExecutionReport execution;
  try {
    execution = sandbox_->execute(code, problem);
  } catch (const sandbox::SandboxUnavailable& e) {
    return error_response(500, e.what());
  }

  corpus::Submission submission{"web/" + text::sha256_hex(code).substr(0, 16), problem.id, code, {"request", {}}};
  std::string completion;
  try {
    auto rendered = prompt::render_prompt(problem, submission);
    completion = gateway_->complete({config_.model_id, rendered, config_.params});
  } catch (const Error& e) {
    auto r = error_response(503, "feedback service unavailable, try again later");
    r.headers["Retry-After"] = std::to_string(config_.retry_after_seconds);
    return r;
  }

  auto parsed = feedback::parse_feedback(completion);
  auto kit = config_.k_per_problem.find(problem.id);
  auto k = kit == config_.k_per_problem.end() ? config_.k : kit->second;
  auto decision = decide(execution, parsed, k, config_.show_explanation);
  return Response{200, render_payload(decision, execution), {}};
}

namespace {

void send(httplib::Response& res, const Response& r) {
  res.status = r.status;
  for (const auto& [k, v] : r.headers) res.set_header(k, v);
  res.set_content(r.body.dump(), "application/json");
}

}  // namespace

void bind_routes(httplib::Server& server, const FeedbackService& service) {
  const auto origin = service.config().cors_origin;
  server.set_default_headers({{"Access-Control-Allow-Origin", origin},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"},
                              {"Access-Control-Allow-Headers", "Content-Type"}});
  // Let oversized bodies reach the handler so they get the JSON 413.
  server.set_payload_max_length(service.config().max_body_bytes + 1);
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
  server.Get("/problems", [&service](const httplib::Request&, httplib::Response& res) {
    send(res, service.list_problems());
  });
  server.Post(R"(/problems/([^/]+)/feedback)", [&service](const httplib::Request& req, httplib::Response& res) {
    send(res, service.feedback(req.matches[1], req.body));
  });
}

}  // namespace ta_gate::gating
