#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "ta_gate/corpus.hpp"
#include "ta_gate/feedback.hpp"
#include "ta_gate/gateway.hpp"
#include "ta_gate/sandbox.hpp"

namespace httplib {
class Server;
}

namespace ta_gate::gating {

inline constexpr std::string_view kCaveat =
    "This feedback was generated automatically and has not been checked by a teacher. "
    "It may miss problems or describe problems your code does not have.";
inline constexpr std::string_view kPassMessage = "Your implementation passes all the asserts.";
inline constexpr std::string_view kIssuesMessage = "Some asserts fail. Here are some points to look at.";
inline constexpr std::string_view kSuppressMessage =
    "Feedback is not available for this attempt. Re-check your code against the asserts and try again, "
    "or ask a teacher.";

enum class Action { ShowPass, ShowIssues, Suppress };
enum class SuppressReason { FalseNegative, FalsePositive, Unparseable, NonCompliant };

const char* to_string(Action a);
const char* to_string(SuppressReason r);

struct GateDecision {
  Action action = Action::Suppress;
  std::vector<std::string> issues_shown;
  std::optional<std::vector<std::string>> explanation_shown;
  std::optional<SuppressReason> suppress_reason;
  std::string caveat;  // empty unless ShowIssues
  std::string message;

  bool operator==(const GateDecision&) const = default;
};

/// Total. `k` bounds the number of issues disclosed for TN feedback; shown
/// issues and steps have fenced code removed.
GateDecision decide(const sandbox::ExecutionReport& execution, const feedback::ParsedFeedback& feedback,
                    std::size_t k = 2, bool show_explanation = true);

/// Response body for POST /problems/{id}/feedback.
nlohmann::json render_payload(const GateDecision& decision, const sandbox::ExecutionReport& execution);

struct ServiceConfig {
  std::string model_id;
  nlohmann::json params = nlohmann::json::object();
  std::size_t k = 2;
  std::map<std::string, std::size_t> k_per_problem;
  bool show_explanation = true;
  std::size_t max_body_bytes = 64u << 10;
  int retry_after_seconds = 30;
  std::string cors_origin = "*";
};

struct Response {
  int status = 200;
  nlohmann::json body;
  std::map<std::string, std::string> headers;
};

/// Stateless request handling; safe to call from concurrent handler threads.
class FeedbackService {
 public:
  FeedbackService(std::vector<corpus::ProblemSpec> problems, std::shared_ptr<sandbox::Sandbox> sandbox,
                  std::shared_ptr<gateway::Gateway> gateway, ServiceConfig config);

  Response list_problems() const;
  Response feedback(const std::string& problem_id, std::string_view body) const;

  const ServiceConfig& config() const noexcept { return config_; }

 private:
  std::map<std::string, corpus::ProblemSpec> problems_;
  std::shared_ptr<sandbox::Sandbox> sandbox_;
  std::shared_ptr<gateway::Gateway> gateway_;
  ServiceConfig config_;
};

/// Registers GET /problems, POST /problems/{id}/feedback and CORS preflight.
void bind_routes(httplib::Server& server, const FeedbackService& service);

}  // namespace ta_gate::gating
