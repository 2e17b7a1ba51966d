#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <semaphore>
#include <shared_mutex>
#include <string>
#include <vector>

#include "json.hpp"
#include "ta_gate/error.hpp"
#include "ta_gate/prompt.hpp"

namespace ta_gate::gateway {

struct CompletionRequest {
  std::string model_id;
  prompt::RenderedPrompt prompt;
  /// Opaque sampling settings, passed through to the provider.
  nlohmann::json params = nlohmann::json::object();

  /// sha256 over (model_id, prompt digest, canonical params).
  std::string key() const;
};

std::string request_key(std::string_view model_id, std::string_view prompt_digest, const nlohmann::json& params);

struct CassetteEntry {
  std::string key;
  std::string model_id;
  nlohmann::json params = nlohmann::json::object();
  std::string prompt_text;
  std::string response_text;
  std::string recorded_at;  // ISO-8601 UTC

  bool operator==(const CassetteEntry&) const = default;
};

class CassetteMiss : public Error {
 public:
  explicit CassetteMiss(const std::string& key) : Error("CassetteMiss", "cassette has no entry for key " + key), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class ProviderError : public Error {
 public:
  ProviderError(const std::string& msg, bool transient, int status = 0)
      : Error("ProviderError", msg), transient_(transient), status_(status) {}
  bool transient() const noexcept { return transient_; }
  int status() const noexcept { return status_; }

 private:
  bool transient_;
  int status_;
};

class GatewayTimeout : public Error {
 public:
  explicit GatewayTimeout(const std::string& msg) : Error("Timeout", msg) {}
};

/// Map from request key to recorded response, persisted as JSON Lines (one
/// entry per line, sorted by key). When a file holds several lines with the
/// same key the last one wins, so hand-appended entries behave as updates.
class Cassette {
 public:
  Cassette() = default;
  /// Loads `path` if it exists; put() persists back to it.
  explicit Cassette(std::filesystem::path path);
  Cassette(Cassette&& other) noexcept : path_(std::move(other.path_)), entries_(std::move(other.entries_)) {}
  Cassette& operator=(Cassette&& other) noexcept {
    path_ = std::move(other.path_);
    entries_ = std::move(other.entries_);
    return *this;
  }

  static Cassette parse(std::string_view jsonl);

  std::optional<CassetteEntry> find(const std::string& key) const;
  /// Inserts or replaces the entry for entry.key and rewrites the file.
  void put(CassetteEntry entry);
  std::size_t size() const;
  std::vector<CassetteEntry> entries() const;

  /// Canonical JSONL text (sorted by key).
  std::string serialize() const;
  /// sha256 of serialize().
  std::string digest() const;

 private:
  void persist_locked() const;

  std::optional<std::filesystem::path> path_;
  std::map<std::string, CassetteEntry> entries_;
  mutable std::shared_mutex mutex_;
};

/// Provider interface: request in, completion text out. Implementations
/// throw ProviderError (transient or not) or GatewayTimeout.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
};

struct ChatProviderConfig {
  std::string base_url = "https://api.openai.com/v1";  // $TA_GATE_API_URL
  std::string api_key;                                 // $TA_GATE_API_KEY
  std::chrono::seconds timeout{60};

  /// Defaults overridden by TA_GATE_API_URL / TA_GATE_API_KEY when set.
  static ChatProviderConfig from_env();
};

/// Chat-completion style HTTP+JSON endpoint: POST {base_url}/chat/completions
/// with {"model", "messages":[{"role":"user","content":prompt}], ...params};
/// the reply text is choices[0].message.content.
class ChatCompletionProvider : public Provider {
 public:
  explicit ChatCompletionProvider(ChatProviderConfig config);
  std::string complete(const CompletionRequest& request) override;

  static nlohmann::json request_body(const CompletionRequest& request);
  /// Extracts choices[0].message.content; throws ProviderError otherwise.
  static std::string parse_response(std::string_view body);

 private:
  ChatProviderConfig config_;
};

enum class Mode { Live, Record, Replay };

const char* to_string(Mode m);
Mode mode_from_string(std::string_view s);

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds base_delay{500};
  double jitter = 0.25;  // +/- fraction of each delay
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
using Clock = std::function<std::string()>;  // ISO-8601 timestamp

std::string utc_now_iso8601();

class Gateway {
 public:
  Gateway(Mode mode, std::shared_ptr<Provider> provider, std::shared_ptr<Cassette> cassette,
          RetryPolicy retry = {}, std::ptrdiff_t max_in_flight = 4, Sleeper sleeper = {}, Clock clock = {});

  /// Live: provider only. Record: provider, then persisted under the request
  /// key. Replay: the stored text, never the provider.
  std::string complete(const CompletionRequest& request);

  Mode mode() const noexcept { return mode_; }

 private:
  std::string call_provider(const CompletionRequest& request);

  Mode mode_;
  std::shared_ptr<Provider> provider_;
  std::shared_ptr<Cassette> cassette_;
  RetryPolicy retry_;
  std::shared_ptr<std::counting_semaphore<>> in_flight_;
  Sleeper sleeper_;
  Clock clock_;
  std::mutex rng_mutex_;
  std::mt19937_64 rng_{std::random_device{}()};
};

}  // namespace ta_gate::gateway
