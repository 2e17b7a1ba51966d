#include "ta_gate/gateway.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "ta_gate/corpus.hpp"
#include "ta_gate/text.hpp"

namespace ta_gate::gateway {

using nlohmann::json;

std::string request_key(std::string_view model_id, std::string_view prompt_digest, const json& params) {
  std::string material;
  material += model_id;
  material += '\n';
  material += prompt_digest;
  material += '\n';
  material += params.dump();  // object keys are sorted, so this is canonical
  return text::sha256_hex(material);
}

std::string CompletionRequest::key() const { return request_key(model_id, prompt.digest, params); }

namespace {

json entry_json(const CassetteEntry& e) {
  return json{{"key", e.key},
              {"model_id", e.model_id},
              {"params", e.params},
              {"prompt_text", e.prompt_text},
              {"response_text", e.response_text},
              {"recorded_at", e.recorded_at}};
}

CassetteEntry entry_from_json(const json& j) {
  CassetteEntry e;
  e.key = j.at("key").get<std::string>();
  e.model_id = j.value("model_id", "");
  e.params = j.value("params", json::object());
  e.prompt_text = j.value("prompt_text", "");
  e.response_text = j.at("response_text").get<std::string>();
  e.recorded_at = j.value("recorded_at", "");
  return e;
}

}  // namespace

Cassette::Cassette(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(*path_)) entries_ = parse(corpus::read_file(*path_)).entries_;
}

Cassette Cassette::parse(std::string_view jsonl) {
  Cassette c;
  std::size_t line_no = 0;
  for (auto line : text::split_lines(jsonl)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      auto e = entry_from_json(json::parse(line));
      c.entries_[e.key] = std::move(e);
    } catch (const json::exception& ex) {
      throw Error("CassetteSyntax", "cassette line " + std::to_string(line_no) + ": " + ex.what());
    }
  }
  return c;
}

std::optional<CassetteEntry> Cassette::find(const std::string& key) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void Cassette::put(CassetteEntry entry) {
  std::unique_lock lock(mutex_);
  auto key = entry.key;
  entries_[key] = std::move(entry);
  persist_locked();
}

std::size_t Cassette::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

std::vector<CassetteEntry> Cassette::entries() const {
  std::shared_lock lock(mutex_);
  std::vector<CassetteEntry> out;
  for (const auto& [k, e] : entries_) out.push_back(e);
  return out;
}

std::string Cassette::serialize() const {
  std::shared_lock lock(mutex_);
  std::string out;
  for (const auto& [k, e] : entries_) {
    out += entry_json(e).dump();
    out += '\n';
  }
  return out;
}

std::string Cassette::digest() const { return text::sha256_hex(serialize()); }

void Cassette::persist_locked() const {
  if (!path_) return;
  std::string out;
  for (const auto& [k, e] : entries_) {
    out += entry_json(e).dump();
    out += '\n';
  }
  auto tmp = *path_;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    f << out;
    if (!f) throw Error("IoError", "cannot write cassette " + tmp.string());
  }
  std::filesystem::rename(tmp, *path_);
}

ChatProviderConfig ChatProviderConfig::from_env() {
  ChatProviderConfig c;
  if (const char* url = std::getenv("TA_GATE_API_URL"); url != nullptr && *url != '\0') c.base_url = url;
  if (const char* key = std::getenv("TA_GATE_API_KEY"); key != nullptr) c.api_key = key;
  return c;
}

ChatCompletionProvider::ChatCompletionProvider(ChatProviderConfig config) : config_(std::move(config)) {}

json ChatCompletionProvider::request_body(const CompletionRequest& request) {
  json body = request.params.is_object() ? request.params : json::object();
  body["model"] = request.model_id;
  body["messages"] = json::array({{{"role", "user"}, {"content", request.prompt.text}}});
  return body;
}

std::string ChatCompletionProvider::parse_response(std::string_view body) {
  try {
    auto j = json::parse(body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw ProviderError(std::string("unexpected provider response: ") + e.what(), false);
  }
}

std::string ChatCompletionProvider::complete(const CompletionRequest& request) {
  if (config_.api_key.empty()) throw ProviderError("no API key configured (TA_GATE_API_KEY)", false);

  // base_url = scheme://host[:port][/prefix]
  const auto& url = config_.base_url;
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ProviderError("invalid provider URL: " + url, false);
  auto path_start = url.find('/', scheme_end + 3);
  std::string origin = path_start == std::string::npos ? url : url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

  httplib::Client client(origin);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  client.set_write_timeout(config_.timeout);
  httplib::Headers headers = {{"Authorization", "Bearer " + config_.api_key}};
  auto res = client.Post(prefix + "/chat/completions", headers, request_body(request).dump(), "application/json");
  if (!res) {
    auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout)
      throw GatewayTimeout("provider request timed out: " + httplib::to_string(err));
    throw ProviderError("provider transport error: " + httplib::to_string(err), true);
  }
  if (res->status == 429 || res->status >= 500)
    throw ProviderError("provider returned HTTP " + std::to_string(res->status), true, res->status);
  if (res->status != 200)
    throw ProviderError("provider returned HTTP " + std::to_string(res->status) + ": " + res->body, false,
                        res->status);
  return parse_response(res->body);
}

const char* to_string(Mode m) {
  switch (m) {
    case Mode::Live:
      return "live";
    case Mode::Record:
      return "record";
    case Mode::Replay:
      return "replay";
  }
  return "replay";
}

Mode mode_from_string(std::string_view s) {
  auto l = text::to_lower(s);
  if (l == "live") return Mode::Live;
  if (l == "record") return Mode::Record;
  if (l == "replay") return Mode::Replay;
  throw Error("ConfigError", "unknown gateway mode: " + std::string(s));
}

std::string utc_now_iso8601() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Gateway::Gateway(Mode mode, std::shared_ptr<Provider> provider, std::shared_ptr<Cassette> cassette,
                 RetryPolicy retry, std::ptrdiff_t max_in_flight, Sleeper sleeper, Clock clock)
    : mode_(mode),
      provider_(std::move(provider)),
      cassette_(std::move(cassette)),
      retry_(retry),
      in_flight_(std::make_shared<std::counting_semaphore<>>(std::max<std::ptrdiff_t>(1, max_in_flight))),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      clock_(clock ? std::move(clock) : Clock(utc_now_iso8601)) {
  if (mode_ != Mode::Live && !cassette_) throw Error("ConfigError", "record/replay mode needs a cassette");
  if (mode_ != Mode::Replay && !provider_) throw Error("ConfigError", "live/record mode needs a provider");
}

std::string Gateway::call_provider(const CompletionRequest& request) {
  in_flight_->acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{*in_flight_};

  for (int attempt = 1;; ++attempt) {
    try {
      return provider_->complete(request);
    } catch (const ProviderError& e) {
      if (!e.transient() || attempt >= retry_.attempts) throw;
    } catch (const GatewayTimeout&) {
      if (attempt >= retry_.attempts) throw;
    }
    double factor = 1.0;
    {
      std::lock_guard lock(rng_mutex_);
      std::uniform_real_distribution<double> dist(1.0 - retry_.jitter, 1.0 + retry_.jitter);
      factor = dist(rng_);
    }
    auto delay = retry_.base_delay.count() * static_cast<double>(1LL << (attempt - 1)) * factor;
    sleeper_(std::chrono::milliseconds(static_cast<std::int64_t>(delay)));
  }
}

std::string Gateway::complete(const CompletionRequest& request) {
  switch (mode_) {
    case Mode::Live:
      return call_provider(request);
    case Mode::Replay: {
      auto key = request.key();
      auto hit = cassette_->find(key);
      if (!hit) throw CassetteMiss(key);
      return hit->response_text;
    }
    case Mode::Record: {
      auto text = call_provider(request);
      cassette_->put(CassetteEntry{request.key(), request.model_id, request.params, request.prompt.text, text,
                                   clock_()});
      return text;
    }
  }
  throw Error("ConfigError", "unknown gateway mode");
}

}  // namespace ta_gate::gateway
