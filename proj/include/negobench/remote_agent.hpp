#pragma once

// Chat-completions client. Any failure to get a usable reply (connection,
// HTTP status, payload shape) surfaces as TransportError.

#include <cstdlib>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>

#include "negobench/engine.hpp"
#include "negobench/error.hpp"
#include "negobench/record.hpp"

namespace negobench {

// Currency per single token.
struct Prices {
  double prompt = 0, completion = 0, reasoning = 0;
  friend bool operator==(const Prices&, const Prices&) = default;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(Prices, prompt, completion, reasoning)

inline double cost_of(const TokenUsage& u, const Prices& p) {
  return static_cast<double>(u.prompt_tokens) * p.prompt + static_cast<double>(u.completion_tokens) * p.completion +
         static_cast<double>(u.reasoning_tokens) * p.reasoning;
}

struct RemoteConfig {
  std::string endpoint;  // "http://host:port" or a full ".../chat/completions" URL
  std::string model_id;
  std::string api_key_env;  // name of the env var holding the key; empty for none
  bool reasoning_enabled = false;
  json sampling = json::object();  // merged into the request body (temperature, max_tokens, ...)
  double timeout_s = 120;
  Prices prices;
};

namespace detail {

struct Url {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

inline Url split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw InvalidInput("endpoint '" + url + "' lacks a scheme");
  const auto slash = url.find('/', scheme + 3);
  Url u;
  u.origin = url.substr(0, slash);
  u.path = slash == std::string::npos ? "" : url.substr(slash);
  while (!u.path.empty() && u.path.back() == '/') u.path.pop_back();
  if (u.path.empty()) u.path = "/v1/chat/completions";
  else if (u.path.size() < 17 || u.path.compare(u.path.size() - 17, 17, "/chat/completions") != 0)
    u.path += "/chat/completions";
  return u;
}

inline std::string text_or_empty(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return "";
  if (!j.at(key).is_string()) throw TransportError(std::string("backend field '") + key + "' is not text");
  return j.at(key).get<std::string>();
}

inline std::int64_t count_or_zero(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key) || !j.at(key).is_number_integer()) return 0;
  return std::max<std::int64_t>(0, j.at(key).get<std::int64_t>());
}

}  // namespace detail

class RemoteAgent : public Agent {
 public:
  explicit RemoteAgent(RemoteConfig cfg) : cfg_(std::move(cfg)), url_(detail::split_url(cfg_.endpoint)) {
    if (cfg_.model_id.empty()) throw InvalidInput("remote agent needs a model id");
    if (!cfg_.api_key_env.empty()) {
      const char* key = std::getenv(cfg_.api_key_env.c_str());
      if (!key) throw InvalidInput("environment variable " + cfg_.api_key_env + " is not set");
      api_key_ = key;
    }
  }

  json request_body(const std::vector<ChatMessage>& history) const {
    json body = cfg_.sampling;
    body["model"] = cfg_.model_id;
    body["messages"] = json::array();
    for (const auto& m : history) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    body["reasoning"] = {{"enabled", cfg_.reasoning_enabled}};
    return body;
  }

  AgentReply act(const std::vector<ChatMessage>& history) override {
    httplib::Client client(url_.origin);
    const auto secs = static_cast<time_t>(cfg_.timeout_s);
    client.set_connection_timeout(secs, 0);
    client.set_read_timeout(secs, 0);
    client.set_write_timeout(secs, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

    const auto res = client.Post(url_.path, headers, request_body(history).dump(), "application/json");
    if (!res) throw TransportError("request to " + url_.origin + " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300)
      throw TransportError("backend answered HTTP " + std::to_string(res->status));

    AgentReply reply;
    try {
      const auto j = json::parse(res->body);
      const auto& message = j.at("choices").at(0).at("message");
      reply.text = detail::text_or_empty(message, "content");
      reply.reasoning = detail::text_or_empty(message, "reasoning_content");
      if (reply.reasoning.empty()) reply.reasoning = detail::text_or_empty(message, "reasoning");
      if (j.contains("usage")) {
        const auto& u = j.at("usage");
        reply.usage.prompt_tokens = detail::count_or_zero(u, "prompt_tokens");
        reply.usage.completion_tokens = detail::count_or_zero(u, "completion_tokens");
        if (u.contains("completion_tokens_details"))
          reply.usage.reasoning_tokens = detail::count_or_zero(u.at("completion_tokens_details"), "reasoning_tokens");
      }
    } catch (const json::exception& e) {
      throw TransportError(std::string("malformed backend payload: ") + e.what());
    }
    reply.usage.cost_estimate = cost_of(reply.usage, cfg_.prices);
    return reply;
  }

  std::string name() const override { return cfg_.model_id; }

 private:
  RemoteConfig cfg_;
  detail::Url url_;
  std::string api_key_;
};

}  // namespace negobench
