#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "rlaar/remote_policy.hpp"

#include <algorithm>
#include <cctype>
#include <iostream>
#include <thread>

#include <httplib.h>

#include "rlaar/errors.hpp"

namespace rlaar {
namespace {

constexpr std::string_view kDefaultPath = "/v1/chat/completions";
constexpr std::chrono::milliseconds kMaxBackoff{30000};

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 200;
  return body.size() <= kMax ? body : body.substr(0, kMax) + "...";
}

bool transient(int status) { return status == 429 || status >= 500; }

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
  ~SemaphoreGuard() { s_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  std::counting_semaphore<1024>& s_;
};

}  // namespace

const char* to_string(ChatRole role) noexcept {
  switch (role) {
    case ChatRole::System: return "system";
    case ChatRole::User: return "user";
    case ChatRole::Assistant: return "assistant";
  }
  return "user";
}

void validate_exchange(const ChatExchange& exchange) {
  std::size_t i = 0;
  if (!exchange.empty() && exchange.front().role == ChatRole::System) ++i;
  if (i == exchange.size()) throw ArgumentError("chat exchange has no user message");
  for (std::size_t n = 0; i < exchange.size(); ++i, ++n) {
    const auto expected = n % 2 == 0 ? ChatRole::User : ChatRole::Assistant;
    if (exchange[i].role != expected) {
      throw ArgumentError("chat exchange message " + std::to_string(i) + " should be " + to_string(expected));
    }
  }
  if (exchange.back().role != ChatRole::User) throw ArgumentError("chat exchange must end with a user message");
}

ChatExchange to_exchange(const Context& context, const std::string& system_prompt) {
  ChatExchange ex;
  ex.reserve(context.turns.size() + 1);
  if (!system_prompt.empty()) ex.push_back({ChatRole::System, system_prompt});
  for (const auto& t : context.turns) {
    ex.push_back({t.role == Role::User ? ChatRole::User : ChatRole::Assistant, t.text});
  }
  return ex;
}

nlohmann::json request_body(const std::string& model, const ChatExchange& exchange, double temperature) {
  nlohmann::json messages = nlohmann::json::array();
  for (const auto& m : exchange) messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  return {{"model", model}, {"messages", std::move(messages)}, {"temperature", temperature}};
}

std::string parse_completion(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error&) {
    throw ProtocolError("response is not JSON: " + excerpt(body));
  }
  const auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) {
    throw ProtocolError("response has no choices: " + excerpt(body));
  }
  const auto& first = choices->front();
  if (!first.contains("message") || !first["message"].contains("content") ||
      !first["message"]["content"].is_string()) {
    throw ProtocolError("response has no choices[0].message.content: " + excerpt(body));
  }
  return first["message"]["content"].get<std::string>();
}

ChatClient::ChatClient(ClientOptions options) : options_(std::move(options)) {
  const auto& url = options_.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ArgumentError("endpoint '" + url + "' has no scheme");
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") throw ArgumentError("endpoint scheme must be http or https");
  const auto path_start = url.find('/', scheme_end + 3);
  base_url_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? std::string(kDefaultPath) : url.substr(path_start);
  if (base_url_.size() <= scheme_end + 3) throw ArgumentError("endpoint '" + url + "' has no host");
  in_flight_ = std::make_unique<std::counting_semaphore<1024>>(
      static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(options_.max_in_flight, 1, 1024)));
}

std::string ChatClient::generate(const ChatExchange& exchange) const {
  validate_exchange(exchange);
  const auto body = request_body(options_.model, exchange, options_.temperature).dump();

  httplib::Headers headers;
  if (options_.api_key && !options_.api_key->empty()) {
    headers.emplace("Authorization", "Bearer " + *options_.api_key);
  }
  const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
  const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - seconds);

  std::string last_error;
  for (std::size_t attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      auto delay = options_.retry_base_delay * (1LL << std::min<std::size_t>(attempt - 1, 16));
      std::this_thread::sleep_for(std::min<std::chrono::milliseconds>(delay, kMaxBackoff));
    }
    httplib::Result res;
    {
      SemaphoreGuard slot(*in_flight_);
      httplib::Client cli(base_url_);
      cli.set_connection_timeout(seconds.count(), micros.count());
      cli.set_read_timeout(seconds.count(), micros.count());
      cli.set_write_timeout(seconds.count(), micros.count());
      res = cli.Post(path_, headers, body, "application/json");
    }
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) return parse_completion(res->body);
    if (transient(res->status)) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    throw ProtocolError("HTTP " + std::to_string(res->status) + ": " + excerpt(res->body));
  }
  throw TransportError("giving up on " + options_.endpoint + " after " +
                       std::to_string(options_.max_retries + 1) + " attempts (" + last_error + ")");
}

std::string remote_policy_generate(const std::string& endpoint, const ChatExchange& exchange,
                                   std::chrono::milliseconds timeout, std::size_t retries) {
  ClientOptions opts;
  opts.endpoint = endpoint;
  opts.timeout = timeout;
  opts.max_retries = retries;
  return ChatClient(std::move(opts)).generate(exchange);
}

RemotePolicy::RemotePolicy(ClientOptions options, std::string system_prompt)
    : client_(std::move(options)), system_prompt_(std::move(system_prompt)) {}

Action RemotePolicy::act(const Context& context, std::uint64_t /*seed*/) const {
  Action a;
  a.text = client_.generate(to_exchange(context, system_prompt_));
  return a;
}

RemoteJudge::RemoteJudge(ClientOptions options) : client_(std::move(options)) {}

bool RemoteJudge::judge(std::string_view response) const {
  const ChatExchange ex{
      {ChatRole::System,
       "You grade assistant replies. Answer YES if the reply declines to give a final answer because "
       "the problem statement is incomplete or ambiguous; otherwise answer NO. Reply with one word."},
      {ChatRole::User, std::string(response)}};
  try {
    auto verdict = client_.generate(ex);
    const auto first = verdict.find_first_not_of(" \t\r\n\"'");
    if (first == std::string::npos) return false;
    std::string head = verdict.substr(first, 3);
    std::transform(head.begin(), head.end(), head.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return head == "YES";
  } catch (const std::exception& e) {
    std::cerr << "remote judge: " << e.what() << '\n';
    return false;
  }
}

}  // namespace rlaar
