#pragma once

// Chat-completion wire client. Lets any OpenAI-compatible backend stand in for
// the policy (evaluation only) or act as an abstention judge.

#include <chrono>
#include <cstddef>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlaar/eval.hpp"
#include "rlaar/rollout.hpp"

namespace rlaar {

enum class ChatRole { System, User, Assistant };

const char* to_string(ChatRole role) noexcept;

struct ChatMessage {
  ChatRole role = ChatRole::User;
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

using ChatExchange = std::vector<ChatMessage>;

/// Optional leading system message, then user/assistant alternation ending on
/// a user message. Throws ArgumentError otherwise.
void validate_exchange(const ChatExchange& exchange);

/// [system, s_1, a_1, ..., s_k]; the system message is omitted when empty.
ChatExchange to_exchange(const Context& context, const std::string& system_prompt);

nlohmann::json request_body(const std::string& model, const ChatExchange& exchange, double temperature);

/// choices[0].message.content, or ProtocolError quoting the start of the body.
std::string parse_completion(const std::string& body);

struct ClientOptions {
  std::string endpoint;  ///< e.g. http://127.0.0.1:8000/v1/chat/completions
  std::string model = "gpt-4o-mini";
  double temperature = 0.0;
  std::chrono::milliseconds timeout{60000};
  std::size_t max_retries = 3;
  std::chrono::milliseconds retry_base_delay{500};
  std::optional<std::string> api_key;
  std::size_t max_in_flight = 4;
};

class ChatClient {
 public:
  explicit ChatClient(ClientOptions options);

  /// One completion. Connection failures, 429 and 5xx are retried with
  /// exponential backoff; exhausting the budget throws TransportError.
  std::string generate(const ChatExchange& exchange) const;

  const ClientOptions& options() const noexcept { return options_; }

 private:
  ClientOptions options_;
  std::string base_url_;
  std::string path_;
  std::unique_ptr<std::counting_semaphore<1024>> in_flight_;
};

/// Single-shot convenience wrapper around ChatClient.
std::string remote_policy_generate(const std::string& endpoint, const ChatExchange& exchange,
                                   std::chrono::milliseconds timeout, std::size_t retries);

class RemotePolicy final : public Policy {
 public:
  RemotePolicy(ClientOptions options, std::string system_prompt);

  Action act(const Context& context, std::uint64_t seed) const override;

 private:
  ChatClient client_;
  std::string system_prompt_;
};

/// Asks a backend whether a response declines to answer. Transport failures
/// count as "did not abstain".
class RemoteJudge final : public AbstentionJudge {
 public:
  explicit RemoteJudge(ClientOptions options);
  bool judge(std::string_view response) const override;
  std::string name() const override { return "remote"; }

 private:
  ChatClient client_;
};

}  // namespace rlaar
