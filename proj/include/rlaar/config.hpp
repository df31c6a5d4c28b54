#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlaar/toy_policy.hpp"

namespace rlaar {

inline constexpr const char* kDefaultSystemPrompt =
    "You are a careful assistant. The user will reveal a problem over several messages. "
    "When you give a final answer, wrap it as \\boxed{answer}. If the information provided so far "
    "is not sufficient to solve the problem, reply with \\boxed{Abstain}.";

/// Everything a training or evaluation run needs. JSON keys are the field names.
struct RunConfig {
  // Curriculum and mixture.
  std::size_t k_max = 5;
  double abstention_ratio = 0.1;
  double threshold_ratio = 0.8;
  std::size_t window = 5;
  std::size_t randomized_max_steps = 100;
  /// Hard stop for runs that never clear the curriculum.
  std::size_t max_steps = 1000;

  // Optimization.
  std::size_t batch_size = 64;
  std::size_t group_size = 4;
  double learning_rate = 5.0;
  bool scale_advantages_by_std = true;
  FeatureMode feature_mode = FeatureMode::Rich;

  // Data. An empty dataset_path selects the synthetic generator.
  std::string dataset_path;
  std::size_t train_tasks = 2000;
  std::size_t eval_tasks = 1000;
  std::size_t n_clues_min = 4;
  std::size_t n_clues_max = 4;
  std::int64_t value_min = 1;
  std::int64_t value_max = 9;
  /// 0 draws the truncation depth uniformly per task.
  std::size_t eval_unsolvable_m = 0;

  // Run plumbing.
  std::uint64_t seed = 1;
  std::string out_dir = "runs/latest";
  /// 0 uses the hardware concurrency.
  std::size_t workers = 0;

  // Remote backend (evaluation only).
  std::string endpoint;
  std::string model = "gpt-4o-mini";
  std::string system_prompt = kDefaultSystemPrompt;
  double temperature = 0.0;
  double request_timeout_s = 60.0;
  std::size_t max_retries = 3;
  std::size_t retry_base_delay_ms = 500;
  std::size_t max_in_flight = 4;
  std::string api_key_env = "RLAAR_API_KEY";

  // Abstention judge for evaluation: "strict", "lenient" or "remote".
  std::string judge = "strict";
  std::vector<std::string> judge_phrases;
  /// Backend for the remote judge; defaults to `endpoint`.
  std::string judge_endpoint;
  std::string judge_model = "gpt-4o";

  std::size_t resolved_workers() const;
};

/// Builds a config from file values with `overrides` applied on top. Unknown
/// keys, wrong types and out-of-range values throw ConfigError naming the key.
RunConfig parse_config(const nlohmann::json& file_values,
                       const nlohmann::json& overrides = nlohmann::json::object());

/// Reads `path` (if given) as a JSON object, then applies `overrides`.
RunConfig load_config(const std::optional<std::filesystem::path>& path,
                      const nlohmann::json& overrides = nlohmann::json::object());

/// Throws ConfigError on the first invariant violation.
void validate(const RunConfig& config);

nlohmann::json to_json(const RunConfig& config);

}  // namespace rlaar
