#include "rlaar/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "rlaar/errors.hpp"
#include "rlaar/parallel.hpp"

namespace rlaar {
namespace {

using json = nlohmann::json;

void read(const std::string& key, const json& v, std::uint64_t& out) {
  const bool non_negative = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
  if (!non_negative) throw ConfigError(key, "expected a non-negative integer");
  out = v.get<std::uint64_t>();
}

void read(const std::string& key, const json& v, std::int64_t& out) {
  if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
  out = v.get<std::int64_t>();
}

void read(const std::string& key, const json& v, double& out) {
  if (!v.is_number()) throw ConfigError(key, "expected a number");
  out = v.get<double>();
}

void read(const std::string& key, const json& v, bool& out) {
  if (!v.is_boolean()) throw ConfigError(key, "expected a boolean");
  out = v.get<bool>();
}

void read(const std::string& key, const json& v, std::string& out) {
  if (!v.is_string()) throw ConfigError(key, "expected a string");
  out = v.get<std::string>();
}

void read(const std::string& key, const json& v, std::vector<std::string>& out) {
  if (!v.is_array()) throw ConfigError(key, "expected an array of strings");
  out.clear();
  for (const auto& e : v) {
    if (!e.is_string()) throw ConfigError(key, "expected an array of strings");
    out.push_back(e.get<std::string>());
  }
}

void read(const std::string& key, const json& v, FeatureMode& out) {
  if (!v.is_string()) throw ConfigError(key, "expected \"rich\" or \"ambiguous\"");
  try {
    out = parse_feature_mode(v.get<std::string>());
  } catch (const ArgumentError&) {
    throw ConfigError(key, "expected \"rich\" or \"ambiguous\"");
  }
}

using Setter = std::function<void(RunConfig&, const json&)>;

template <class T>
Setter field(const char* key, T RunConfig::*member) {
  return [key, member](RunConfig& c, const json& v) { read(key, v, c.*member); };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"k_max", field("k_max", &RunConfig::k_max)},
      {"abstention_ratio", field("abstention_ratio", &RunConfig::abstention_ratio)},
      {"threshold_ratio", field("threshold_ratio", &RunConfig::threshold_ratio)},
      {"window", field("window", &RunConfig::window)},
      {"randomized_max_steps", field("randomized_max_steps", &RunConfig::randomized_max_steps)},
      {"max_steps", field("max_steps", &RunConfig::max_steps)},
      {"batch_size", field("batch_size", &RunConfig::batch_size)},
      {"group_size", field("group_size", &RunConfig::group_size)},
      {"learning_rate", field("learning_rate", &RunConfig::learning_rate)},
      {"scale_advantages_by_std", field("scale_advantages_by_std", &RunConfig::scale_advantages_by_std)},
      {"feature_mode", field("feature_mode", &RunConfig::feature_mode)},
      {"dataset_path", field("dataset_path", &RunConfig::dataset_path)},
      {"train_tasks", field("train_tasks", &RunConfig::train_tasks)},
      {"eval_tasks", field("eval_tasks", &RunConfig::eval_tasks)},
      {"n_clues_min", field("n_clues_min", &RunConfig::n_clues_min)},
      {"n_clues_max", field("n_clues_max", &RunConfig::n_clues_max)},
      {"value_min", field("value_min", &RunConfig::value_min)},
      {"value_max", field("value_max", &RunConfig::value_max)},
      {"eval_unsolvable_m", field("eval_unsolvable_m", &RunConfig::eval_unsolvable_m)},
      {"seed", field("seed", &RunConfig::seed)},
      {"out_dir", field("out_dir", &RunConfig::out_dir)},
      {"workers", field("workers", &RunConfig::workers)},
      {"endpoint", field("endpoint", &RunConfig::endpoint)},
      {"model", field("model", &RunConfig::model)},
      {"system_prompt", field("system_prompt", &RunConfig::system_prompt)},
      {"temperature", field("temperature", &RunConfig::temperature)},
      {"request_timeout_s", field("request_timeout_s", &RunConfig::request_timeout_s)},
      {"max_retries", field("max_retries", &RunConfig::max_retries)},
      {"retry_base_delay_ms", field("retry_base_delay_ms", &RunConfig::retry_base_delay_ms)},
      {"max_in_flight", field("max_in_flight", &RunConfig::max_in_flight)},
      {"api_key_env", field("api_key_env", &RunConfig::api_key_env)},
      {"judge", field("judge", &RunConfig::judge)},
      {"judge_phrases", field("judge_phrases", &RunConfig::judge_phrases)},
      {"judge_endpoint", field("judge_endpoint", &RunConfig::judge_endpoint)},
      {"judge_model", field("judge_model", &RunConfig::judge_model)},
  };
  return table;
}

void apply(RunConfig& c, const json& values, const char* origin) {
  if (!values.is_object()) throw ConfigError("", std::string(origin) + " must be a JSON object");
  for (const auto& [key, value] : values.items()) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(key, "unknown configuration key");
    it->second(c, value);
  }
}

template <class T>
void require_range(const char* key, T value, T lo, T hi) {
  if (value < lo || value > hi) {
    std::ostringstream os;
    os << "value " << value << " outside [" << lo << ", " << hi << "]";
    throw ConfigError(key, os.str());
  }
}

}  // namespace

std::size_t RunConfig::resolved_workers() const { return workers == 0 ? default_workers() : workers; }

void validate(const RunConfig& c) {
  require_range<std::size_t>("k_max", c.k_max, 2, 64);
  if (!(c.abstention_ratio >= 0.0 && c.abstention_ratio <= 1.0)) {
    throw ConfigError("abstention_ratio", "must lie in [0, 1]");
  }
  if (!(c.threshold_ratio > 0.0 && c.threshold_ratio <= 1.0)) {
    throw ConfigError("threshold_ratio", "must lie in (0, 1]");
  }
  require_range<std::size_t>("window", c.window, 1, 10000);
  require_range<std::size_t>("batch_size", c.batch_size, 1, 100000);
  require_range<std::size_t>("group_size", c.group_size, 2, 1024);
  require_range<std::size_t>("max_steps", c.max_steps, 1, 10000000);
  if (!(c.learning_rate > 0.0) || !std::isfinite(c.learning_rate)) {
    throw ConfigError("learning_rate", "must be positive and finite");
  }
  if (c.dataset_path.empty()) {
    require_range<std::size_t>("train_tasks", c.train_tasks, 1, 10000000);
    if (c.n_clues_min + 1 < c.k_max) {
      throw ConfigError("n_clues_min", "synthetic tasks need at least k_max - 1 clues");
    }
    if (c.n_clues_max < c.n_clues_min) throw ConfigError("n_clues_max", "must be >= n_clues_min");
    if (c.value_max < c.value_min) throw ConfigError("value_max", "must be >= value_min");
  }
  require_range<std::size_t>("eval_tasks", c.eval_tasks, 1, 10000000);
  if (c.eval_unsolvable_m >= c.k_max) throw ConfigError("eval_unsolvable_m", "must be < k_max (0 = uniform)");
  if (!(c.temperature >= 0.0)) throw ConfigError("temperature", "must be >= 0");
  if (!(c.request_timeout_s > 0.0)) throw ConfigError("request_timeout_s", "must be positive");
  require_range<std::size_t>("max_in_flight", c.max_in_flight, 1, 1024);
  if (c.judge != "strict" && c.judge != "lenient" && c.judge != "remote") {
    throw ConfigError("judge", "expected \"strict\", \"lenient\" or \"remote\"");
  }
}

RunConfig parse_config(const json& file_values, const json& overrides) {
  RunConfig c;
  if (!file_values.is_null()) apply(c, file_values, "config file");
  if (!overrides.is_null()) apply(c, overrides, "overrides");
  validate(c);
  return c;
}

RunConfig load_config(const std::optional<std::filesystem::path>& path, const json& overrides) {
  json file_values = json::object();
  if (path) {
    std::ifstream in(*path);
    if (!in) throw ConfigError("", "cannot open config file " + path->string());
    try {
      file_values = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("", "config file " + path->string() + " is not valid JSON: " + e.what());
    }
  }
  return parse_config(file_values, overrides);
}

json to_json(const RunConfig& c) {
  return {{"k_max", c.k_max},
          {"abstention_ratio", c.abstention_ratio},
          {"threshold_ratio", c.threshold_ratio},
          {"window", c.window},
          {"randomized_max_steps", c.randomized_max_steps},
          {"max_steps", c.max_steps},
          {"batch_size", c.batch_size},
          {"group_size", c.group_size},
          {"learning_rate", c.learning_rate},
          {"scale_advantages_by_std", c.scale_advantages_by_std},
          {"feature_mode", to_string(c.feature_mode)},
          {"dataset_path", c.dataset_path},
          {"train_tasks", c.train_tasks},
          {"eval_tasks", c.eval_tasks},
          {"n_clues_min", c.n_clues_min},
          {"n_clues_max", c.n_clues_max},
          {"value_min", c.value_min},
          {"value_max", c.value_max},
          {"eval_unsolvable_m", c.eval_unsolvable_m},
          {"seed", c.seed},
          {"out_dir", c.out_dir},
          {"workers", c.workers},
          {"endpoint", c.endpoint},
          {"model", c.model},
          {"system_prompt", c.system_prompt},
          {"temperature", c.temperature},
          {"request_timeout_s", c.request_timeout_s},
          {"max_retries", c.max_retries},
          {"retry_base_delay_ms", c.retry_base_delay_ms},
          {"max_in_flight", c.max_in_flight},
          {"api_key_env", c.api_key_env},
          {"judge", c.judge},
          {"judge_phrases", c.judge_phrases},
          {"judge_endpoint", c.judge_endpoint},
          {"judge_model", c.judge_model}};
}

}  // namespace rlaar
