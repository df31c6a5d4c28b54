// rlaar: train the toy policy through the curriculum, evaluate a checkpoint or
// a chat backend, or write a synthetic dataset.

#include <charconv>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rlaar/config.hpp"
#include "rlaar/errors.hpp"
#include "rlaar/task.hpp"
#include "rlaar/trainer.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Overrides {
  std::optional<std::size_t> k_max, window, batch_size, group_size, randomized_max_steps, max_steps, workers,
      eval_tasks, train_tasks;
  std::optional<double> abstention_ratio, threshold_ratio, learning_rate;
  std::optional<std::string> feature_mode, dataset, model, judge, system_prompt;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;

  void attach(CLI::App& app) {
    app.add_option("--seed", seed, "Master seed");
    app.add_option("--out", out, "Output directory");
    app.add_option("--k-max", k_max, "Maximum shard count");
    app.add_option("--abstention-ratio", abstention_ratio, "Probability a task is run truncated");
    app.add_option("--threshold-ratio", threshold_ratio, "Curriculum gate as a fraction of the baseline");
    app.add_option("--window", window, "Moving-average window");
    app.add_option("--batch-size", batch_size, "Tasks per step");
    app.add_option("--group-size", group_size, "Rollouts per task");
    app.add_option("--learning-rate", learning_rate, "Gradient-ascent step size");
    app.add_option("--feature-mode", feature_mode, "rich | ambiguous");
    app.add_option("--randomized-max-steps", randomized_max_steps, "Steps spent in randomized training");
    app.add_option("--max-steps", max_steps, "Hard cap on training steps");
    app.add_option("--workers", workers, "Rollout threads (0 = all cores)");
    app.add_option("--dataset", dataset, "Line-delimited JSON dataset (default: synthetic)");
    app.add_option("--train-tasks", train_tasks, "Synthetic training pool size");
    app.add_option("--eval-tasks", eval_tasks, "Held-out evaluation tasks");
    app.add_option("--model", model, "Model name sent to the backend");
    app.add_option("--judge", judge, "strict | lenient | remote");
    app.add_option("--system-prompt", system_prompt, "System prompt for remote backends");
  }

  nlohmann::json to_json() const {
    nlohmann::json j = nlohmann::json::object();
    auto put = [&j](const char* key, const auto& v) {
      if (v) j[key] = *v;
    };
    put("seed", seed);
    put("out_dir", out);
    put("k_max", k_max);
    put("abstention_ratio", abstention_ratio);
    put("threshold_ratio", threshold_ratio);
    put("window", window);
    put("batch_size", batch_size);
    put("group_size", group_size);
    put("learning_rate", learning_rate);
    put("feature_mode", feature_mode);
    put("randomized_max_steps", randomized_max_steps);
    put("max_steps", max_steps);
    put("workers", workers);
    put("dataset_path", dataset);
    put("train_tasks", train_tasks);
    put("eval_tasks", eval_tasks);
    put("model", model);
    put("judge", judge);
    put("system_prompt", system_prompt);
    return j;
  }
};

// "A..B" -> (A, B)
std::pair<std::int64_t, std::int64_t> parse_range(const std::string& text, const char* what) {
  const auto dots = text.find("..");
  auto parse = [&](std::string_view s) {
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
      throw rlaar::ConfigError(what, "expected A..B, got '" + text + "'");
    }
    return v;
  };
  if (dots == std::string::npos) throw rlaar::ConfigError(what, "expected A..B, got '" + text + "'");
  const std::string_view sv(text);
  const auto lo = parse(sv.substr(0, dots));
  const auto hi = parse(sv.substr(dots + 2));
  if (lo > hi) throw rlaar::ConfigError(what, "empty range '" + text + "'");
  return {lo, hi};
}

std::optional<std::filesystem::path> as_path(const std::optional<std::string>& s) {
  if (!s) return std::nullopt;
  return std::filesystem::path(*s);
}

int cmd_train(const std::optional<std::string>& config_path, const Overrides& ov) {
  const auto cfg = rlaar::load_config(as_path(config_path), ov.to_json());
  const auto result = rlaar::run_training(cfg);
  const auto& last = result.final_state;
  std::cout << "steps: " << result.log.size() << "  final stage: " << rlaar::to_string(last.stage)
            << "  K: " << last.current_k;
  if (result.stage3_entered_at) std::cout << "  stage 3 entered at step " << *result.stage3_entered_at;
  if (result.hit_step_limit) std::cout << "  (stopped at max_steps)";
  std::cout << "\n\n" << rlaar::render_table(result.final_report);
  if (!cfg.out_dir.empty()) std::cout << "outputs written to " << cfg.out_dir << "\n";
  return kExitOk;
}

int cmd_eval(const std::optional<std::string>& config_path, const Overrides& ov,
             const std::optional<std::string>& checkpoint, const std::optional<std::string>& endpoint) {
  const auto cfg = rlaar::load_config(as_path(config_path), ov.to_json());
  const auto report = rlaar::run_evaluation(cfg, as_path(checkpoint), endpoint);
  std::cout << rlaar::render_table(report);
  return kExitOk;
}

int cmd_gen_data(std::size_t n_tasks, const std::string& clues, const std::string& values, std::uint64_t seed,
                 const std::string& out) {
  const auto [cmin, cmax] = parse_range(clues, "n_clues_range");
  const auto [vmin, vmax] = parse_range(values, "value_range");
  if (cmin < 1) throw rlaar::ConfigError("n_clues_range", "clue counts must be >= 1");
  const auto tasks = rlaar::generate_synthetic_tasks(seed, n_tasks, static_cast<std::size_t>(cmin),
                                                     static_cast<std::size_t>(cmax), {vmin, vmax});
  rlaar::save_dataset(out, tasks);
  std::cout << "wrote " << tasks.size() << " tasks to " << out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Curriculum RL with accuracy and abstention rewards"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  Overrides train_ov;
  auto* train = app.add_subcommand("train", "Run curriculum training on the toy policy");
  train->add_option("--config", config_path, "JSON config file");
  train_ov.attach(*train);

  Overrides eval_ov;
  std::optional<std::string> checkpoint, endpoint;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint or a chat-completion endpoint");
  eval->add_option("--config", config_path, "JSON config file");
  auto* ck = eval->add_option("--checkpoint", checkpoint, "Policy checkpoint");
  auto* ep = eval->add_option("--endpoint", endpoint, "Chat-completions URL");
  ck->excludes(ep);
  eval_ov.attach(*eval);

  std::size_t n_tasks = 1000;
  std::string clue_range = "4..4";
  std::string value_range = "1..9";
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen-data", "Write synthetic sum-of-numbers tasks");
  gen->add_option("--n-tasks", n_tasks, "Number of tasks")->required();
  gen->add_option("--n-clues-range", clue_range, "Clue count range A..B")->required();
  gen->add_option("--value-range", value_range, "Clue value range A..B");
  gen->add_option("--seed", gen_seed, "Seed");
  gen->add_option("--out", gen_out, "Output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train) return cmd_train(config_path, train_ov);
    if (*eval) return cmd_eval(config_path, eval_ov, checkpoint, endpoint);
    if (*gen) return cmd_gen_data(n_tasks, clue_range, value_range, gen_seed, gen_out);
  } catch (const rlaar::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const rlaar::ArgumentError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const rlaar::ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "aborted: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}
