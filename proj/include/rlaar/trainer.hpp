#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlaar/config.hpp"
#include "rlaar/curriculum.hpp"
#include "rlaar/eval.hpp"
#include "rlaar/remote_policy.hpp"
#include "rlaar/task.hpp"
#include "rlaar/toy_policy.hpp"

namespace rlaar {

/// One line of the training log.
struct StepLogRecord {
  std::size_t step = 0;
  Stage stage = Stage::ThresholdEstablishment;  ///< stage the step ran in
  std::size_t k = 1;                            ///< shard count the step ran at
  std::size_t solvable_rollouts = 0;
  std::size_t unsolvable_rollouts = 0;
  std::size_t failed_rollouts = 0;
  std::size_t dropped_groups = 0;
  double mean_reward = 0.0;
  std::optional<double> mean_reward_solvable;
  std::optional<double> mean_reward_unsolvable;
  double moving_average = 0.0;  ///< window mean the gate saw
  std::optional<double> threshold;
  double gradient_norm = 0.0;
  CurriculumState curriculum;   ///< state after the step
  double wall_time_ms = 0.0;    ///< kept out of the JSONL stream so logs stay reproducible
};

nlohmann::json to_json(const StepLogRecord& record);

struct TrainingResult {
  PolicyParams params;
  std::vector<StepLogRecord> log;
  EvalReport final_report;
  CurriculumState final_state;
  /// 1-based step index at which Stage 3 was entered, if it was.
  std::optional<std::size_t> stage3_entered_at;
  bool hit_step_limit = false;
};

/// Raised when an update would make the parameters non-finite. A diagnostic
/// checkpoint has been written when the run has an output directory.
class TrainingAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tasks a run draws from: the dataset file, or the synthetic training pool.
std::vector<Task> training_tasks(const RunConfig& config);
/// Held-out tasks for the closing evaluation.
std::vector<Task> evaluation_tasks(const RunConfig& config);
EvalSettings evaluation_settings(const RunConfig& config);
std::unique_ptr<AbstentionJudge> make_judge(const RunConfig& config);
ClientOptions client_options(const RunConfig& config);

/// The curriculum training loop. When `config.out_dir` is non-empty writes
/// train_log.jsonl, train_log.csv, timing.csv, config.json, checkpoints/ and
/// the closing eval_report.{json,txt}.
TrainingResult run_training(const RunConfig& config);

/// Evaluates either a checkpoint or a remote endpoint (exactly one) on the
/// held-out tasks and writes eval_report.{json,txt} to out_dir.
EvalReport run_evaluation(const RunConfig& config, const std::optional<std::filesystem::path>& checkpoint,
                          const std::optional<std::string>& endpoint);

}  // namespace rlaar
