#include "rlaar/trainer.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "rlaar/errors.hpp"
#include "rlaar/grpo.hpp"
#include "rlaar/parallel.hpp"
#include "rlaar/random.hpp"
#include "rlaar/reward.hpp"

namespace rlaar {
namespace {

namespace fs = std::filesystem;

// Seed-stream tags; each consumer of randomness gets its own coordinate.
enum SeedTag : std::uint64_t {
  kTrainPool = 1,
  kEvalPool = 2,
  kDifficulty = 3,
  kTaskDraw = 4,
  kTruncation = 5,
  kRollout = 6,
  kEvalRollouts = 7,
};

struct CellResult {
  std::vector<Trajectory> survivors;
  RolloutKind kind = RolloutKind::SolvableSingle;
  std::size_t failed = 0;
};

// G rollouts for one sampled task. The m-draw happens only past Stage 1.
CellResult run_cell(const RunConfig& cfg, const ToyPolicy& policy, std::span<const Task> pool,
                    Stage stage, std::size_t k, std::uint64_t cell_seed) {
  Rng rng(cell_seed);
  const Task& task = pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
  const bool unsolvable = stage != Stage::ThresholdEstablishment && rng.uniform01() < cfg.abstention_ratio;

  CellResult cell;
  std::optional<Task> view;
  if (unsolvable) {
    // K = 1 has no proper prefix; truncate at the smallest multi-turn level.
    const std::size_t k_trunc = std::max<std::size_t>(k, 2);
    view = truncate_task(task, k_trunc, draw_truncation(k_trunc, derive_seed(cell_seed, {kTruncation})));
    cell.kind = RolloutKind::UnsolvableMulti;
  } else {
    cell.kind = k == 1 ? RolloutKind::SolvableSingle : RolloutKind::SolvableMulti;
  }
  const Task& scored = view ? *view : task;

  for (std::size_t g = 0; g < cfg.group_size; ++g) {
    const auto seed = derive_seed(cell_seed, {kRollout, g});
    try {
      Trajectory t = unsolvable                   ? unsolvable_multi_rollout(policy, *view, seed)
                     : cell.kind == RolloutKind::SolvableSingle ? solvable_single_rollout(policy, task, seed)
                                                                : solvable_multi_rollout(policy, task, k, seed);
      terminal_reward(t, scored);
      cell.survivors.push_back(std::move(t));
    } catch (const RolloutError& e) {
      std::fprintf(stderr, "rollout dropped: %s\n", e.what());
      ++cell.failed;
    }
  }
  return cell;
}

// Shortest text that reads back to the same double.
std::string fmt_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

class RunWriter {
 public:
  explicit RunWriter(const RunConfig& cfg) {
    if (cfg.out_dir.empty()) return;
    dir_ = cfg.out_dir;
    fs::create_directories(*dir_ / "checkpoints");
    write_file("config.json", to_json(cfg).dump(2) + "\n");
    jsonl_.open(*dir_ / "train_log.jsonl", std::ios::binary | std::ios::trunc);
    csv_.open(*dir_ / "train_log.csv", std::ios::binary | std::ios::trunc);
    timing_.open(*dir_ / "timing.csv", std::ios::binary | std::ios::trunc);
    csv_ << "step,stage,K,mean_reward,moving_avg,threshold\n";
    timing_ << "step,wall_time_ms\n";
  }

  void step(const StepLogRecord& r) {
    if (!dir_) return;
    jsonl_ << to_json(r).dump() << '\n';
    csv_ << r.step << ',' << static_cast<int>(r.stage) << ',' << r.k << ',' << fmt_double(r.mean_reward) << ','
         << fmt_double(r.moving_average) << ',' << (r.threshold ? fmt_double(*r.threshold) : "") << '\n';
    timing_ << r.step << ',' << r.wall_time_ms << '\n';
    jsonl_.flush();
    csv_.flush();
  }

  void checkpoint(const std::string& name, const PolicyParams& params, const CurriculumState& state,
                  std::size_t step) {
    if (!dir_) return;
    save_params(params, *dir_ / "checkpoints" / name, {{"curriculum", to_json(state)}, {"step", step}});
  }

  void report(const EvalReport& report) {
    if (!dir_) return;
    write_file("eval_report.json", to_json(report).dump(2) + "\n");
    write_file("eval_report.txt", render_table(report));
  }

 private:
  void write_file(const char* name, const std::string& content) {
    std::ofstream out(*dir_ / name, std::ios::binary | std::ios::trunc);
    out << content;
    if (!out) throw std::runtime_error("cannot write " + (*dir_ / name).string());
  }

  std::optional<fs::path> dir_;
  std::ofstream jsonl_, csv_, timing_;
};

std::string checkpoint_name(std::size_t step, Stage stage) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "step_%06zu_%s.json", step, to_string(stage));
  return buf;
}

}  // namespace

nlohmann::json to_json(const StepLogRecord& r) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"step", r.step},
          {"stage", static_cast<int>(r.stage)},
          {"k", r.k},
          {"solvable_rollouts", r.solvable_rollouts},
          {"unsolvable_rollouts", r.unsolvable_rollouts},
          {"failed_rollouts", r.failed_rollouts},
          {"dropped_groups", r.dropped_groups},
          {"mean_reward", r.mean_reward},
          {"mean_reward_solvable", opt(r.mean_reward_solvable)},
          {"mean_reward_unsolvable", opt(r.mean_reward_unsolvable)},
          {"moving_average", r.moving_average},
          {"threshold", opt(r.threshold)},
          {"gradient_norm", r.gradient_norm},
          {"curriculum", to_json(r.curriculum)}};
}

std::vector<Task> training_tasks(const RunConfig& cfg) {
  std::vector<Task> tasks;
  if (!cfg.dataset_path.empty()) {
    for (auto& t : load_dataset(cfg.dataset_path)) {
      if (!t.solvable) continue;  // truncations are made on the fly
      if (t.total_shards < cfg.k_max) {
        throw ConfigError("dataset_path", "task '" + t.id + "' has fewer than k_max shards");
      }
      tasks.push_back(std::move(t));
    }
    if (tasks.empty()) throw ConfigError("dataset_path", "dataset has no solvable tasks");
    return tasks;
  }
  return generate_synthetic_tasks(derive_seed(cfg.seed, {kTrainPool}), cfg.train_tasks, cfg.n_clues_min,
                                  cfg.n_clues_max, {cfg.value_min, cfg.value_max});
}

std::vector<Task> evaluation_tasks(const RunConfig& cfg) {
  if (!cfg.dataset_path.empty()) {
    auto tasks = load_dataset(cfg.dataset_path);
    if (tasks.size() > cfg.eval_tasks) tasks.resize(cfg.eval_tasks);
    return tasks;
  }
  return generate_synthetic_tasks(derive_seed(cfg.seed, {kEvalPool}), cfg.eval_tasks, cfg.n_clues_min,
                                  cfg.n_clues_max, {cfg.value_min, cfg.value_max});
}

EvalSettings evaluation_settings(const RunConfig& cfg) {
  EvalSettings s;
  s.k_shards = cfg.k_max;
  if (cfg.eval_unsolvable_m > 0) s.unsolvable_m = cfg.eval_unsolvable_m;
  s.seed = derive_seed(cfg.seed, {kEvalRollouts});
  s.workers = cfg.resolved_workers();
  return s;
}

ClientOptions client_options(const RunConfig& cfg) {
  ClientOptions o;
  o.endpoint = cfg.endpoint;
  o.model = cfg.model;
  o.temperature = cfg.temperature;
  o.timeout = std::chrono::milliseconds(static_cast<long long>(cfg.request_timeout_s * 1000.0));
  o.max_retries = cfg.max_retries;
  o.retry_base_delay = std::chrono::milliseconds(cfg.retry_base_delay_ms);
  o.max_in_flight = cfg.max_in_flight;
  if (const char* key = std::getenv(cfg.api_key_env.c_str())) o.api_key = key;
  return o;
}

std::unique_ptr<AbstentionJudge> make_judge(const RunConfig& cfg) {
  if (cfg.judge == "lenient") {
    return std::make_unique<PhraseJudge>(cfg.judge_phrases.empty() ? PhraseJudge::default_phrases()
                                                                   : cfg.judge_phrases);
  }
  if (cfg.judge == "remote") {
    auto opts = client_options(cfg);
    opts.endpoint = cfg.judge_endpoint.empty() ? cfg.endpoint : cfg.judge_endpoint;
    opts.model = cfg.judge_model;
    opts.temperature = 0.0;
    if (opts.endpoint.empty()) throw ConfigError("judge_endpoint", "remote judge needs an endpoint");
    return std::make_unique<RemoteJudge>(std::move(opts));
  }
  return std::make_unique<StrictJudge>();
}

TrainingResult run_training(const RunConfig& cfg) {
  validate(cfg);
  const auto pool = training_tasks(cfg);
  const auto workers = cfg.resolved_workers();
  const AdvantageOptions adv_opts{cfg.scale_advantages_by_std, 1e-8};

  RunWriter writer(cfg);
  TrainingResult result;
  result.params = PolicyParams::zeros(cfg.feature_mode);
  CurriculumState state = new_state(cfg.k_max, cfg.threshold_ratio, cfg.window, cfg.randomized_max_steps);

  bool finished = false;
  std::size_t step = 0;
  while (!finished && step < cfg.max_steps) {
    ++step;
    const auto started = std::chrono::steady_clock::now();
    const Stage stage = state.stage;
    const std::size_t k = sample_difficulty(state, derive_seed(cfg.seed, {kDifficulty, step})).k_for_step;
    const ToyPolicy policy(result.params, cfg.k_max);

    std::vector<CellResult> cells(cfg.batch_size);
    parallel_for(cfg.batch_size, workers, [&](std::size_t j) {
      cells[j] = run_cell(cfg, policy, pool, stage, k, derive_seed(cfg.seed, {kTaskDraw, step, j}));
    });

    StepLogRecord rec;
    rec.step = step;
    rec.stage = stage;
    rec.k = k;
    std::vector<RolloutGroup> groups;
    double sum = 0.0, sum_solv = 0.0, sum_unsolv = 0.0;
    std::size_t n = 0;
    for (auto& cell : cells) {
      rec.failed_rollouts += cell.failed;
      const bool unsolvable = cell.kind == RolloutKind::UnsolvableMulti;
      for (const auto& t : cell.survivors) {
        sum += *t.terminal_reward;
        (unsolvable ? sum_unsolv : sum_solv) += *t.terminal_reward;
        ++n;
        ++(unsolvable ? rec.unsolvable_rollouts : rec.solvable_rollouts);
      }
      if (cell.survivors.size() < 2) {
        if (!cell.survivors.empty() || cell.failed > 0) ++rec.dropped_groups;
        continue;
      }
      const std::string id = cell.survivors.front().task_id;
      groups.push_back(make_group(id, std::move(cell.survivors), adv_opts));
    }
    rec.mean_reward = n > 0 ? sum / static_cast<double>(n) : 0.0;
    if (rec.solvable_rollouts > 0) rec.mean_reward_solvable = sum_solv / static_cast<double>(rec.solvable_rollouts);
    if (rec.unsolvable_rollouts > 0) {
      rec.mean_reward_unsolvable = sum_unsolv / static_cast<double>(rec.unsolvable_rollouts);
    }

    const Eigen::VectorXd grad = batch_gradient(groups, result.params);
    rec.gradient_norm = grad.norm();
    try {
      result.params = apply_update(result.params, grad, cfg.learning_rate);
      if (!result.params.theta.allFinite()) throw ArgumentError("update produced non-finite parameters");
    } catch (const ArgumentError& e) {
      writer.checkpoint("abort.json", result.params, state, step);
      throw TrainingAborted("step " + std::to_string(step) + ": " + e.what());
    }

    record_step_reward(state, rec.mean_reward);
    rec.moving_average = state.reward_window.mean();
    const auto decision = advance(state);
    finished = decision.finished;
    rec.threshold = state.threshold;
    rec.curriculum = state;
    rec.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();

    if (state.stage != stage) {
      writer.checkpoint(checkpoint_name(step, stage), result.params, state, step);
      if (state.stage == Stage::RandomizedTraining) result.stage3_entered_at = step;
    }
    writer.step(rec);
    result.log.push_back(std::move(rec));
  }
  result.hit_step_limit = !finished;
  result.final_state = state;
  writer.checkpoint("final.json", result.params, state, step);

  const auto eval_tasks = evaluation_tasks(cfg);
  const ToyPolicy final_policy(result.params, cfg.k_max);
  const auto judge = make_judge(cfg);
  result.final_report = evaluate(final_policy, eval_tasks, evaluation_settings(cfg), *judge);
  writer.report(result.final_report);
  return result;
}

EvalReport run_evaluation(const RunConfig& cfg, const std::optional<fs::path>& checkpoint,
                          const std::optional<std::string>& endpoint) {
  if (checkpoint.has_value() == endpoint.has_value()) {
    throw ConfigError("", "evaluation needs exactly one of a checkpoint or an endpoint");
  }
  std::unique_ptr<Policy> policy;
  if (checkpoint) {
    policy = std::make_unique<ToyPolicy>(load_params(*checkpoint), cfg.k_max);
  } else {
    auto opts = client_options(cfg);
    opts.endpoint = *endpoint;
    policy = std::make_unique<RemotePolicy>(std::move(opts), cfg.system_prompt);
  }
  const auto tasks = evaluation_tasks(cfg);
  const auto judge = make_judge(cfg);
  auto settings = evaluation_settings(cfg);
  if (endpoint) settings.workers = std::min(settings.workers, cfg.max_in_flight);
  auto report = evaluate(*policy, tasks, settings, *judge);
  report.config["policy"] = checkpoint ? "checkpoint:" + checkpoint->string() : "endpoint:" + *endpoint;
  if (!cfg.out_dir.empty()) {
    fs::create_directories(cfg.out_dir);
    std::ofstream(fs::path(cfg.out_dir) / "eval_report.json", std::ios::binary) << to_json(report).dump(2) << '\n';
    std::ofstream(fs::path(cfg.out_dir) / "eval_report.txt", std::ios::binary) << render_table(report);
  }
  return report;
}

}  // namespace rlaar
