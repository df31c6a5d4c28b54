#include "rlaar/eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "rlaar/errors.hpp"
#include "rlaar/parallel.hpp"
#include "rlaar/random.hpp"
#include "rlaar/reward.hpp"

namespace rlaar {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

enum class Outcome { Success, Miss, Failure, Skipped };

struct TaskOutcomes {
  Outcome concat = Outcome::Skipped;
  Outcome sharded = Outcome::Skipped;
  Outcome unsolvable = Outcome::Skipped;
};

void tally(PassCounts& counts, Outcome o) {
  if (o == Outcome::Skipped) return;
  ++counts.total;
  if (o == Outcome::Success) ++counts.successes;
  if (o == Outcome::Failure) ++counts.failures;
}

double percent(const PassCounts& c) {
  return c.total == 0 ? 0.0 : 100.0 * static_cast<double>(c.successes) / static_cast<double>(c.total);
}

template <class Run>
Outcome guarded(Run&& run) {
  try {
    return run() ? Outcome::Success : Outcome::Miss;
  } catch (const RolloutError&) {
    return Outcome::Failure;
  }
}

nlohmann::json counts_json(const PassCounts& c) {
  return {{"total", c.total}, {"successes", c.successes}, {"failures", c.failures}};
}

}  // namespace

bool StrictJudge::judge(std::string_view response) const { return verify_abstention(response); }

PhraseJudge::PhraseJudge(std::vector<std::string> phrases) {
  for (const auto& p : phrases) lowered_.push_back(lower(p));
}

std::vector<std::string> PhraseJudge::default_phrases() {
  return {"abstain", "cannot be determined", "not enough information", "insufficient information",
          "need more information"};
}

bool PhraseJudge::judge(std::string_view response) const {
  if (verify_abstention(response)) return true;
  const auto text = lower(response);
  return std::any_of(lowered_.begin(), lowered_.end(),
                     [&](const std::string& p) { return text.find(p) != std::string::npos; });
}

double lic_score(double sharded_acc, double concat_acc) {
  if (!(concat_acc > 0.0)) throw UndefinedMetricError("LiC score is undefined when Concat accuracy is 0");
  return std::round(1000.0 * sharded_acc / concat_acc) / 10.0;
}

double abstain_score(std::size_t abstained, std::size_t total) {
  if (total == 0) throw UndefinedMetricError("Abstain score is undefined without unsolvable episodes");
  return 100.0 * static_cast<double>(abstained) / static_cast<double>(total);
}

EvalReport evaluate(const Policy& policy, std::span<const Task> tasks, const EvalSettings& settings,
                    const AbstentionJudge& judge) {
  if (tasks.empty()) throw ArgumentError("evaluate: empty task list");
  if (settings.k_shards < 2) throw ArgumentError("evaluate: k_shards must be >= 2");

  std::vector<TaskOutcomes> outcomes(tasks.size());
  const std::size_t workers = policy.concurrent_safe() ? settings.workers : 1;
  parallel_for(tasks.size(), workers, [&](std::size_t i) {
    const Task& task = tasks[i];
    auto& out = outcomes[i];
    if (!task.solvable) {
      out.unsolvable = guarded([&] {
        auto t = unsolvable_multi_rollout(policy, task, derive_seed(settings.seed, {3, i}));
        return judge.judge(t.terminal_action().text);
      });
      return;
    }
    out.concat = guarded([&] {
      auto t = solvable_single_rollout(policy, task, derive_seed(settings.seed, {1, i}));
      return terminal_reward(t, task).value > 0.0;
    });
    const std::size_t k = std::min(settings.k_shards, task.total_shards);
    if (k < 2) {
      out.sharded = out.unsolvable = Outcome::Failure;
      return;
    }
    out.sharded = guarded([&] {
      auto t = solvable_multi_rollout(policy, task, k, derive_seed(settings.seed, {2, i}));
      return terminal_reward(t, task).value > 0.0;
    });
    const std::size_t m = settings.unsolvable_m ? std::min(*settings.unsolvable_m, k - 1)
                                                : draw_truncation(k, derive_seed(settings.seed, {4, i}));
    out.unsolvable = guarded([&] {
      const Task view = truncate_task(task, k, m);
      auto t = unsolvable_multi_rollout(policy, view, derive_seed(settings.seed, {3, i}));
      return judge.judge(t.terminal_action().text);
    });
  });

  EvalReport report;
  for (const auto& o : outcomes) {
    tally(report.concat, o.concat);
    tally(report.sharded, o.sharded);
    tally(report.unsolvable, o.unsolvable);
  }
  report.concat_accuracy = percent(report.concat);
  report.sharded_accuracy = percent(report.sharded);
  if (report.concat_accuracy > 0.0) report.lic_score = lic_score(report.sharded_accuracy, report.concat_accuracy);
  if (report.unsolvable.total > 0) {
    report.abstain_score = abstain_score(report.unsolvable.successes, report.unsolvable.total);
  }
  report.config = {{"k_shards", settings.k_shards},
                   {"unsolvable_m", settings.unsolvable_m ? nlohmann::json(*settings.unsolvable_m)
                                                          : nlohmann::json("uniform")},
                   {"seed", settings.seed},
                   {"judge", judge.name()},
                   {"n_tasks", tasks.size()}};
  return report;
}

nlohmann::json to_json(const EvalReport& r) {
  return {{"concat_accuracy", r.concat_accuracy},
          {"sharded_accuracy", r.sharded_accuracy},
          {"lic_score", r.lic_score ? nlohmann::json(*r.lic_score) : nlohmann::json(nullptr)},
          {"abstain_score", r.abstain_score},
          {"counts",
           {{"concat", counts_json(r.concat)},
            {"sharded", counts_json(r.sharded)},
            {"unsolvable", counts_json(r.unsolvable)}}},
          {"config", r.config}};
}

std::string render_table(const EvalReport& r) {
  char lic[16];
  if (r.lic_score) std::snprintf(lic, sizeof lic, "%.1f", *r.lic_score);
  else std::snprintf(lic, sizeof lic, "%s", "n/a");
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%-10s %-10s %-10s %-10s\n"
                "%-10.1f %-10.1f %-10s %-10.1f\n"
                "(concat %zu/%zu, sharded %zu/%zu, abstained %zu/%zu, failed rollouts %zu)\n",
                "Concat", "Sharded", "LiC", "Abstain", r.concat_accuracy, r.sharded_accuracy, lic,
                r.abstain_score, r.concat.successes, r.concat.total, r.sharded.successes, r.sharded.total,
                r.unsolvable.successes, r.unsolvable.total,
                r.concat.failures + r.sharded.failures + r.unsolvable.failures);
  return buf;
}

}  // namespace rlaar
