#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rlaar/rollout.hpp"
#include "rlaar/task.hpp"

namespace rlaar {

/// Decides whether a response abstains.
class AbstentionJudge {
 public:
  virtual ~AbstentionJudge() = default;
  virtual bool judge(std::string_view response) const = 0;
  virtual std::string name() const = 0;
};

/// Exactly the training-side abstention verifier: last \boxed{} must be "Abstain".
class StrictJudge final : public AbstentionJudge {
 public:
  bool judge(std::string_view response) const override;
  std::string name() const override { return "strict"; }
};

/// Accepts the strict token or any of `phrases` (case-insensitive substring).
class PhraseJudge final : public AbstentionJudge {
 public:
  explicit PhraseJudge(std::vector<std::string> phrases = default_phrases());
  bool judge(std::string_view response) const override;
  std::string name() const override { return "lenient"; }

  static std::vector<std::string> default_phrases();

 private:
  std::vector<std::string> lowered_;
};

/// 100 * sharded / concat, rounded to one decimal. Throws UndefinedMetricError
/// when concat is 0.
double lic_score(double sharded_acc, double concat_acc);

/// 100 * abstained / total. Throws UndefinedMetricError when total is 0.
double abstain_score(std::size_t abstained, std::size_t total);

struct PassCounts {
  std::size_t total = 0;
  std::size_t successes = 0;
  std::size_t failures = 0;  ///< rollouts that errored (also counted in total)
};

struct EvalSettings {
  std::size_t k_shards = 5;
  /// Fixed truncation depth; unset draws M uniformly on [1, K-1] per task.
  std::optional<std::size_t> unsolvable_m;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
};

struct EvalReport {
  double concat_accuracy = 0.0;   ///< percent
  double sharded_accuracy = 0.0;  ///< percent
  std::optional<double> lic_score;  ///< percent; unset when Concat accuracy is 0
  double abstain_score = 0.0;     ///< percent
  PassCounts concat;
  PassCounts sharded;
  PassCounts unsolvable;
  nlohmann::json config = nlohmann::json::object();
};

/// Concat, Sharded and Unsolvable passes over `tasks`. Solvable tasks feed
/// all three passes (truncated for the third); already-truncated tasks feed
/// only the Unsolvable pass. Rollout errors count as failures.
EvalReport evaluate(const Policy& policy, std::span<const Task> tasks, const EvalSettings& settings,
                    const AbstentionJudge& judge);

nlohmann::json to_json(const EvalReport& report);
/// Aligned text table: Concat | Sharded | LiC | Abstain.
std::string render_table(const EvalReport& report);

}  // namespace rlaar
