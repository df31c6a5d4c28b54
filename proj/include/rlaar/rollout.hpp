#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rlaar/task.hpp"

namespace rlaar {

enum class Role { User, Assistant };

struct Turn {
  Role role = Role::User;
  std::string text;

  friend bool operator==(const Turn&, const Turn&) = default;
};

/// c_k = (s_1, a_1, ..., s_{k-1}, a_{k-1}, s_k): strictly alternating, starting
/// and ending with a user shard.
struct Context {
  std::vector<Turn> turns;

  std::size_t user_turns() const noexcept { return (turns.size() + 1) / 2; }
  std::string_view latest_user_text() const { return turns.back().text; }

  friend bool operator==(const Context&, const Context&) = default;
};

/// Toy action space: abstain, or commit to an integer answer.
struct StructuredAction {
  enum class Type { Abstain, Answer };
  Type type = Type::Abstain;
  std::int64_t value = 0;

  static StructuredAction abstain() { return {Type::Abstain, 0}; }
  static StructuredAction answer(std::int64_t v) { return {Type::Answer, v}; }
  bool is_answer() const noexcept { return type == Type::Answer; }

  friend bool operator==(const StructuredAction&, const StructuredAction&) = default;
};

struct Action {
  std::string text;
  std::optional<double> logprob;                ///< absent for remote policies
  std::optional<StructuredAction> structured;   ///< toy policies only
  Eigen::VectorXd features;                     ///< feature vector the choice was made on (toy)
  std::optional<std::uint64_t> policy_fingerprint;  ///< parameters that produced it (toy)
};

enum class RolloutKind { SolvableSingle, SolvableMulti, UnsolvableMulti };

const char* to_string(RolloutKind kind) noexcept;

struct TrajectoryStep {
  Context context;
  Action action;
};

struct Trajectory {
  RolloutKind kind = RolloutKind::SolvableSingle;
  std::vector<TrajectoryStep> pairs;
  std::string task_id;
  std::size_t k_shards = 1;  ///< difficulty the rollout ran at
  std::optional<double> terminal_reward;

  const Action& terminal_action() const { return pairs.back().action; }
};

/// Anything that maps a context to an action. Implementations must not
/// mutate shared state in act() unless they report concurrent_safe() == false.
class Policy {
 public:
  virtual ~Policy() = default;
  /// `seed` drives any sampling so rollouts stay reproducible under concurrency.
  virtual Action act(const Context& context, std::uint64_t seed) const = 0;
  virtual bool concurrent_safe() const noexcept { return true; }
};

/// The alternating prefix ending at s_k. Needs at least k-1 actions.
Context build_context(std::span<const Shard> shards, std::span<const Action> actions, std::size_t k);

/// One turn whose only shard is the full question.
Trajectory solvable_single_rollout(const Policy& policy, const Task& task, std::uint64_t seed);

/// Reveals all `k_shards` shards of `task`, one per turn.
Trajectory solvable_multi_rollout(const Policy& policy, const Task& task, std::size_t k_shards,
                                  std::uint64_t seed);

/// Re-chunks `task` to `k_shards` and stops after the first `m_turns` shards.
Trajectory unsolvable_multi_rollout(const Policy& policy, const Task& task, std::size_t k_shards,
                                    std::size_t m_turns, std::uint64_t seed);

/// Same, at the task's native shard count.
Trajectory unsolvable_multi_rollout(const Policy& policy, const Task& task, std::size_t m_turns,
                                    std::uint64_t seed);

/// Reveals every shard of an already-truncated (unsolvable) task.
Trajectory unsolvable_multi_rollout(const Policy& policy, const Task& truncated, std::uint64_t seed);

}  // namespace rlaar
