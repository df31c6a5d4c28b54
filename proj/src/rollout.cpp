#include "rlaar/rollout.hpp"

#include <exception>

#include "rlaar/errors.hpp"
#include "rlaar/random.hpp"

namespace rlaar {
namespace {

Action checked_act(const Policy& policy, const Context& context, std::uint64_t seed,
                   const std::string& task_id, std::size_t turn) {
  try {
    return policy.act(context, seed);
  } catch (const std::exception& e) {
    throw RolloutError(task_id, turn, e.what());
  }
}

// Runs the on-policy loop: each sampled action is appended to the context
// before the next shard is revealed.
Trajectory multi_turn(const Policy& policy, const ShardSequence& shards, RolloutKind kind,
                      const std::string& task_id, std::size_t k_shards, std::uint64_t seed) {
  Trajectory traj;
  traj.kind = kind;
  traj.task_id = task_id;
  traj.k_shards = k_shards;
  traj.pairs.reserve(shards.size());

  Context context;
  context.turns.push_back({Role::User, shards.front().text});
  for (std::size_t k = 1; k <= shards.size(); ++k) {
    Action action = checked_act(policy, context, derive_seed(seed, {k}), task_id, k);
    traj.pairs.push_back({context, action});
    if (k < shards.size()) {
      context.turns.push_back({Role::Assistant, std::move(action.text)});
      context.turns.push_back({Role::User, shards[k].text});
    }
  }
  return traj;
}

}  // namespace

const char* to_string(RolloutKind kind) noexcept {
  switch (kind) {
    case RolloutKind::SolvableSingle: return "solvable_single";
    case RolloutKind::SolvableMulti: return "solvable_multi";
    case RolloutKind::UnsolvableMulti: return "unsolvable_multi";
  }
  return "unknown";
}

Context build_context(std::span<const Shard> shards, std::span<const Action> actions, std::size_t k) {
  if (k == 0 || k > shards.size()) throw ArgumentError("build_context: k out of range");
  if (actions.size() + 1 < k) {
    throw ArgumentError("build_context: need " + std::to_string(k - 1) + " actions, got " +
                        std::to_string(actions.size()));
  }
  Context c;
  c.turns.reserve(2 * k - 1);
  for (std::size_t i = 0; i < k; ++i) {
    if (i > 0) c.turns.push_back({Role::Assistant, actions[i - 1].text});
    c.turns.push_back({Role::User, shards[i].text});
  }
  return c;
}

Trajectory solvable_single_rollout(const Policy& policy, const Task& task, std::uint64_t seed) {
  if (!task.solvable) throw ArgumentError("solvable_single_rollout: task '" + task.id + "' is unsolvable");
  const ShardSequence whole{{1, task.full_question, ShardKind::Question}};
  return multi_turn(policy, whole, RolloutKind::SolvableSingle, task.id, 1, seed);
}

Trajectory solvable_multi_rollout(const Policy& policy, const Task& task, std::size_t k_shards,
                                  std::uint64_t seed) {
  if (k_shards < 2) throw ArgumentError("solvable_multi_rollout: k_shards must be >= 2");
  const auto shards = shard_question(task, k_shards, false, std::nullopt, seed);
  return multi_turn(policy, shards, RolloutKind::SolvableMulti, task.id, k_shards, seed);
}

Trajectory unsolvable_multi_rollout(const Policy& policy, const Task& task, std::size_t k_shards,
                                    std::size_t m_turns, std::uint64_t seed) {
  const auto shards = shard_question(task, k_shards, true, m_turns, seed);
  return multi_turn(policy, shards, RolloutKind::UnsolvableMulti, task.id, k_shards, seed);
}

Trajectory unsolvable_multi_rollout(const Policy& policy, const Task& task, std::size_t m_turns,
                                    std::uint64_t seed) {
  return unsolvable_multi_rollout(policy, task, task.total_shards, m_turns, seed);
}

Trajectory unsolvable_multi_rollout(const Policy& policy, const Task& truncated, std::uint64_t seed) {
  if (truncated.solvable) {
    throw ArgumentError("unsolvable_multi_rollout: task '" + truncated.id + "' is not truncated");
  }
  validate(truncated);
  return multi_turn(policy, truncated.shards, RolloutKind::UnsolvableMulti, truncated.id,
                    truncated.total_shards, seed);
}

}  // namespace rlaar
