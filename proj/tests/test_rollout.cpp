#include <gtest/gtest.h>

#include "rlaar/errors.hpp"
#include "rlaar/random.hpp"
#include "rlaar/rollout.hpp"
#include "rlaar/toy_policy.hpp"
#include "support/rollout_checks.hpp"
#include "support/stubs.hpp"

namespace rlaar {
namespace {

using testing::AbstainPolicy;
using testing::CountingPolicy;
using testing::FailingPolicy;
using testing::ScriptedPolicy;

std::vector<Action> texts(std::initializer_list<const char*> items) {
  std::vector<Action> out;
  for (const char* t : items) out.push_back({t, {}, {}, {}, {}});
  return out;
}

TEST(BuildContext, BaseCase) {
  const Task t = generate_synthetic_task(1, 3, {1, 9});
  const Context c = build_context(t.shards, {}, 1);
  ASSERT_EQ(c.turns.size(), 1u);
  EXPECT_EQ(c.turns[0].text, t.shards[0].text);
  EXPECT_EQ(c.user_turns(), 1u);
}

TEST(BuildContext, Alternates) {
  const Task t = generate_synthetic_task(1, 3, {1, 9});
  const auto actions = texts({"a1", "a2"});
  const Context c = build_context(t.shards, actions, 3);
  const std::vector<Turn> want{{Role::User, t.shards[0].text}, {Role::Assistant, "a1"},
                               {Role::User, t.shards[1].text}, {Role::Assistant, "a2"},
                               {Role::User, t.shards[2].text}};
  EXPECT_EQ(c.turns, want);
}

TEST(BuildContext, Recurrence) {
  const Task t = generate_synthetic_task(2, 4, {1, 9});
  const auto actions = texts({"a1", "a2", "a3", "a4"});
  for (std::size_t k = 1; k < t.shards.size(); ++k) {
    Context c = build_context(t.shards, actions, k);
    c.turns.push_back({Role::Assistant, actions[k - 1].text});
    c.turns.push_back({Role::User, t.shards[k].text});
    EXPECT_EQ(c, build_context(t.shards, actions, k + 1));
  }
}

TEST(BuildContext, RejectsMissingActions) {
  const Task t = generate_synthetic_task(1, 3, {1, 9});
  EXPECT_THROW(build_context(t.shards, texts({"a1"}), 3), ArgumentError);
  EXPECT_THROW(build_context(t.shards, {}, 0), ArgumentError);
  EXPECT_THROW(build_context(t.shards, texts({"a", "b", "c", "d"}), 5), ArgumentError);
}

TEST(SolvableSingle, SeesFullQuestion) {
  const Task t = generate_synthetic_task(5, 2, {1, 9});
  const ToyPolicy policy(PolicyParams::zeros(FeatureMode::Rich), 5);
  const auto traj = solvable_single_rollout(policy, t, 11);
  ASSERT_EQ(traj.pairs.size(), 1u);
  EXPECT_EQ(traj.kind, RolloutKind::SolvableSingle);
  EXPECT_EQ(traj.pairs[0].context.turns.size(), 1u);
  EXPECT_EQ(traj.pairs[0].context.turns[0].text, t.full_question);
  EXPECT_EQ(traj.task_id, t.id);
}

TEST(SolvableSingle, AbstainStub) {
  const AbstainPolicy policy;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Task t = generate_synthetic_task(s, 1 + s % 5, {1, 9});
    const auto traj = solvable_single_rollout(policy, t, s);
    ASSERT_EQ(traj.pairs.size(), 1u);
    EXPECT_EQ(traj.terminal_action().text, "\\boxed{Abstain}");
  }
}

TEST(SolvableMulti, CarriesActionsVerbatim) {
  const Task t = generate_synthetic_task(3, 2, {1, 9});
  const ScriptedPolicy policy({"ok1", "ok2", "\\boxed{12}"});
  const auto traj = solvable_multi_rollout(policy, t, 3, 0);
  ASSERT_EQ(traj.pairs.size(), 3u);
  const auto& last = traj.pairs[2].context.turns;
  EXPECT_EQ(last[1].text, "ok1");
  EXPECT_EQ(last[3].text, "ok2");
  EXPECT_EQ(traj.terminal_action().text, "\\boxed{12}");
  EXPECT_EQ(testing::check_accumulation(traj), "");
}

TEST(SolvableMulti, ToyPolicyActionSpace) {
  for (std::uint64_t s = 0; s < 50; ++s) {
    const Task t = generate_synthetic_task(s, 1, {1, 9});
    const ToyPolicy policy(PolicyParams::zeros(FeatureMode::Rich), 5);
    const auto traj = solvable_multi_rollout(policy, t, 2, s);
    ASSERT_EQ(traj.pairs.size(), 2u);
    const auto& a = traj.terminal_action();
    ASSERT_TRUE(a.structured.has_value());
    if (a.structured->is_answer()) {
      EXPECT_EQ(a.structured->value, t.clue_values[0]);
      EXPECT_EQ(a.text, "\\boxed{" + t.ground_truth + "}");
    } else {
      EXPECT_EQ(a.text, "\\boxed{Abstain}");
    }
  }
}

TEST(SolvableMulti, RejectsSingleShard) {
  const Task t = generate_synthetic_task(3, 2, {1, 9});
  EXPECT_THROW(solvable_multi_rollout(AbstainPolicy{}, t, 1, 0), ArgumentError);
  EXPECT_THROW(solvable_multi_rollout(AbstainPolicy{}, t, 4, 0), ArgumentError);
}

TEST(UnsolvableMulti, StopsAfterM) {
  const Task t = generate_synthetic_task(9, 3, {1, 9});
  const auto traj = unsolvable_multi_rollout(AbstainPolicy{}, t, 2, 0);
  EXPECT_EQ(traj.kind, RolloutKind::UnsolvableMulti);
  ASSERT_EQ(traj.pairs.size(), 2u);
  EXPECT_EQ(traj.pairs[1].context.latest_user_text(), t.shards[1].text);
  EXPECT_EQ(t.shards[1].text, clue_text(t.clue_values[0]));

  const auto one = unsolvable_multi_rollout(AbstainPolicy{}, t, 1, 0);
  ASSERT_EQ(one.pairs.size(), 1u);
  EXPECT_EQ(one.pairs[0].context.turns[0].text, t.shards[0].text);
}

TEST(UnsolvableMulti, PreTruncatedTask) {
  const Task t = generate_synthetic_task(9, 3, {1, 9});
  const Task cut = truncate_task(t, 4, 3);
  const auto traj = unsolvable_multi_rollout(AbstainPolicy{}, cut, 0);
  EXPECT_EQ(traj.pairs.size(), 3u);
  EXPECT_EQ(traj.k_shards, 4u);
  EXPECT_THROW(unsolvable_multi_rollout(AbstainPolicy{}, t, 0), ArgumentError);
}

TEST(UnsolvableMulti, RejectsFullDepth) {
  const Task t = generate_synthetic_task(9, 3, {1, 9});
  EXPECT_THROW(unsolvable_multi_rollout(AbstainPolicy{}, t, 4, 0), ArgumentError);
}

TEST(Rollout, OneActCallPerTurn) {
  const Task t = generate_synthetic_task(4, 4, {1, 9});
  CountingPolicy p;
  solvable_single_rollout(p, t, 0);
  EXPECT_EQ(p.calls.load(), 1);
  solvable_multi_rollout(p, t, 5, 0);
  EXPECT_EQ(p.calls.load(), 6);
  unsolvable_multi_rollout(p, t, 5, 3, 0);
  EXPECT_EQ(p.calls.load(), 9);
}

TEST(Rollout, FailureNamesTaskAndTurn) {
  const Task t = generate_synthetic_task(4, 4, {1, 9});
  try {
    solvable_multi_rollout(FailingPolicy(3), t, 5, 0);
    FAIL() << "expected RolloutError";
  } catch (const RolloutError& e) {
    EXPECT_EQ(e.task_id(), t.id);
    EXPECT_EQ(e.turn(), 3u);
  }
}

TEST(Rollout, SeededReproducibility) {
  const Task t = generate_synthetic_task(4, 4, {1, 9});
  PolicyParams p = PolicyParams::zeros(FeatureMode::Rich);
  const ToyPolicy policy(p, 5);
  const auto a = solvable_multi_rollout(policy, t, 5, 77);
  const auto b = solvable_multi_rollout(policy, t, 5, 77);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(a.pairs[k].action.text, b.pairs[k].action.text);
    EXPECT_EQ(a.pairs[k].action.logprob, b.pairs[k].action.logprob);
  }
}

// Structure over 1000 randomized tasks, every kind, every legal K and M.
TEST(RolloutProperty, StructureOverRandomTasks) {
  const CountingPolicy policy;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    Rng rng(derive_seed(2024, {i}));
    const auto n = static_cast<std::size_t>(rng.uniform_int(1, 7));
    const Task t = generate_synthetic_task(derive_seed(99, {i}), n, {-9, 30});
    const auto k = static_cast<std::size_t>(rng.uniform_int(2, static_cast<std::int64_t>(t.total_shards)));
    const auto m = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(k) - 1));

    const auto single = solvable_single_rollout(policy, t, i);
    EXPECT_EQ(testing::check_shape(single, t, k, m), "");
    const auto multi = solvable_multi_rollout(policy, t, k, i);
    EXPECT_EQ(testing::check_shape(multi, t, k, m), "");
    EXPECT_EQ(testing::check_accumulation(multi), "");
    const auto cut = unsolvable_multi_rollout(policy, t, k, m, i);
    EXPECT_EQ(testing::check_shape(cut, t, k, m), "");
    EXPECT_EQ(testing::check_accumulation(cut), "");
  }
}

}  // namespace
}  // namespace rlaar
