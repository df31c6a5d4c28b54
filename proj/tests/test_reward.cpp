#include <gtest/gtest.h>

#include <random>
#include <stack>

#include "rlaar/errors.hpp"
#include "rlaar/reward.hpp"
#include "support/stubs.hpp"

namespace rlaar {
namespace {

// Oracle: pair every brace with a stack over the whole string, then take the
// \boxed{ with the largest start whose brace found a partner.
std::optional<std::string> brute_last_boxed(const std::string& text) {
  std::vector<long> partner(text.size(), -1);
  std::stack<std::size_t> open;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '{') open.push(i);
    if (text[i] == '}' && !open.empty()) {
      partner[open.top()] = static_cast<long>(i);
      open.pop();
    }
  }
  const std::string key = "\\boxed{";
  std::optional<std::string> best;
  for (std::size_t s = 0; s + key.size() <= text.size(); ++s) {
    if (text.compare(s, key.size(), key) != 0) continue;
    const auto brace = s + key.size() - 1;
    if (partner[brace] < 0) continue;
    std::string body = text.substr(brace + 1, static_cast<std::size_t>(partner[brace]) - brace - 1);
    const auto a = body.find_first_not_of(" \t\r\n");
    const auto b = body.find_last_not_of(" \t\r\n");
    best = a == std::string::npos ? std::string{} : body.substr(a, b - a + 1);
  }
  return best;
}

Task solvable(const std::string& gt) {
  Task t;
  t.id = "t";
  t.ground_truth = gt;
  t.shards = {{1, "q", ShardKind::Question}};
  t.full_question = "q";
  return t;
}

Trajectory ending_with(const std::string& text, RolloutKind kind, const std::string& id) {
  Trajectory t;
  t.kind = kind;
  t.task_id = id;
  t.pairs.push_back({Context{{{Role::User, "q"}}}, Action{text, {}, {}, {}, {}}});
  return t;
}

TEST(ExtractBoxed, Examples) {
  EXPECT_EQ(extract_boxed("the sum is \\boxed{12}"), "12");
  EXPECT_EQ(extract_boxed("first \\boxed{3} then \\boxed{7}"), "7");
  EXPECT_EQ(brute_last_boxed("first \\boxed{3} then \\boxed{7}"), "7");
  EXPECT_EQ(extract_boxed("no box here"), std::nullopt);
  EXPECT_EQ(extract_boxed("\\boxed{  41 }"), "41");
  EXPECT_EQ(extract_boxed("\\boxed{\\frac{1}{2}}"), "\\frac{1}{2}");
  EXPECT_EQ(extract_boxed("\\boxed{7} and an open \\boxed{8"), "7");
}

TEST(ExtractBoxed, MatchesBruteScan) {
  const std::vector<std::string> atoms{"\\boxed{", "}", "{", "1", "Abstain", " ", "x", "\\boxed{2}", "\\box"};
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 5000; ++trial) {
    std::string s;
    const int len = static_cast<int>(gen() % 12);
    for (int i = 0; i < len; ++i) s += atoms[gen() % atoms.size()];
    ASSERT_EQ(extract_boxed(s), brute_last_boxed(s)) << s;
  }
}

TEST(CanonicalInteger, Forms) {
  EXPECT_EQ(canonical_integer("041"), 41);
  EXPECT_EQ(canonical_integer(" +7 "), 7);
  EXPECT_EQ(canonical_integer("-003"), -3);
  EXPECT_EQ(canonical_integer("-0"), 0);
  EXPECT_EQ(canonical_integer("9223372036854775807"), INT64_MAX);
  EXPECT_EQ(canonical_integer("-9223372036854775808"), INT64_MIN);
  EXPECT_EQ(canonical_integer("9223372036854775808"), std::nullopt);
  EXPECT_EQ(canonical_integer("1.5"), std::nullopt);
  EXPECT_EQ(canonical_integer("+"), std::nullopt);
  EXPECT_EQ(canonical_integer("--1"), std::nullopt);
  EXPECT_EQ(canonical_integer(""), std::nullopt);
}

TEST(VerifyAccuracy, Examples) {
  EXPECT_TRUE(verify_accuracy("\\boxed{42}", solvable("42")));
  EXPECT_TRUE(verify_accuracy("\\boxed{041}", solvable("41")));
  EXPECT_FALSE(verify_accuracy("I think 42", solvable("42")));
  EXPECT_FALSE(verify_accuracy("\\boxed{-42}", solvable("42")));
  EXPECT_TRUE(verify_accuracy("\\boxed{ x+1 }", solvable("x+1")));
}

TEST(VerifyAccuracy, CanonicalizationAgreesWithIntegerParse) {
  std::mt19937_64 gen(9);
  for (int i = 0; i < 2000; ++i) {
    const long long v = static_cast<long long>(gen() % 20001) - 10000;
    const int zeros = static_cast<int>(gen() % 3);
    std::string body = std::to_string(v < 0 ? -v : v);
    body.insert(0, static_cast<std::size_t>(zeros), '0');
    if (v < 0) body.insert(0, "-");
    else if (gen() % 2) body.insert(0, "+");
    EXPECT_TRUE(verify_accuracy("\\boxed{" + body + "}", solvable(std::to_string(v)))) << body;
    EXPECT_FALSE(verify_accuracy("\\boxed{" + body + "}", solvable(std::to_string(v + 1)))) << body;
  }
}

TEST(VerifyAbstention, Examples) {
  EXPECT_TRUE(verify_abstention("\\boxed{Abstain}"));
  EXPECT_TRUE(verify_abstention("hmm \\boxed{3} no wait \\boxed{ Abstain }"));
  EXPECT_FALSE(verify_abstention("\\boxed{abstain}"));
  EXPECT_FALSE(verify_abstention("I must abstain."));
  EXPECT_FALSE(verify_abstention("\\boxed{Abstain} actually \\boxed{4}"));
}

TEST(TerminalReward, Examples) {
  Task t = solvable("12");
  auto traj = ending_with("\\boxed{12}", RolloutKind::SolvableMulti, "t");
  auto r = terminal_reward(traj, t);
  EXPECT_EQ(r.value, 1.0);
  EXPECT_EQ(r.verifier_used, Verifier::Accuracy);
  EXPECT_EQ(traj.terminal_reward, 1.0);

  auto abstained = ending_with("\\boxed{Abstain}", RolloutKind::SolvableMulti, "t");
  r = terminal_reward(abstained, t);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.verifier_used, Verifier::Accuracy);

  Task u = truncate_task(generate_synthetic_task(1, 3, {1, 9}), 4, 2);
  auto cut = ending_with("\\boxed{Abstain}", RolloutKind::UnsolvableMulti, u.id);
  r = terminal_reward(cut, u);
  EXPECT_EQ(r.value, 1.0);
  EXPECT_EQ(r.verifier_used, Verifier::Abstention);
}

TEST(TerminalReward, TruthTable) {
  const Task base = generate_synthetic_task(3, 3, {1, 9});
  const Task cut = truncate_task(base, 4, 2);
  const std::string correct = "\\boxed{" + base.ground_truth + "}";
  const std::string wrong = "\\boxed{" + std::to_string(std::stoll(base.ground_truth) + 1) + "}";
  const std::vector<std::string> responses{correct, wrong, "\\boxed{Abstain}", "}{ garbage \\boxed"};
  const std::vector<double> want_solvable{1, 0, 0, 0};
  const std::vector<double> want_unsolvable{0, 0, 1, 0};
  for (std::size_t i = 0; i < responses.size(); ++i) {
    auto a = ending_with(responses[i], RolloutKind::SolvableMulti, base.id);
    EXPECT_EQ(terminal_reward(a, base).value, want_solvable[i]) << responses[i];
    auto s = ending_with(responses[i], RolloutKind::SolvableSingle, base.id);
    EXPECT_EQ(terminal_reward(s, base).value, want_solvable[i]) << responses[i];
    auto b = ending_with(responses[i], RolloutKind::UnsolvableMulti, cut.id);
    EXPECT_EQ(terminal_reward(b, cut).value, want_unsolvable[i]) << responses[i];
  }
}

TEST(TerminalReward, AbstentionIsTaskAgnostic) {
  const std::vector<std::string> responses{"\\boxed{Abstain}", "\\boxed{5}", "nothing"};
  for (const auto& text : responses) {
    std::optional<double> first;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Task cut = truncate_task(generate_synthetic_task(s, 2 + s % 3, {1, 9}), 2 + s % 3, 1);
      auto traj = ending_with(text, RolloutKind::UnsolvableMulti, cut.id);
      const double v = terminal_reward(traj, cut).value;
      if (!first) first = v;
      EXPECT_EQ(v, *first);
    }
  }
}

TEST(TerminalReward, RejectsMismatchedKind) {
  const Task base = generate_synthetic_task(3, 3, {1, 9});
  auto traj = ending_with("\\boxed{Abstain}", RolloutKind::UnsolvableMulti, base.id);
  EXPECT_THROW(terminal_reward(traj, base), ContractError);
  const Task cut = truncate_task(base, 4, 2);
  auto solv = ending_with("\\boxed{Abstain}", RolloutKind::SolvableMulti, cut.id);
  EXPECT_THROW(terminal_reward(solv, cut), ContractError);
  auto other = ending_with("\\boxed{1}", RolloutKind::SolvableMulti, "someone-else");
  EXPECT_THROW(terminal_reward(other, base), ContractError);
  Trajectory empty;
  empty.task_id = base.id;
  EXPECT_THROW(terminal_reward(empty, base), ArgumentError);
}

class NeverVerifier final : public AccuracyVerifier {
 public:
  bool verify(std::string_view, const Task&) const override { return false; }
};

TEST(TerminalReward, UsesSuppliedAccuracyVerifier) {
  const Task base = generate_synthetic_task(3, 3, {1, 9});
  auto traj = ending_with("\\boxed{" + base.ground_truth + "}", RolloutKind::SolvableMulti, base.id);
  EXPECT_EQ(terminal_reward(traj, base, NeverVerifier{}).value, 0.0);
}

}  // namespace
}  // namespace rlaar
