#include "rlaar/reward.hpp"

#include <charconv>

#include "rlaar/errors.hpp"

namespace rlaar {
namespace {

constexpr std::string_view kBoxOpen = "\\boxed{";

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

const char* to_string(Verifier v) noexcept {
  return v == Verifier::Accuracy ? "accuracy" : "abstention";
}

std::optional<std::string> extract_boxed(std::string_view text) {
  std::optional<std::string> last;
  for (auto start = text.find(kBoxOpen); start != std::string_view::npos;
       start = text.find(kBoxOpen, start + 1)) {
    const auto body = start + kBoxOpen.size();
    int depth = 1;
    auto pos = body;
    for (; pos < text.size() && depth > 0; ++pos) {
      if (text[pos] == '{') ++depth;
      else if (text[pos] == '}') --depth;
    }
    if (depth == 0) last = std::string(trim(text.substr(body, pos - 1 - body)));
  }
  return last;
}

std::optional<std::int64_t> canonical_integer(std::string_view text) {
  text = trim(text);
  bool negative = false;
  if (!text.empty() && (text.front() == '+' || text.front() == '-')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  if (text.empty()) return std::nullopt;
  std::uint64_t magnitude = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), magnitude);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  constexpr auto kMaxPos = static_cast<std::uint64_t>(INT64_MAX);
  if (magnitude > kMaxPos + (negative ? 1 : 0)) return std::nullopt;
  if (negative) return magnitude == kMaxPos + 1 ? INT64_MIN : -static_cast<std::int64_t>(magnitude);
  return static_cast<std::int64_t>(magnitude);
}

bool BoxedMathVerifier::verify(std::string_view answer_text, const Task& task) const {
  const auto boxed = extract_boxed(answer_text);
  if (!boxed) return false;
  const auto got = canonical_integer(*boxed);
  const auto want = canonical_integer(task.ground_truth);
  if (got && want) return *got == *want;
  // Non-integer ground truths fall back to exact trimmed comparison.
  return !got && !want && trim(*boxed) == trim(task.ground_truth);
}

bool verify_accuracy(std::string_view answer_text, const Task& task) {
  return BoxedMathVerifier{}.verify(answer_text, task);
}

bool verify_abstention(std::string_view answer_text) {
  const auto boxed = extract_boxed(answer_text);
  return boxed && *boxed == kAbstainToken;
}

RewardOutcome terminal_reward(Trajectory& trajectory, const Task& task,
                              const AccuracyVerifier& accuracy) {
  if (trajectory.pairs.empty()) throw ArgumentError("terminal_reward: empty trajectory");
  if (trajectory.task_id != task.id) {
    throw ContractError("terminal_reward: trajectory of '" + trajectory.task_id +
                        "' scored against task '" + task.id + "'");
  }
  const bool truncated_kind = trajectory.kind == RolloutKind::UnsolvableMulti;
  if (truncated_kind == task.solvable) {
    throw ContractError(std::string("terminal_reward: ") + to_string(trajectory.kind) +
                        " trajectory paired with a " + (task.solvable ? "solvable" : "unsolvable") +
                        " task '" + task.id + "'");
  }

  const auto& final_text = trajectory.terminal_action().text;
  RewardOutcome out;
  if (task.solvable) {
    out.verifier_used = Verifier::Accuracy;
    out.value = accuracy.verify(final_text, task) ? 1.0 : 0.0;
    out.detail = out.value > 0 ? "correct" : "incorrect or unboxed";
  } else {
    out.verifier_used = Verifier::Abstention;
    out.value = verify_abstention(final_text) ? 1.0 : 0.0;
    out.detail = out.value > 0 ? "abstained" : "did not abstain";
  }
  trajectory.terminal_reward = out.value;
  return out;
}

}  // namespace rlaar
