#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "rlaar/rollout.hpp"
#include "rlaar/task.hpp"

namespace rlaar {

/// The literal abstention token.
inline constexpr std::string_view kAbstainToken = "Abstain";

enum class Verifier { Accuracy, Abstention };

const char* to_string(Verifier v) noexcept;

struct RewardOutcome {
  double value = 0.0;  ///< exactly 0 or 1
  Verifier verifier_used = Verifier::Accuracy;
  std::string detail;
};

/// Decides whether a final answer solves a task. Code-execution checking
/// would be another implementation of this interface; only math ships.
class AccuracyVerifier {
 public:
  virtual ~AccuracyVerifier() = default;
  virtual bool verify(std::string_view answer_text, const Task& task) const = 0;
};

/// Accepts a final answer only when it is wrapped in \boxed{...} and equals
/// the ground truth after integer canonicalization.
class BoxedMathVerifier final : public AccuracyVerifier {
 public:
  bool verify(std::string_view answer_text, const Task& task) const override;
};

/// Content of the last balanced \boxed{...}, whitespace-trimmed.
std::optional<std::string> extract_boxed(std::string_view text);

/// Integer value of `text` after trimming whitespace, an optional sign and
/// leading zeros; nullopt if it is not a plain (64-bit) integer.
std::optional<std::int64_t> canonical_integer(std::string_view text);

bool verify_accuracy(std::string_view answer_text, const Task& task);
bool verify_abstention(std::string_view answer_text);

/// r(tau): accuracy on the terminal action for solvable tasks, abstention for
/// unsolvable ones. Sets trajectory.terminal_reward.
RewardOutcome terminal_reward(Trajectory& trajectory, const Task& task,
                              const AccuracyVerifier& accuracy = BoxedMathVerifier{});

}  // namespace rlaar
