#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

namespace rlaar {

enum class Stage { ThresholdEstablishment = 1, MainTraining = 2, RandomizedTraining = 3 };

const char* to_string(Stage stage) noexcept;

/// Fixed-capacity FIFO of per-step mean rewards.
class RewardWindow {
 public:
  explicit RewardWindow(std::size_t capacity = 1);

  void push(double value);
  void clear() noexcept;
  std::size_t size() const noexcept { return size_; }
  std::size_t capacity() const noexcept { return values_.size(); }
  bool full() const noexcept { return size_ == values_.size(); }
  /// Arithmetic mean of the held values; 0 when empty.
  double mean() const noexcept;
  /// Oldest first.
  std::vector<double> values() const;

  bool operator==(const RewardWindow& other) const { return values() == other.values() && capacity() == other.capacity(); }

 private:
  std::vector<double> values_;
  std::size_t head_ = 0;  // next write slot
  std::size_t size_ = 0;
};

struct CurriculumState {
  Stage stage = Stage::ThresholdEstablishment;
  std::size_t current_k = 1;
  std::size_t k_max = 5;
  RewardWindow reward_window{5};
  std::optional<double> baseline;
  double threshold_ratio = 0.8;
  std::optional<double> threshold;
  std::size_t steps_in_stage = 0;
  std::size_t randomized_steps_remaining = 0;

  bool operator==(const CurriculumState&) const = default;
};

struct StepDecision {
  std::size_t k_for_step = 1;
  bool finished = false;
};

CurriculumState new_state(std::size_t k_max, double rho, std::size_t window_size,
                          std::size_t randomized_max_steps);

/// Pushes one training step's mean reward (must lie in [0, 1]).
void record_step_reward(CurriculumState& state, double mean_reward);

/// Applies the stage transitions and the competence gate after a step.
///
/// Stage 1 sets the baseline once `window` steps are recorded and moves to
/// K = 2. Stage 2 raises K by one when a full window averages at least the
/// threshold, entering Stage 3 instead of exceeding k_max. The window is
/// cleared at every transition. Stage 3 counts down its step budget.
StepDecision advance(CurriculumState& state);

/// K for the next step: 1 in Stage 1, current_k in Stage 2, uniform on
/// [1, k_max] from `seed` in Stage 3.
StepDecision sample_difficulty(const CurriculumState& state, std::uint64_t seed);

nlohmann::json to_json(const CurriculumState& state);

}  // namespace rlaar
