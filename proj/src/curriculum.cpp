#include "rlaar/curriculum.hpp"

#include <cmath>

#include "rlaar/errors.hpp"
#include "rlaar/random.hpp"

namespace rlaar {

const char* to_string(Stage stage) noexcept {
  switch (stage) {
    case Stage::ThresholdEstablishment: return "threshold_establishment";
    case Stage::MainTraining: return "main_training";
    case Stage::RandomizedTraining: return "randomized_training";
  }
  return "unknown";
}

RewardWindow::RewardWindow(std::size_t capacity) : values_(capacity, 0.0) {
  if (capacity == 0) throw ArgumentError("RewardWindow: capacity must be >= 1");
}

void RewardWindow::push(double value) {
  values_[head_] = value;
  head_ = (head_ + 1) % values_.size();
  if (size_ < values_.size()) ++size_;
}

void RewardWindow::clear() noexcept {
  head_ = 0;
  size_ = 0;
}

double RewardWindow::mean() const noexcept {
  if (size_ == 0) return 0.0;
  double sum = 0.0;
  for (double v : values()) sum += v;
  return sum / static_cast<double>(size_);
}

std::vector<double> RewardWindow::values() const {
  std::vector<double> out;
  out.reserve(size_);
  const std::size_t start = (head_ + values_.size() - size_) % values_.size();
  for (std::size_t i = 0; i < size_; ++i) out.push_back(values_[(start + i) % values_.size()]);
  return out;
}

CurriculumState new_state(std::size_t k_max, double rho, std::size_t window_size,
                          std::size_t randomized_max_steps) {
  if (k_max < 2) throw ArgumentError("curriculum: k_max must be >= 2");
  if (!(rho > 0.0 && rho <= 1.0)) throw ArgumentError("curriculum: rho must lie in (0, 1]");
  if (window_size < 1) throw ArgumentError("curriculum: window size must be >= 1");
  CurriculumState s;
  s.k_max = k_max;
  s.threshold_ratio = rho;
  s.reward_window = RewardWindow(window_size);
  s.randomized_steps_remaining = randomized_max_steps;
  return s;
}

void record_step_reward(CurriculumState& state, double mean_reward) {
  if (!(mean_reward >= 0.0 && mean_reward <= 1.0)) {
    throw ArgumentError("record_step_reward: reward must lie in [0, 1]");
  }
  state.reward_window.push(mean_reward);
  ++state.steps_in_stage;
}

StepDecision advance(CurriculumState& state) {
  switch (state.stage) {
    case Stage::ThresholdEstablishment:
      if (state.steps_in_stage >= state.reward_window.capacity()) {
        state.baseline = state.reward_window.mean();
        state.threshold = state.threshold_ratio * *state.baseline;
        state.stage = Stage::MainTraining;
        state.current_k = 2;
        state.reward_window.clear();
        state.steps_in_stage = 0;
      }
      break;
    case Stage::MainTraining:
      if (state.reward_window.full() && state.reward_window.mean() >= *state.threshold) {
        state.reward_window.clear();
        if (state.current_k + 1 > state.k_max) {
          state.stage = Stage::RandomizedTraining;
          state.steps_in_stage = 0;
        } else {
          ++state.current_k;
        }
      }
      break;
    case Stage::RandomizedTraining:
      if (state.randomized_steps_remaining > 0) --state.randomized_steps_remaining;
      break;
  }
  const bool finished =
      state.stage == Stage::RandomizedTraining && state.randomized_steps_remaining == 0;
  return {state.current_k, finished};
}

StepDecision sample_difficulty(const CurriculumState& state, std::uint64_t seed) {
  const bool finished =
      state.stage == Stage::RandomizedTraining && state.randomized_steps_remaining == 0;
  switch (state.stage) {
    case Stage::ThresholdEstablishment: return {1, finished};
    case Stage::MainTraining: return {state.current_k, finished};
    case Stage::RandomizedTraining: {
      Rng rng(seed);
      return {static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(state.k_max))),
              finished};
    }
  }
  return {1, finished};
}

nlohmann::json to_json(const CurriculumState& s) {
  nlohmann::json j = {{"stage", to_string(s.stage)},
                      {"current_k", s.current_k},
                      {"k_max", s.k_max},
                      {"reward_window", s.reward_window.values()},
                      {"window_size", s.reward_window.capacity()},
                      {"threshold_ratio", s.threshold_ratio},
                      {"steps_in_stage", s.steps_in_stage},
                      {"randomized_steps_remaining", s.randomized_steps_remaining}};
  j["baseline"] = s.baseline ? nlohmann::json(*s.baseline) : nlohmann::json(nullptr);
  j["threshold"] = s.threshold ? nlohmann::json(*s.threshold) : nlohmann::json(nullptr);
  return j;
}

}  // namespace rlaar
