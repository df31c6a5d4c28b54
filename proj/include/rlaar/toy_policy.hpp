#pragma once

// Logistic answer/abstain policy over the synthetic "sum of N numbers" tasks.
//
//   P(Answer | c) = logistic(theta . phi(c)),  P(Abstain | c) = 1 - P(Answer | c)
//
// An Answer always reports the sum of the clues seen so far, so the only thing
// the policy learns is *when* to commit. Two feature maps are offered:
//
//   Rich       phi = [1, clues_seen / N, complete]   (N read from the header)
//   Ambiguous  phi = [1, k / k_max]                  (turn index only)

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "rlaar/rollout.hpp"

namespace rlaar {

enum class FeatureMode { Rich, Ambiguous };

const char* to_string(FeatureMode mode) noexcept;
/// Accepts "rich" / "ambiguous"; throws ArgumentError otherwise.
FeatureMode parse_feature_mode(std::string_view name);
std::size_t feature_dim(FeatureMode mode) noexcept;

struct PolicyParams {
  Eigen::VectorXd theta;
  FeatureMode feature_mode = FeatureMode::Rich;

  /// theta = 0: the maximum-entropy start.
  static PolicyParams zeros(FeatureMode mode);
  /// Hash of the exact bit pattern of theta and the mode.
  std::uint64_t fingerprint() const noexcept;

  bool operator==(const PolicyParams& other) const {
    return feature_mode == other.feature_mode && theta.size() == other.theta.size() &&
           theta == other.theta;
  }
};

Eigen::VectorXd features(const Context& context, FeatureMode mode, std::size_t k_max);

/// logistic(theta . phi).
double answer_probability(const PolicyParams& params, const Eigen::VectorXd& phi);

/// log pi(choice | phi), computed without forming the probability.
double choice_logprob(const PolicyParams& params, const Eigen::VectorXd& phi, bool answered);

std::string render_action(const StructuredAction& action);

/// Samples one action. Deterministic in (params, context, seed).
Action act(const PolicyParams& params, const Context& context, std::uint64_t seed,
           std::size_t k_max);

/// Sum over turns of grad_theta log pi(a_k | c_k) = (1[Answer] - P(Answer)) * phi_k,
/// evaluated at `params` using the features recorded on each action.
Eigen::VectorXd logprob_grad(const PolicyParams& params, const Trajectory& trajectory);

/// Sum over turns of log pi(a_k | c_k) at `params`.
double trajectory_logprob(const PolicyParams& params, const Trajectory& trajectory);

/// Policy adapter over a frozen parameter snapshot.
class ToyPolicy final : public Policy {
 public:
  ToyPolicy(PolicyParams params, std::size_t k_max);

  Action act(const Context& context, std::uint64_t seed) const override;
  const PolicyParams& params() const noexcept { return params_; }
  std::size_t k_max() const noexcept { return k_max_; }

 private:
  PolicyParams params_;
  std::size_t k_max_;
};

nlohmann::json to_json(const PolicyParams& params);
PolicyParams params_from_json(const nlohmann::json& j);

/// Writes {"theta", "feature_mode", "format_version": 1}; `extra` keys are
/// merged in (training checkpoints add curriculum state).
void save_params(const PolicyParams& params, const std::filesystem::path& path,
                 const nlohmann::json& extra = nlohmann::json::object());
PolicyParams load_params(const std::filesystem::path& path);

}  // namespace rlaar
