#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rlaar/rollout.hpp"
#include "rlaar/toy_policy.hpp"

namespace rlaar {

struct AdvantageOptions {
  /// false drops the std normalization (mean-centering only).
  bool scale_by_std = true;
  /// Lower bound on the std used as divisor.
  double epsilon = 1e-8;
};

/// A_i = (r_i - mean) / max(std_pop, epsilon); exactly zero when all rewards agree.
std::vector<double> group_advantages(std::span<const double> rewards, const AdvantageOptions& opts = {});

/// G rollouts of one task plus their rewards and group-relative advantages.
struct RolloutGroup {
  std::string task_id;
  std::vector<Trajectory> trajectories;
  std::vector<double> rewards;
  std::vector<double> advantages;
};

/// Builds a group from scored trajectories (terminal_reward must be set).
RolloutGroup make_group(std::string task_id, std::vector<Trajectory> trajectories,
                        const AdvantageOptions& opts = {});

/// g = (1 / N) sum_groups sum_i A_i * sum_k grad log pi(a_k | c_k), with N the
/// total number of trajectories. Every action must have been produced by
/// exactly `params`; anything else is a ContractError.
Eigen::VectorXd batch_gradient(std::span<const RolloutGroup> groups, const PolicyParams& params);

/// theta' = theta + learning_rate * grad. Rejects non-finite gradients.
PolicyParams apply_update(const PolicyParams& params, const Eigen::VectorXd& grad, double learning_rate);

}  // namespace rlaar
