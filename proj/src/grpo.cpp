#include "rlaar/grpo.hpp"

#include <algorithm>
#include <cmath>

#include "rlaar/errors.hpp"

namespace rlaar {

std::vector<double> group_advantages(std::span<const double> rewards, const AdvantageOptions& opts) {
  if (rewards.size() < 2) throw ArgumentError("group_advantages: need at least 2 rewards");
  std::vector<double> adv(rewards.size(), 0.0);
  if (std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards.front(); })) {
    return adv;
  }
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= n;
  const double scale = opts.scale_by_std ? std::max(std::sqrt(var), opts.epsilon) : 1.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) adv[i] = (rewards[i] - mean) / scale;
  return adv;
}

RolloutGroup make_group(std::string task_id, std::vector<Trajectory> trajectories,
                        const AdvantageOptions& opts) {
  RolloutGroup g;
  g.task_id = std::move(task_id);
  g.rewards.reserve(trajectories.size());
  for (const auto& t : trajectories) {
    if (!t.terminal_reward) throw ContractError("make_group: trajectory without a terminal reward");
    g.rewards.push_back(*t.terminal_reward);
  }
  g.trajectories = std::move(trajectories);
  g.advantages = group_advantages(g.rewards, opts);
  return g;
}

Eigen::VectorXd batch_gradient(std::span<const RolloutGroup> groups, const PolicyParams& params) {
  const auto current = params.fingerprint();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(params.theta.size());
  std::size_t total = 0;
  for (const auto& group : groups) {
    if (group.advantages.size() != group.trajectories.size()) {
      throw ContractError("batch_gradient: group '" + group.task_id + "' has mismatched advantages");
    }
    for (std::size_t i = 0; i < group.trajectories.size(); ++i) {
      const auto& traj = group.trajectories[i];
      for (const auto& step : traj.pairs) {
        if (step.action.policy_fingerprint != current) {
          throw ContractError("batch_gradient: trajectory of '" + traj.task_id +
                              "' was not sampled from the parameters being updated");
        }
      }
      ++total;
      if (group.advantages[i] != 0.0) g += group.advantages[i] * logprob_grad(params, traj);
    }
  }
  if (total > 0) g /= static_cast<double>(total);
  return g;
}

PolicyParams apply_update(const PolicyParams& params, const Eigen::VectorXd& grad, double learning_rate) {
  if (grad.size() != params.theta.size()) throw ArgumentError("apply_update: shape mismatch");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ArgumentError("apply_update: learning rate must be positive and finite");
  }
  if (!grad.allFinite()) throw ArgumentError("apply_update: non-finite gradient rejected");
  PolicyParams next = params;
  next.theta += learning_rate * grad;
  return next;
}

}  // namespace rlaar
