#include "rlaar/toy_policy.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rlaar/errors.hpp"
#include "rlaar/random.hpp"

namespace rlaar {
namespace {

constexpr int kFormatVersion = 1;

// log(logistic(z)) without overflow for large |z|.
double log_logistic(double z) {
  return z >= 0.0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z));
}

SyntheticScan scan_user_turns(const Context& context) {
  SyntheticScan total;
  for (const auto& t : context.turns) {
    if (t.role != Role::User) continue;
    const auto s = scan_synthetic(t.text);
    if (s.announced) total.announced = s.announced;
    total.clues_seen += s.clues_seen;
    total.clue_sum += s.clue_sum;
  }
  return total;
}

}  // namespace

const char* to_string(FeatureMode mode) noexcept {
  return mode == FeatureMode::Rich ? "rich" : "ambiguous";
}

FeatureMode parse_feature_mode(std::string_view name) {
  if (name == "rich") return FeatureMode::Rich;
  if (name == "ambiguous") return FeatureMode::Ambiguous;
  throw ArgumentError("unknown feature mode '" + std::string(name) + "'");
}

std::size_t feature_dim(FeatureMode mode) noexcept { return mode == FeatureMode::Rich ? 3 : 2; }

PolicyParams PolicyParams::zeros(FeatureMode mode) {
  return {Eigen::VectorXd::Zero(static_cast<Eigen::Index>(feature_dim(mode))), mode};
}

std::uint64_t PolicyParams::fingerprint() const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  auto eat = [&h](std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      h ^= (word >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  eat(static_cast<std::uint64_t>(feature_mode));
  for (Eigen::Index i = 0; i < theta.size(); ++i) eat(std::bit_cast<std::uint64_t>(theta[i]));
  return h;
}

Eigen::VectorXd features(const Context& context, FeatureMode mode, std::size_t k_max) {
  if (context.turns.empty()) throw ArgumentError("features: empty context");
  if (mode == FeatureMode::Ambiguous) {
    if (k_max == 0) throw ArgumentError("features: k_max must be >= 1");
    const double ratio = std::min(1.0, static_cast<double>(context.user_turns()) / static_cast<double>(k_max));
    return Eigen::Vector2d(1.0, ratio);
  }
  const auto scan = scan_user_turns(context);
  if (!scan.announced || *scan.announced <= 0) {
    throw ParseError("features: context has no well-formed task header");
  }
  const double n = static_cast<double>(*scan.announced);
  const double seen = static_cast<double>(scan.clues_seen);
  const double complete = seen >= n ? 1.0 : 0.0;
  return Eigen::Vector3d(1.0, std::clamp(seen / n, 0.0, 1.0), complete);
}

double answer_probability(const PolicyParams& params, const Eigen::VectorXd& phi) {
  return 1.0 / (1.0 + std::exp(-params.theta.dot(phi)));
}

double choice_logprob(const PolicyParams& params, const Eigen::VectorXd& phi, bool answered) {
  const double z = params.theta.dot(phi);
  return answered ? log_logistic(z) : log_logistic(-z);
}

std::string render_action(const StructuredAction& action) {
  if (!action.is_answer()) return "\\boxed{" + std::string("Abstain") + "}";
  return "\\boxed{" + std::to_string(action.value) + "}";
}

Action act(const PolicyParams& params, const Context& context, std::uint64_t seed,
           std::size_t k_max) {
  Action a;
  a.features = features(context, params.feature_mode, k_max);
  if (a.features.size() != params.theta.size()) {
    throw ArgumentError("act: parameter dimension does not match the feature mode");
  }
  Rng rng(seed);
  const bool answered = rng.uniform01() < answer_probability(params, a.features);
  a.structured = answered ? StructuredAction::answer(scan_user_turns(context).clue_sum)
                          : StructuredAction::abstain();
  a.text = render_action(*a.structured);
  a.logprob = choice_logprob(params, a.features, answered);
  a.policy_fingerprint = params.fingerprint();
  return a;
}

Eigen::VectorXd logprob_grad(const PolicyParams& params, const Trajectory& trajectory) {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(params.theta.size());
  for (std::size_t k = 0; k < trajectory.pairs.size(); ++k) {
    const auto& a = trajectory.pairs[k].action;
    if (!a.structured || a.features.size() != params.theta.size()) {
      throw ContractError("logprob_grad: turn " + std::to_string(k + 1) + " of '" +
                          trajectory.task_id + "' has no recorded features/choice");
    }
    const double indicator = a.structured->is_answer() ? 1.0 : 0.0;
    g += (indicator - answer_probability(params, a.features)) * a.features;
  }
  return g;
}

double trajectory_logprob(const PolicyParams& params, const Trajectory& trajectory) {
  double total = 0.0;
  for (const auto& step : trajectory.pairs) {
    const auto& a = step.action;
    if (!a.structured) throw ContractError("trajectory_logprob: action without recorded choice");
    total += choice_logprob(params, a.features, a.structured->is_answer());
  }
  return total;
}

ToyPolicy::ToyPolicy(PolicyParams params, std::size_t k_max)
    : params_(std::move(params)), k_max_(k_max) {
  if (params_.theta.size() != static_cast<Eigen::Index>(feature_dim(params_.feature_mode))) {
    throw ArgumentError("ToyPolicy: theta has the wrong dimension for its feature mode");
  }
}

Action ToyPolicy::act(const Context& context, std::uint64_t seed) const {
  return rlaar::act(params_, context, seed, k_max_);
}

nlohmann::json to_json(const PolicyParams& params) {
  std::vector<double> theta(params.theta.data(), params.theta.data() + params.theta.size());
  return {{"theta", theta}, {"feature_mode", to_string(params.feature_mode)},
          {"format_version", kFormatVersion}};
}

PolicyParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ParseError("checkpoint is not a JSON object");
  if (!j.contains("format_version") || j["format_version"] != kFormatVersion) {
    throw ParseError("checkpoint: unsupported or missing format_version");
  }
  if (!j.contains("feature_mode") || !j["feature_mode"].is_string()) {
    throw ParseError("checkpoint: missing feature_mode");
  }
  if (!j.contains("theta") || !j["theta"].is_array()) throw ParseError("checkpoint: missing theta");
  PolicyParams p;
  try {
    p.feature_mode = parse_feature_mode(j["feature_mode"].get<std::string>());
  } catch (const ArgumentError& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
  const auto& theta = j["theta"];
  if (theta.size() != feature_dim(p.feature_mode)) throw ParseError("checkpoint: theta has the wrong dimension");
  p.theta.resize(static_cast<Eigen::Index>(theta.size()));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!theta[i].is_number()) throw ParseError("checkpoint: theta[" + std::to_string(i) + "] is not a number");
    p.theta[static_cast<Eigen::Index>(i)] = theta[i].get<double>();
  }
  return p;
}

void save_params(const PolicyParams& params, const std::filesystem::path& path,
                 const nlohmann::json& extra) {
  if (!params.theta.allFinite()) throw ArgumentError("save_params: theta has non-finite entries");
  auto j = to_json(params);
  for (const auto& [key, value] : extra.items()) j[key] = value;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

PolicyParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open checkpoint " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + " at byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return params_from_json(j);
}

}  // namespace rlaar
