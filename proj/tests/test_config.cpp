#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "rlaar/config.hpp"
#include "rlaar/errors.hpp"

namespace rlaar {
namespace {

std::string error_key(const nlohmann::json& file, const nlohmann::json& overrides = nlohmann::json::object()) {
  try {
    parse_config(file, overrides);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "<no error>";
}

TEST(ParseConfig, EmptyGivesDefaults) {
  const auto c = parse_config(nlohmann::json::object());
  EXPECT_EQ(c.k_max, 5u);
  EXPECT_EQ(c.abstention_ratio, 0.1);
  EXPECT_EQ(c.threshold_ratio, 0.8);
  EXPECT_EQ(c.window, 5u);
  EXPECT_EQ(c.batch_size, 64u);
  EXPECT_EQ(c.group_size, 4u);
  EXPECT_EQ(c.randomized_max_steps, 100u);
  EXPECT_EQ(c.feature_mode, FeatureMode::Rich);
  EXPECT_TRUE(c.scale_advantages_by_std);
}

TEST(ParseConfig, OverridesWin) {
  const auto c = parse_config({{"abstention_ratio", 0.1}, {"window", 3}}, {{"abstention_ratio", 0.3}});
  EXPECT_EQ(c.abstention_ratio, 0.3);
  EXPECT_EQ(c.window, 3u);
}

TEST(ParseConfig, RangeErrorsNameTheKey) {
  EXPECT_EQ(error_key({{"abstention_ratio", 1.5}}), "abstention_ratio");
  EXPECT_EQ(error_key({{"threshold_ratio", 0.0}}), "threshold_ratio");
  EXPECT_EQ(error_key({{"k_max", 1}}), "k_max");
  EXPECT_EQ(error_key({{"group_size", 1}}), "group_size");
  EXPECT_EQ(error_key({{"learning_rate", -1}}), "learning_rate");
  EXPECT_EQ(error_key({}, {{"abstention_ratio", -0.1}}), "abstention_ratio");
}

TEST(ParseConfig, TypeErrorsNameTheKey) {
  EXPECT_EQ(error_key({{"window", "five"}}), "window");
  EXPECT_EQ(error_key({{"window", -5}}), "window");
  EXPECT_EQ(error_key({{"feature_mode", "dense"}}), "feature_mode");
  EXPECT_EQ(error_key({{"scale_advantages_by_std", 1}}), "scale_advantages_by_std");
}

TEST(ParseConfig, UnknownKeyRejected) {
  EXPECT_EQ(error_key({{"abstain_ratio", 0.2}}), "abstain_ratio");
}

TEST(ParseConfig, RoundTripsThroughJson) {
  const auto c = parse_config({{"feature_mode", "ambiguous"}, {"seed", 42}, {"judge_phrases", {"pass"}}});
  const auto again = parse_config(to_json(c));
  EXPECT_EQ(to_json(again), to_json(c));
  EXPECT_EQ(again.feature_mode, FeatureMode::Ambiguous);
}

TEST(LoadConfig, FileThenOverrides) {
  const auto path = std::filesystem::temp_directory_path() / "rlaar_test_config.json";
  std::ofstream(path) << R"({"abstention_ratio": 0.1, "batch_size": 16})";
  const auto c = load_config(path, {{"abstention_ratio", 0.3}});
  EXPECT_EQ(c.abstention_ratio, 0.3);
  EXPECT_EQ(c.batch_size, 16u);
  std::ofstream(path) << "{ nope";
  EXPECT_THROW(load_config(path), ConfigError);
  std::filesystem::remove(path);
  EXPECT_THROW(load_config(path), ConfigError);
  EXPECT_EQ(load_config(std::nullopt).k_max, 5u);
}

}  // namespace
}  // namespace rlaar
