#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace rlaar {

/// Provenance of a shard. Ingested shards are all `Question`; the synthetic
/// generator tags its header and clue shards.
enum class ShardKind { Header, Clue, Question };

struct Shard {
  std::size_t index = 1;  ///< 1-based turn number
  std::string text;
  ShardKind kind = ShardKind::Question;

  friend bool operator==(const Shard&, const Shard&) = default;
};

using ShardSequence = std::vector<Shard>;

/// A complete question, its ground truth, and the ordered shards that reveal
/// it. Truncated (unsolvable) tasks keep the original `total_shards` and hold
/// only the revealed prefix in `shards`.
struct Task {
  std::string id;
  std::string full_question;
  std::vector<std::int64_t> clue_values;  ///< synthetic tasks only
  std::string ground_truth;
  ShardSequence shards;
  bool solvable = true;
  std::size_t total_shards = 0;

  friend bool operator==(const Task&, const Task&) = default;
};

struct ValueRange {
  std::int64_t lo = 1;
  std::int64_t hi = 9;
};

/// Throws ArgumentError naming the task id when an invariant is violated.
void validate(const Task& task);

// Synthetic "sum of N revealed numbers" family --------------------------------

std::string header_text(std::size_t n_clues);
std::string clue_text(std::int64_t value);

/// What a block of text reveals about a synthetic task: the announced clue
/// count (if a header line is present) and the clue lines seen.
struct SyntheticScan {
  std::optional<std::int64_t> announced;
  std::size_t clues_seen = 0;
  std::int64_t clue_sum = 0;
};

/// Scans every line of `text` for header and clue lines.
SyntheticScan scan_synthetic(std::string_view text);

/// Returns a solvable task with `n_clues + 1` shards: a header followed by one
/// clue per shard, each drawn uniformly from `range`. Pure in its arguments.
Task generate_synthetic_task(std::uint64_t seed, std::size_t n_clues, ValueRange range);

/// `n_tasks` synthetic tasks; task i uses a seed derived from (seed, i) and a
/// clue count uniform on [n_clues_min, n_clues_max].
std::vector<Task> generate_synthetic_tasks(std::uint64_t seed, std::size_t n_tasks,
                                           std::size_t n_clues_min, std::size_t n_clues_max,
                                           ValueRange range);

// Sharding --------------------------------------------------------------------

/// Merges `shards` into exactly `k` contiguous groups of near-equal size,
/// earlier groups taking the remainder. Order is preserved; indices restart at 1.
ShardSequence rechunk(std::span<const Shard> shards, std::size_t k);

/// The shard sequence a rollout sees for `task` at difficulty `k_target`.
///
/// Complete mode returns all `k_target` shards (re-chunked when the task has
/// more). Incomplete mode returns the first M of them, where M is `m_turns`
/// or, if unset, uniform on [1, k_target - 1] drawn from `seed`.
ShardSequence shard_question(const Task& task, std::size_t k_target, bool incomplete,
                             std::optional<std::size_t> m_turns, std::uint64_t seed);

/// The M drawn by shard_question when `m_turns` is unset.
std::size_t draw_truncation(std::size_t k_target, std::uint64_t seed);

/// Joins shard texts in order, separated by blank lines.
std::string concat_shards(std::span<const Shard> shards);

/// Unsolvable view of `task`: the first `m_turns` shards at difficulty `k_target`.
Task truncate_task(const Task& task, std::size_t k_target, std::size_t m_turns);

// Dataset I/O (line-delimited JSON) ----------------------------------------------

nlohmann::json to_record(const Task& task);
/// Throws ParseError on missing/mistyped fields; does not validate invariants.
Task from_record(const nlohmann::json& record);

std::vector<Task> load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, std::span<const Task> tasks);

}  // namespace rlaar
