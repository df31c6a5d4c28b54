#include "rlaar/task.hpp"

#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "rlaar/errors.hpp"
#include "rlaar/random.hpp"

namespace rlaar {
namespace {

constexpr std::string_view kHeaderPrefix = "I will give you ";
constexpr std::string_view kHeaderSuffix = " numbers; after the last one, report their sum.";
constexpr std::string_view kCluePrefix = "Next number: ";

std::optional<std::int64_t> parse_int(std::string_view s) {
  std::int64_t v = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || first == last) return std::nullopt;
  return v;
}

std::optional<std::int64_t> parse_header_line(std::string_view line) {
  if (!line.starts_with(kHeaderPrefix) || !line.ends_with(kHeaderSuffix)) return std::nullopt;
  line.remove_prefix(kHeaderPrefix.size());
  line.remove_suffix(kHeaderSuffix.size());
  return parse_int(line);
}

std::optional<std::int64_t> parse_clue_line(std::string_view line) {
  if (!line.starts_with(kCluePrefix)) return std::nullopt;
  line.remove_prefix(kCluePrefix.size());
  return parse_int(line);
}

ShardKind merged_kind(std::span<const Shard> group) {
  bool any_question = false;
  bool any_header = false;
  for (const auto& s : group) {
    if (s.kind == ShardKind::Clue) return ShardKind::Clue;
    any_question |= s.kind == ShardKind::Question;
    any_header |= s.kind == ShardKind::Header;
  }
  if (any_question || !any_header) return ShardKind::Question;
  return ShardKind::Header;
}

// Shard provenance is a function of the text: anything carrying a clue line is
// a Clue, a lone header is a Header, everything else is a plain Question.
ShardKind kind_of_text(std::string_view text) {
  const auto scan = scan_synthetic(text);
  if (scan.clues_seen > 0) return ShardKind::Clue;
  if (scan.announced) return ShardKind::Header;
  return ShardKind::Question;
}

std::string canonical_sum(std::span<const std::int64_t> values) {
  return std::to_string(std::accumulate(values.begin(), values.end(), std::int64_t{0}));
}

}  // namespace

void validate(const Task& task) {
  auto fail = [&](const std::string& what) {
    throw ArgumentError("task '" + task.id + "': " + what);
  };
  if (task.id.empty()) throw ArgumentError("task with empty id");
  if (task.shards.empty()) fail("no shards");
  for (std::size_t i = 0; i < task.shards.size(); ++i) {
    if (task.shards[i].index != i + 1) fail("shard indices are not contiguous from 1");
  }
  if (task.solvable) {
    if (task.ground_truth.empty()) fail("solvable task has empty ground truth");
    if (task.total_shards != task.shards.size()) fail("total_shards does not match shard count");
    if (!task.clue_values.empty() && task.ground_truth != canonical_sum(task.clue_values)) {
      fail("ground truth is not the sum of the clue values");
    }
  } else if (task.shards.size() >= task.total_shards) {
    fail("truncated task must reveal fewer shards than total_shards");
  }
}

std::string header_text(std::size_t n_clues) {
  return std::string(kHeaderPrefix) + std::to_string(n_clues) + std::string(kHeaderSuffix);
}

std::string clue_text(std::int64_t value) { return std::string(kCluePrefix) + std::to_string(value); }

SyntheticScan scan_synthetic(std::string_view text) {
  SyntheticScan scan;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (auto n = parse_header_line(line)) {
      scan.announced = *n;
    } else if (auto v = parse_clue_line(line)) {
      ++scan.clues_seen;
      scan.clue_sum += *v;
    }
  }
  return scan;
}

Task generate_synthetic_task(std::uint64_t seed, std::size_t n_clues, ValueRange range) {
  if (n_clues == 0) throw ArgumentError("generate_synthetic_task: n_clues must be >= 1");
  if (range.lo > range.hi) throw ArgumentError("generate_synthetic_task: empty value range");

  Rng rng(seed);
  Task task;
  task.id = "synth-" + std::to_string(seed);
  task.shards.push_back({1, header_text(n_clues), ShardKind::Header});
  for (std::size_t i = 0; i < n_clues; ++i) {
    const auto v = rng.uniform_int(range.lo, range.hi);
    task.clue_values.push_back(v);
    task.shards.push_back({i + 2, clue_text(v), ShardKind::Clue});
  }
  task.ground_truth = canonical_sum(task.clue_values);
  task.full_question = concat_shards(task.shards);
  task.total_shards = task.shards.size();
  task.solvable = true;
  return task;
}

std::vector<Task> generate_synthetic_tasks(std::uint64_t seed, std::size_t n_tasks,
                                           std::size_t n_clues_min, std::size_t n_clues_max,
                                           ValueRange range) {
  if (n_clues_min == 0 || n_clues_min > n_clues_max) {
    throw ArgumentError("generate_synthetic_tasks: invalid clue-count range");
  }
  std::vector<Task> tasks;
  tasks.reserve(n_tasks);
  for (std::size_t i = 0; i < n_tasks; ++i) {
    const auto task_seed = derive_seed(seed, {i});
    Rng count_rng(derive_seed(task_seed, {0xC0}));
    const auto n = static_cast<std::size_t>(count_rng.uniform_int(
        static_cast<std::int64_t>(n_clues_min), static_cast<std::int64_t>(n_clues_max)));
    tasks.push_back(generate_synthetic_task(task_seed, n, range));
  }
  return tasks;
}

ShardSequence rechunk(std::span<const Shard> shards, std::size_t k) {
  if (k == 0 || k > shards.size()) {
    throw ArgumentError("rechunk: cannot split " + std::to_string(shards.size()) + " shards into " +
                        std::to_string(k));
  }
  const std::size_t base = shards.size() / k;
  const std::size_t extra = shards.size() % k;
  ShardSequence out;
  out.reserve(k);
  std::size_t pos = 0;
  for (std::size_t g = 0; g < k; ++g) {
    const std::size_t len = base + (g < extra ? 1 : 0);
    const auto group = shards.subspan(pos, len);
    out.push_back({g + 1, len == 1 ? group.front().text : concat_shards(group), merged_kind(group)});
    pos += len;
  }
  return out;
}

std::size_t draw_truncation(std::size_t k_target, std::uint64_t seed) {
  if (k_target < 2) throw ArgumentError("draw_truncation: k_target must be >= 2");
  Rng rng(seed);
  return static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(k_target) - 1));
}

ShardSequence shard_question(const Task& task, std::size_t k_target, bool incomplete,
                             std::optional<std::size_t> m_turns, std::uint64_t seed) {
  if (!task.solvable) throw ArgumentError("shard_question: task '" + task.id + "' is already truncated");
  if (k_target == 0 || k_target > task.shards.size()) {
    throw ArgumentError("shard_question: k_target " + std::to_string(k_target) + " exceeds the " +
                        std::to_string(task.shards.size()) + " shards of task '" + task.id + "'");
  }
  auto shards = rechunk(task.shards, k_target);
  if (!incomplete) return shards;

  if (task.total_shards < 2 || k_target < 2) {
    throw ArgumentError("shard_question: cannot withhold shards of task '" + task.id + "' at k=" +
                        std::to_string(k_target));
  }
  const std::size_t m = m_turns ? *m_turns : draw_truncation(k_target, seed);
  if (m < 1 || m >= k_target) {
    throw ArgumentError("shard_question: m_turns must lie in [1, " + std::to_string(k_target - 1) + "]");
  }
  bool withheld_clue = false;
  for (std::size_t i = m; i < shards.size(); ++i) withheld_clue |= shards[i].kind != ShardKind::Header;
  if (!withheld_clue) throw ContractError("shard_question: truncation withholds no clue");
  shards.resize(m);
  return shards;
}

std::string concat_shards(std::span<const Shard> shards) {
  if (shards.empty()) throw ArgumentError("concat_shards: empty shard sequence");
  std::string out = shards.front().text;
  for (const auto& s : shards.subspan(1)) {
    out += "\n\n";
    out += s.text;
  }
  return out;
}

Task truncate_task(const Task& task, std::size_t k_target, std::size_t m_turns) {
  Task out = task;
  out.shards = shard_question(task, k_target, true, m_turns, 0);
  out.solvable = false;
  out.total_shards = k_target;
  return out;
}

nlohmann::json to_record(const Task& task) {
  nlohmann::json shards = nlohmann::json::array();
  for (const auto& s : task.shards) shards.push_back(s.text);
  nlohmann::json rec = {{"id", task.id},
                        {"question", task.full_question},
                        {"answer", task.ground_truth},
                        {"shards", std::move(shards)},
                        {"solvable", task.solvable}};
  // Optional extensions: synthetic clue values, and the shard count a
  // truncated prefix was cut from.
  if (!task.clue_values.empty()) rec["clues"] = task.clue_values;
  if (!task.solvable) rec["total_shards"] = task.total_shards;
  return rec;
}

Task from_record(const nlohmann::json& rec) {
  if (!rec.is_object()) throw ParseError("record is not a JSON object");
  auto field = [&](const char* name, nlohmann::json::value_t type) -> const nlohmann::json& {
    auto it = rec.find(name);
    if (it == rec.end()) throw ParseError(std::string("missing field \"") + name + "\"");
    const bool ok = type == nlohmann::json::value_t::number_unsigned ? it->is_number_unsigned()
                                                                    : it->type() == type;
    if (!ok) throw ParseError(std::string("field \"") + name + "\" has the wrong type");
    return *it;
  };
  using vt = nlohmann::json::value_t;
  Task task;
  task.id = field("id", vt::string).get<std::string>();
  task.full_question = field("question", vt::string).get<std::string>();
  task.ground_truth = field("answer", vt::string).get<std::string>();
  task.solvable = field("solvable", vt::boolean).get<bool>();
  const auto& shards = field("shards", vt::array);
  for (std::size_t i = 0; i < shards.size(); ++i) {
    if (!shards[i].is_string()) throw ParseError("shard " + std::to_string(i + 1) + " is not a string");
    auto text = shards[i].get<std::string>();
    const auto kind = kind_of_text(text);
    task.shards.push_back({i + 1, std::move(text), kind});
  }
  if (auto it = rec.find("clues"); it != rec.end()) {
    if (!it->is_array()) throw ParseError("field \"clues\" has the wrong type");
    for (const auto& v : *it) {
      if (!v.is_number_integer()) throw ParseError("field \"clues\" must hold integers");
      task.clue_values.push_back(v.get<std::int64_t>());
    }
  }
  task.total_shards = task.solvable ? task.shards.size()
                      : rec.contains("total_shards")
                          ? field("total_shards", vt::number_unsigned).get<std::size_t>()
                          : task.shards.size() + 1;
  return task;
}

std::vector<Task> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open dataset " + path.string());
  std::vector<Task> tasks;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Task task;
    try {
      task = from_record(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
    } catch (const ParseError& e) {
      throw ParseError(e.what(), line_no);
    }
    try {
      validate(task);
    } catch (const ArgumentError& e) {
      throw ParseError(e.what(), line_no);
    }
    tasks.push_back(std::move(task));
  }
  return tasks;
}

void save_dataset(const std::filesystem::path& path, std::span<const Task> tasks) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write dataset " + path.string());
  for (const auto& t : tasks) out << to_record(t).dump() << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace rlaar
