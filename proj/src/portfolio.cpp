#include "mapfast/portfolio.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <ctime>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mapfast/encoding.hpp"
#include "mapfast/rng.hpp"

namespace mapfast {

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void refresh_outcome(RunRecord& record) {
  record.fastest.reset();
  for (int a = 0; a < kPortfolioSize; ++a) {
    if (!record.results[a].finished()) continue;
    if (!record.fastest || record.results[a].runtime_seconds < record.results[*record.fastest].runtime_seconds) {
      record.fastest = a;
    }
  }
  record.excluded = !record.fastest.has_value();
}

RunRecord run_portfolio(const MapfInstance& instance, double budget_seconds, ClockKind clock,
                        const SatOptions& sat_options) {
  check_well_formed(instance);
  RunRecord record;
  record.instance_id = instance.name;
  record.budget_seconds = budget_seconds;
  record.clock = clock;
  for (int a = 0; a < kPortfolioSize; ++a) {
    AlgorithmRun& run = record.results[a];
    try {
      const SolveResult r = solve(kPortfolio[a], instance, budget_seconds, clock, sat_options);
      run.status = r.status;
      run.runtime_seconds = r.runtime_seconds;
      run.diagnostic = r.solved() ? "" : r.diagnostic;
    } catch (const std::exception& e) {
      run.status = SolveStatus::Error;
      run.runtime_seconds = budget_seconds;
      run.diagnostic = e.what();
    }
  }
  refresh_outcome(record);
  record.timestamp = utc_timestamp();
  return record;
}

TrainingLabel label_record(const RunRecord& record) {
  if (record.excluded || !record.fastest) {
    throw std::invalid_argument("record " + record.instance_id + " is excluded: no algorithm finished");
  }
  const int k = kPortfolioSize;
  TrainingLabel label;
  label.fastest_class = *record.fastest;
  for (const auto& r : record.results) label.completion.push_back(r.finished());
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      const auto& a = record.results[i];
      const auto& b = record.results[j];
      if (a.finished() && b.finished()) {
        label.pairwise.push_back(a.runtime_seconds <= b.runtime_seconds);
        label.pairwise_valid.push_back(true);
      } else if (a.finished() || b.finished()) {
        label.pairwise.push_back(a.finished());
        label.pairwise_valid.push_back(true);
      } else {
        label.pairwise.push_back(false);
        label.pairwise_valid.push_back(false);
      }
    }
  }
  return label;
}

DatasetSplit split_dataset(const std::vector<std::string>& ids, std::array<double, 3> ratios, std::uint64_t seed) {
  if (ids.empty()) throw std::invalid_argument("cannot split an empty id list");
  for (double r : ratios) {
    if (r < 0.0) throw std::invalid_argument("split ratios must be non-negative");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must sum to 1");
  }
  std::vector<std::string> shuffled = ids;
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(shuffled));
  const std::size_t n = shuffled.size();
  const std::size_t n_train = std::min(n, static_cast<std::size_t>(std::llround(ratios[0] * n)));
  const std::size_t n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(ratios[1] * n)));
  DatasetSplit split;
  split.train.assign(shuffled.begin(), shuffled.begin() + n_train);
  split.validation.assign(shuffled.begin() + n_train, shuffled.begin() + n_train + n_val);
  split.test.assign(shuffled.begin() + n_train + n_val, shuffled.end());
  return split;
}

nlohmann::json record_to_json(const RunRecord& record) {
  nlohmann::json results = nlohmann::json::object();
  for (int a = 0; a < kPortfolioSize; ++a) {
    const auto& r = record.results[a];
    nlohmann::json entry{{"status", to_string(r.status)}, {"runtime_seconds", r.runtime_seconds}};
    if (!r.diagnostic.empty()) entry["diagnostic"] = r.diagnostic;
    results[algorithm_name(a)] = entry;
  }
  return {{"instance_id", record.instance_id},
          {"budget_seconds", record.budget_seconds},
          {"clock", to_string(record.clock)},
          {"results", results},
          {"fastest", record.fastest ? nlohmann::json(algorithm_name(*record.fastest)) : nlohmann::json(nullptr)},
          {"excluded", record.excluded},
          {"timestamp", record.timestamp}};
}

RunRecord record_from_json(const nlohmann::json& j) {
  try {
    RunRecord record;
    record.instance_id = j.at("instance_id").get<std::string>();
    record.budget_seconds = j.at("budget_seconds").get<double>();
    record.clock = clock_from_string(j.value("clock", std::string("wall")));
    const auto& results = j.at("results");
    for (int a = 0; a < kPortfolioSize; ++a) {
      const auto& entry = results.at(algorithm_name(a));
      record.results[a].status = status_from_string(entry.at("status").get<std::string>());
      record.results[a].runtime_seconds = entry.at("runtime_seconds").get<double>();
      record.results[a].diagnostic = entry.value("diagnostic", std::string());
    }
    record.timestamp = j.value("timestamp", std::string());
    refresh_outcome(record);
    const auto& fastest = j.at("fastest");
    const bool stored_excluded = j.at("excluded").get<bool>();
    const bool consistent = fastest.is_null() ? !record.fastest.has_value()
                                              : record.fastest && algorithm_name(*record.fastest) == fastest.get<std::string>();
    if (!consistent || stored_excluded != record.excluded) {
      throw ParseError("record " + record.instance_id + " has a fastest/excluded field inconsistent with its results");
    }
    return record;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed run record: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("malformed run record: ") + e.what());
  }
}

void write_record_line(std::ostream& out, const RunRecord& record) {
  out << record_to_json(record).dump() << '\n';
  out.flush();
  if (!out) throw IoError("failed writing run record");
}

std::vector<RunRecord> read_records(std::istream& in) {
  std::vector<RunRecord> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("line " + std::to_string(number) + ": " + e.what());
    }
    out.push_back(record_from_json(j));
  }
  return out;
}

std::vector<RunRecord> read_records_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  return read_records(in);
}

nlohmann::json split_to_json(const DatasetSplit& split) {
  return {{"train", split.train}, {"validation", split.validation}, {"test", split.test}};
}

DatasetSplit split_from_json(const nlohmann::json& j) {
  try {
    return {j.at("train").get<std::vector<std::string>>(), j.at("validation").get<std::vector<std::string>>(),
            j.at("test").get<std::vector<std::string>>()};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed split file: ") + e.what());
  }
}

std::string instance_store_path(const std::string& records_path) { return records_path + ".instances.jsonl"; }

std::map<std::string, MapfInstance> read_instances_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  std::map<std::string, MapfInstance> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      MapfInstance inst = instance_from_json(nlohmann::json::parse(line));
      out[inst.name] = std::move(inst);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + " line " + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

MapfInstance dataset_instance(const DatasetOptions& options, std::uint64_t index) {
  if (options.min_side < 1 || options.max_side < options.min_side || options.min_agents < 1 ||
      options.max_agents < options.min_agents || options.min_density < 0.0 ||
      options.max_density < options.min_density || options.max_density >= 1.0) {
    throw std::invalid_argument("inconsistent dataset ranges");
  }
  Rng rng(options.seed * 0x100000001b3ULL + index);
  if (options.map) {
    const int agents = options.min_agents + static_cast<int>(rng.below(options.max_agents - options.min_agents + 1));
    MapfInstance inst = random_agents_on_map(rng.next(), *options.map, agents);
    inst.name = "d" + std::to_string(options.seed) + "-" + std::to_string(index) + "-a" + std::to_string(agents);
    return inst;
  }
  const int side = options.min_side + static_cast<int>(rng.below(options.max_side - options.min_side + 1));
  const double density = rng.uniform(options.min_density, options.max_density);
  const int agents = options.min_agents + static_cast<int>(rng.below(options.max_agents - options.min_agents + 1));
  MapfInstance inst = random_instance(rng.next(), side, side, density, agents);
  inst.name = "d" + std::to_string(options.seed) + "-" + std::to_string(index) + "-" + inst.name;
  return inst;
}

DatasetSummary generate_dataset(const DatasetOptions& options, std::ostream* records_out,
                                std::ostream* instances_out, const std::function<void(const RunRecord&)>& on_record) {
  if (options.count < 0) throw std::invalid_argument("count must be non-negative");
  if (options.jobs < 1) throw std::invalid_argument("jobs must be at least 1");
  DatasetSummary summary;
  if (options.count == 0) return summary;
  // Bounded so that an impossible configuration ends with an error.
  const std::uint64_t max_index = static_cast<std::uint64_t>(options.count) * 50 + 100;

  struct Slot {
    bool ready = false;
    MapfInstance instance;
    RunRecord record;
    std::string error;
  };
  std::mutex mu;
  std::condition_variable cv;
  std::map<std::uint64_t, Slot> slots;
  std::atomic<std::uint64_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    while (!stop.load()) {
      const std::uint64_t i = next.fetch_add(1);
      if (i >= max_index) return;
      Slot slot;
      try {
        slot.instance = dataset_instance(options, i);
        slot.record = run_portfolio(slot.instance, options.budget_seconds, options.clock, options.sat);
      } catch (const std::exception& e) {
        slot.error = e.what();
      }
      slot.ready = true;
      {
        std::lock_guard<std::mutex> lock(mu);
        slots[i] = std::move(slot);
      }
      cv.notify_all();
    }
  };

  std::vector<std::thread> threads;
  for (int t = 0; t < options.jobs; ++t) threads.emplace_back(worker);
  std::string failure;
  for (std::uint64_t i = 0; i < max_index && summary.labeled < options.count; ++i) {
    Slot slot;
    {
      std::unique_lock<std::mutex> lock(mu);
      cv.wait(lock, [&] { return slots.count(i) && slots[i].ready; });
      slot = std::move(slots[i]);
      slots.erase(i);
    }
    if (!slot.error.empty()) {
      failure = "instance " + std::to_string(i) + ": " + slot.error;
      break;
    }
    if (instances_out) {
      *instances_out << instance_to_json(slot.instance).dump() << '\n';
      instances_out->flush();
    }
    if (records_out) write_record_line(*records_out, slot.record);
    if (on_record) on_record(slot.record);
    if (slot.record.excluded) {
      ++summary.excluded;
    } else {
      ++summary.labeled;
    }
    summary.records.push_back(std::move(slot.record));
  }
  stop.store(true);
  for (auto& t : threads) t.join();
  if (!failure.empty()) throw std::runtime_error(failure);
  if (summary.labeled < options.count) {
    throw std::runtime_error("only " + std::to_string(summary.labeled) + " of " + std::to_string(options.count) +
                             " instances were solved by any algorithm");
  }
  return summary;
}

std::vector<LabeledSample> build_samples(const std::vector<RunRecord>& records,
                                         const std::map<std::string, MapfInstance>& instances, int side) {
  std::vector<LabeledSample> out;
  for (const auto& r : records) {
    if (r.excluded) continue;
    const auto it = instances.find(r.instance_id);
    if (it == instances.end()) throw std::invalid_argument("no stored instance for record " + r.instance_id);
    out.push_back({to_network_input(encode_instance(it->second, side)), label_record(r)});
  }
  return out;
}

}  // namespace mapfast
