#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mapfast/label.hpp"
#include "mapfast/network.hpp"
#include "mapfast/solvers.hpp"

namespace mapfast {

struct AlgorithmRun {
  SolveStatus status = SolveStatus::Timeout;
  double runtime_seconds = 0.0;
  std::string diagnostic;

  bool finished() const { return status == SolveStatus::Solved; }
  friend bool operator==(const AlgorithmRun&, const AlgorithmRun&) = default;
};

struct RunRecord {
  std::string instance_id;
  double budget_seconds = 0.0;
  ClockKind clock = ClockKind::Wall;
  std::array<AlgorithmRun, kPortfolioSize> results;
  // Finisher with the minimum runtime, ties to the lower index.
  std::optional<int> fastest;
  // No portfolio member finished.
  bool excluded = true;
  std::string timestamp;

  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

// Recomputes fastest and excluded from the per-algorithm results.
void refresh_outcome(RunRecord& record);

// Runs every portfolio member sequentially under the same budget. Solver
// exceptions become Error entries with the message as diagnostic.
RunRecord run_portfolio(const MapfInstance& instance, double budget_seconds, ClockKind clock = ClockKind::Wall,
                        const SatOptions& sat_options = {});

// Throws std::invalid_argument for excluded records.
TrainingLabel label_record(const RunRecord& record);

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;

  friend bool operator==(const DatasetSplit&, const DatasetSplit&) = default;
};

// Seeded shuffle, then round(n*r_train) train, round(n*r_val) validation and
// the rest test.
DatasetSplit split_dataset(const std::vector<std::string>& ids, std::array<double, 3> ratios, std::uint64_t seed);

nlohmann::json record_to_json(const RunRecord& record);
RunRecord record_from_json(const nlohmann::json& j);

void write_record_line(std::ostream& out, const RunRecord& record);
std::vector<RunRecord> read_records(std::istream& in);
std::vector<RunRecord> read_records_file(const std::string& path);

nlohmann::json split_to_json(const DatasetSplit& split);
DatasetSplit split_from_json(const nlohmann::json& j);

// Companion store for the instances behind a record file.
std::string instance_store_path(const std::string& records_path);
std::map<std::string, MapfInstance> read_instances_file(const std::string& path);

struct DatasetOptions {
  int count = 50;
  std::uint64_t seed = 0;
  int min_side = 8;
  int max_side = 16;
  double min_density = 0.0;
  double max_density = 0.3;
  int min_agents = 2;
  int max_agents = 10;
  double budget_seconds = 10.0;
  ClockKind clock = ClockKind::Wall;
  int jobs = 1;
  SatOptions sat;
  // When set, agents are placed on this map and the size/density ranges
  // are ignored.
  std::optional<GridMap> map;
};

// Instance number `index` of a dataset; depends only on (options, index).
MapfInstance dataset_instance(const DatasetOptions& options, std::uint64_t index);

struct DatasetSummary {
  int labeled = 0;
  int excluded = 0;
  std::vector<RunRecord> records;
};

// Generates instances until `count` non-excluded records exist, appending
// every record (excluded ones flagged) and its instance to the two stores in
// index order regardless of the number of workers. Appends nothing when an
// output stream is null.
DatasetSummary generate_dataset(const DatasetOptions& options, std::ostream* records_out, std::ostream* instances_out,
                                const std::function<void(const RunRecord&)>& on_record = {});

// Encodes the instance of every non-excluded record into a labeled sample.
// Throws std::invalid_argument if an instance is missing.
std::vector<LabeledSample> build_samples(const std::vector<RunRecord>& records,
                                         const std::map<std::string, MapfInstance>& instances, int side);

}  // namespace mapfast
