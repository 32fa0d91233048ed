#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mapfast/portfolio.hpp"

namespace mapfast {

// limit / (1 + time_used); 0 for a failure (nullopt).
double speed_factor(std::optional<double> time_used, double limit);

// A named column of per-record algorithm choices. Single algorithms choose
// themselves everywhere; selectors choose per instance.
struct Entrant {
  std::string name;
  std::vector<int> choices;
};

Entrant algorithm_entrant(int algorithm, std::size_t n_records);

// Speed factors of each entrant's chosen algorithm on one record, normalized
// to sum to 1 (all zero when no entrant finished). The limit is the record's
// budget. Throws std::invalid_argument for a choice outside the portfolio.
std::vector<double> speed_award(const RunRecord& record, const std::vector<int>& choices);

struct ScoreTable {
  std::vector<std::string> names;
  std::vector<double> scores;
};

ScoreTable custom_score(const std::vector<RunRecord>& records, const std::vector<Entrant>& entrants);

struct MetricsReport {
  double accuracy = 0.0;
  double coverage = 0.0;
  // Minutes, with the limit charged for every non-finish.
  double runtime_total = 0.0;
  int n = 0;
};

MetricsReport selector_metrics(const std::vector<int>& choices, const std::vector<RunRecord>& records, double limit);

struct CoverageRow {
  double actual_coverage = 0.0;
  double predicted_coverage = 0.0;
  // 1 when the algorithm solves nothing (vacuous).
  double recall = 0.0;
  double correctness = 0.0;
};

using CoverageAnalysis = std::vector<CoverageRow>;

CoverageAnalysis coverage_analysis(const std::vector<std::vector<bool>>& predictions,
                                   const std::vector<RunRecord>& records);

// Throws std::invalid_argument for excluded records.
std::vector<int> oracle_selector(const std::vector<RunRecord>& records);

struct EntrantRow {
  std::string name;
  MetricsReport metrics;
  double score = 0.0;
};

// Metrics and custom score for each entrant over the same records.
std::vector<EntrantRow> evaluate_entrants(const std::vector<RunRecord>& records, const std::vector<Entrant>& entrants,
                                          double limit);

// Columns: entrant, accuracy, coverage, runtime_total, score.
void write_metrics_csv(std::ostream& out, const std::vector<EntrantRow>& rows);
nlohmann::json metrics_json(const std::vector<EntrantRow>& rows, const CoverageAnalysis* coverage = nullptr);

}  // namespace mapfast
