#include "mapfast/evaluator.hpp"

#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace mapfast {

namespace {

void check_choice(int choice) {
  if (choice < 0 || choice >= kPortfolioSize) {
    throw std::invalid_argument("choice " + std::to_string(choice) + " is not a portfolio algorithm");
  }
}

}  // namespace

double speed_factor(std::optional<double> time_used, double limit) {
  if (!(limit > 0.0)) throw std::invalid_argument("limit must be positive");
  if (!time_used) return 0.0;
  if (*time_used < 0.0) throw std::invalid_argument("negative time used");
  return limit / (1.0 + *time_used);
}

Entrant algorithm_entrant(int algorithm, std::size_t n_records) {
  check_choice(algorithm);
  return {algorithm_name(algorithm), std::vector<int>(n_records, algorithm)};
}

std::vector<double> speed_award(const RunRecord& record, const std::vector<int>& choices) {
  std::vector<double> factors;
  double total = 0.0;
  for (int c : choices) {
    check_choice(c);
    const AlgorithmRun& run = record.results[c];
    const double f = speed_factor(run.finished() ? std::optional<double>(run.runtime_seconds) : std::nullopt,
                                  record.budget_seconds);
    factors.push_back(f);
    total += f;
  }
  for (double& f : factors) f = total > 0.0 ? f / total : 0.0;
  return factors;
}

ScoreTable custom_score(const std::vector<RunRecord>& records, const std::vector<Entrant>& entrants) {
  if (records.empty()) throw std::invalid_argument("no records to score");
  ScoreTable table;
  for (const auto& e : entrants) {
    if (e.choices.size() != records.size()) {
      throw std::invalid_argument("entrant " + e.name + " has " + std::to_string(e.choices.size()) +
                                  " choices for " + std::to_string(records.size()) + " records");
    }
    table.names.push_back(e.name);
  }
  table.scores.assign(entrants.size(), 0.0);
  std::vector<int> choices(entrants.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (std::size_t e = 0; e < entrants.size(); ++e) choices[e] = entrants[e].choices[r];
    const auto awards = speed_award(records[r], choices);
    for (std::size_t e = 0; e < entrants.size(); ++e) table.scores[e] += awards[e];
  }
  return table;
}

MetricsReport selector_metrics(const std::vector<int>& choices, const std::vector<RunRecord>& records, double limit) {
  if (choices.size() != records.size()) throw std::invalid_argument("need one choice per record");
  if (!(limit > 0.0)) throw std::invalid_argument("limit must be positive");
  MetricsReport m;
  m.n = static_cast<int>(records.size());
  if (records.empty()) return m;
  int correct = 0, covered = 0;
  double seconds = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    check_choice(choices[i]);
    const AlgorithmRun& run = records[i].results[choices[i]];
    if (records[i].fastest && *records[i].fastest == choices[i]) ++correct;
    if (run.finished()) {
      ++covered;
      seconds += run.runtime_seconds;
    } else {
      seconds += limit;
    }
  }
  m.accuracy = static_cast<double>(correct) / m.n;
  m.coverage = static_cast<double>(covered) / m.n;
  m.runtime_total = seconds / 60.0;
  return m;
}

CoverageAnalysis coverage_analysis(const std::vector<std::vector<bool>>& predictions,
                                   const std::vector<RunRecord>& records) {
  if (predictions.size() != records.size()) throw std::invalid_argument("need one prediction per record");
  if (records.empty()) throw std::invalid_argument("no records to analyze");
  CoverageAnalysis out(kPortfolioSize);
  const double t = static_cast<double>(records.size());
  for (int a = 0; a < kPortfolioSize; ++a) {
    int s = 0, s_pred = 0, both = 0, neither = 0;
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (predictions[i].size() != static_cast<std::size_t>(kPortfolioSize)) {
        throw std::invalid_argument("prediction " + std::to_string(i) + " does not cover the portfolio");
      }
      const bool solved = records[i].results[a].finished();
      const bool predicted = predictions[i][a];
      s += solved;
      s_pred += predicted;
      both += solved && predicted;
      neither += !solved && !predicted;
    }
    out[a].actual_coverage = s / t;
    out[a].predicted_coverage = s_pred / t;
    out[a].recall = s > 0 ? static_cast<double>(both) / s : 1.0;
    out[a].correctness = (both + neither) / t;
  }
  return out;
}

std::vector<int> oracle_selector(const std::vector<RunRecord>& records) {
  std::vector<int> out;
  for (const auto& r : records) {
    if (r.excluded || !r.fastest) throw std::invalid_argument("record " + r.instance_id + " is excluded");
    out.push_back(*r.fastest);
  }
  return out;
}

std::vector<EntrantRow> evaluate_entrants(const std::vector<RunRecord>& records, const std::vector<Entrant>& entrants,
                                          double limit) {
  const ScoreTable scores = custom_score(records, entrants);
  std::vector<EntrantRow> rows;
  for (std::size_t e = 0; e < entrants.size(); ++e) {
    rows.push_back({entrants[e].name, selector_metrics(entrants[e].choices, records, limit), scores.scores[e]});
  }
  return rows;
}

void write_metrics_csv(std::ostream& out, const std::vector<EntrantRow>& rows) {
  out << "entrant,accuracy,coverage,runtime_total,score\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.name << ',' << r.metrics.accuracy << ',' << r.metrics.coverage << ',' << r.metrics.runtime_total << ','
        << r.score << '\n';
  }
}

nlohmann::json metrics_json(const std::vector<EntrantRow>& rows, const CoverageAnalysis* coverage) {
  nlohmann::json entrants = nlohmann::json::array();
  for (const auto& r : rows) {
    entrants.push_back({{"entrant", r.name},
                        {"accuracy", r.metrics.accuracy},
                        {"coverage", r.metrics.coverage},
                        {"runtime_total_minutes", r.metrics.runtime_total},
                        {"score", r.score},
                        {"instances", r.metrics.n}});
  }
  nlohmann::json out{{"entrants", entrants}};
  if (coverage) {
    nlohmann::json cov = nlohmann::json::object();
    for (int a = 0; a < kPortfolioSize; ++a) {
      const auto& c = (*coverage)[a];
      cov[algorithm_name(a)] = {{"actual_coverage", c.actual_coverage},
                                {"predicted_coverage", c.predicted_coverage},
                                {"recall", c.recall},
                                {"correctness", c.correctness}};
    }
    out["coverage_analysis"] = cov;
  }
  return out;
}

}  // namespace mapfast
