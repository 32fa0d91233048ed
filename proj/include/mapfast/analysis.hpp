#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "mapfast/encoding.hpp"
#include "mapfast/portfolio.hpp"

namespace mapfast {

struct HeatGrid {
  int width = 0;
  int height = 0;
  std::vector<std::uint64_t> counts;

  std::uint64_t at(Coord c) const { return counts[static_cast<std::size_t>(c.row) * width + c.col]; }
  std::uint64_t total() const;
};

// counts[cell] = number of (instance, agent) single-agent shortest paths
// through the cell. Every instance must be on `map`.
HeatGrid heatmap(const GridMap& map, std::span<const MapfInstance> instances);

// Instances of the records whose fastest algorithm is `algorithm`.
std::vector<MapfInstance> instances_won_by(int algorithm, const std::vector<RunRecord>& records,
                                           const std::map<std::string, MapfInstance>& instances);

// Binary PGM, counts scaled linearly so the grid maximum maps to 255.
void write_pgm(std::ostream& out, const HeatGrid& grid);

struct ScatterRow {
  std::string instance_id;
  int n_agents = 0;
  double avg_sp_length = 0.0;
  double space_ratio = 0.0;
  std::string fastest;
};

// One row per record; throws std::invalid_argument if features are missing.
std::vector<ScatterRow> scatter_rows(const std::vector<RunRecord>& records,
                                     const std::map<std::string, FeatureVector>& features);
std::map<std::string, FeatureVector> features_for(const std::map<std::string, MapfInstance>& instances);

void write_scatter_csv(std::ostream& out, const std::vector<ScatterRow>& rows);

}  // namespace mapfast
