#include "mapfast/analysis.hpp"

#include <algorithm>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace mapfast {

std::uint64_t HeatGrid::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

HeatGrid heatmap(const GridMap& map, std::span<const MapfInstance> instances) {
  HeatGrid grid{map.width(), map.height(), std::vector<std::uint64_t>(static_cast<std::size_t>(map.cell_count()), 0)};
  for (const auto& inst : instances) {
    if (!(inst.map == map)) throw std::invalid_argument("instance " + inst.name + " is on a different map");
    for (const auto& path : single_agent_paths(inst)) {
      for (Coord c : path.cells) ++grid.counts[map.index(c)];
    }
  }
  return grid;
}

std::vector<MapfInstance> instances_won_by(int algorithm, const std::vector<RunRecord>& records,
                                           const std::map<std::string, MapfInstance>& instances) {
  std::vector<MapfInstance> out;
  for (const auto& r : records) {
    if (!r.fastest || *r.fastest != algorithm) continue;
    const auto it = instances.find(r.instance_id);
    if (it == instances.end()) throw std::invalid_argument("no stored instance for record " + r.instance_id);
    out.push_back(it->second);
  }
  return out;
}

void write_pgm(std::ostream& out, const HeatGrid& grid) {
  const std::uint64_t top = grid.counts.empty() ? 0 : *std::max_element(grid.counts.begin(), grid.counts.end());
  out << "P5\n" << grid.width << ' ' << grid.height << "\n255\n";
  for (std::uint64_t c : grid.counts) {
    const auto level = top == 0 ? 0 : static_cast<unsigned>((c * 255 + top / 2) / top);
    out.put(static_cast<char>(level));
  }
}

std::vector<ScatterRow> scatter_rows(const std::vector<RunRecord>& records,
                                     const std::map<std::string, FeatureVector>& features) {
  std::vector<ScatterRow> rows;
  for (const auto& r : records) {
    const auto it = features.find(r.instance_id);
    if (it == features.end()) throw std::invalid_argument("no features for record " + r.instance_id);
    rows.push_back({r.instance_id, it->second.n_agents, it->second.avg_sp_length, it->second.space_ratio,
                    r.fastest ? algorithm_name(*r.fastest) : std::string("none")});
  }
  return rows;
}

std::map<std::string, FeatureVector> features_for(const std::map<std::string, MapfInstance>& instances) {
  std::map<std::string, FeatureVector> out;
  for (const auto& [id, inst] : instances) out[id] = extract_features(inst, single_agent_paths(inst));
  return out;
}

void write_scatter_csv(std::ostream& out, const std::vector<ScatterRow>& rows) {
  out << "instance_id,n_agents,avg_sp_length,space_ratio,fastest\n";
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << r.instance_id << ',' << r.n_agents << ',' << r.avg_sp_length << ',' << r.space_ratio << ',' << r.fastest
        << '\n';
  }
}

}  // namespace mapfast
