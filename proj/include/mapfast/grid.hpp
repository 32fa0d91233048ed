#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mapfast/errors.hpp"

namespace mapfast {

// Grid cell, (col, row) with the origin at the top-left.
struct Coord {
  int col = 0;
  int row = 0;

  friend constexpr auto operator<=>(const Coord&, const Coord&) = default;
};

class GridMap {
 public:
  GridMap() = default;
  // All cells passable.
  GridMap(int width, int height);
  GridMap(int width, int height, std::vector<std::uint8_t> passable);

  int width() const { return width_; }
  int height() const { return height_; }
  int cell_count() const { return width_ * height_; }

  bool in_bounds(Coord c) const {
    return c.col >= 0 && c.row >= 0 && c.col < width_ && c.row < height_;
  }
  bool passable(Coord c) const { return in_bounds(c) && passable_[index(c)] != 0; }
  bool passable(int cell) const { return passable_[cell] != 0; }
  void set_passable(Coord c, bool value) { passable_[index(c)] = value ? 1 : 0; }

  int index(Coord c) const { return c.row * width_ + c.col; }
  Coord coord(int cell) const { return {cell % width_, cell / width_}; }

  int free_count() const;
  std::vector<Coord> obstacles() const;

  // Passable 4-neighbors in the fixed order up, left, right, down.
  // Returns the number written to `out`.
  int neighbors(int cell, int out[4]) const;

  friend bool operator==(const GridMap&, const GridMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> passable_;
};

struct AgentTask {
  int id = 0;
  Coord start;
  Coord goal;

  friend bool operator==(const AgentTask&, const AgentTask&) = default;
};

struct MapfInstance {
  GridMap map;
  std::vector<AgentTask> agents;
  std::string name;

  int agent_count() const { return static_cast<int>(agents.size()); }

  friend bool operator==(const MapfInstance&, const MapfInstance&) = default;
};

// Throws std::invalid_argument if ids are not 0..n-1, an endpoint is blocked
// or out of bounds, or starts/goals are not pairwise distinct.
void check_well_formed(const MapfInstance& instance);

// One row of a MovingAI scenario file.
struct ScenarioEntry {
  int bucket = 0;
  std::string map_name;
  int map_width = 0;
  int map_height = 0;
  Coord start;
  Coord goal;
  double optimal_length = 0.0;
};

// MovingAI `.map` text. '.' and 'G' are passable; '@', 'O', 'T' are not.
GridMap parse_map(std::string_view text);
std::string serialize_map(const GridMap& map);

// MovingAI `.scen` text (version 1).
std::vector<ScenarioEntry> parse_scenario(std::string_view text);

MapfInstance build_instance(const GridMap& map, const std::vector<ScenarioEntry>& entries,
                            int n_agents, std::string name = {});

struct PaddedInstance {
  MapfInstance instance;
  Coord offset;
};

// Centers the map inside a target_w x target_h grid of obstacles.
PaddedInstance pad_instance(const MapfInstance& instance, int target_w, int target_h);

// Deterministic in seed: exactly floor(density * cells) obstacles, then
// 2*n_agents distinct endpoints with every goal reachable from its start.
MapfInstance random_instance(std::uint64_t seed, int width, int height,
                             double obstacle_density, int n_agents);

// Random endpoints on an existing map.
MapfInstance random_agents_on_map(std::uint64_t seed, const GridMap& map, int n_agents);

nlohmann::json instance_to_json(const MapfInstance& instance);
MapfInstance instance_from_json(const nlohmann::json& j);

std::string read_text_file(const std::string& path);

}  // namespace mapfast
