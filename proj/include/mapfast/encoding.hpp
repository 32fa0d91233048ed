#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "mapfast/grid.hpp"
#include "mapfast/pathfinding.hpp"

namespace mapfast {

using CellCode = std::array<std::uint8_t, 3>;

inline constexpr CellCode kObstacleCode{0, 0, 0};
inline constexpr CellCode kPathCode{1, 0, 0};
inline constexpr CellCode kStartCode{0, 1, 0};
inline constexpr CellCode kGoalCode{0, 0, 1};
inline constexpr CellCode kStartGoalCode{0, 1, 1};
inline constexpr CellCode kEmptyCode{1, 1, 1};

bool is_legal_code(const CellCode& code);

// Row-major, channel-last: values[(row * width + col) * 3 + channel].
struct InstanceTensor {
  static constexpr int kChannels = 3;

  int width = 0;
  int height = 0;
  std::vector<float> values;

  InstanceTensor() = default;
  InstanceTensor(int w, int h) : width(w), height(h), values(static_cast<std::size_t>(w) * h * kChannels, 0.0f) {}

  CellCode code(Coord c) const;
  void set_code(Coord c, const CellCode& code);

  friend bool operator==(const InstanceTensor&, const InstanceTensor&) = default;
};

struct DecodedTensor {
  std::set<Coord> obstacles;
  std::set<Coord> starts;
  std::set<Coord> goals;
  std::set<Coord> path_cells;
  std::set<Coord> empty;
};

struct FeatureVector {
  int n_agents = 0;
  double avg_sp_length = 0.0;
  double space_ratio = 0.0;
  double obstacle_density = 0.0;
  int map_width = 0;
  int map_height = 0;
};

// One single-agent shortest path per agent, ignoring the other agents.
std::vector<Path> single_agent_paths(const MapfInstance& instance);

// Pads the instance to target_side x target_side (centered) and marks
// obstacles, shortest-path cells, starts and goals. Start/goal codes win over
// path marking everywhere. Throws std::invalid_argument if the map does not
// fit or a path is not a shortest path of its agent.
InstanceTensor encode_instance(const MapfInstance& instance, const std::vector<Path>& paths, int target_side);
InstanceTensor encode_instance(const MapfInstance& instance, int target_side);

// Same layout without path marking; depends only on the start and goal sets.
InstanceTensor encode_agents_only(const MapfInstance& instance, int target_side);

// Throws std::invalid_argument on an illegal channel triple.
DecodedTensor decode_tensor(const InstanceTensor& tensor);

// |union of path cells| / |free cells|.
double space_ratio(const MapfInstance& instance, const std::vector<Path>& paths);
FeatureVector extract_features(const MapfInstance& instance, const std::vector<Path>& paths);

// Little-endian binary: uint32 width, height, channels, then float32 values.
void write_tensor_binary(std::ostream& out, const InstanceTensor& tensor);
InstanceTensor read_tensor_binary(std::istream& in);

// Header "width height 3", then one line per row of three-digit codes.
std::string tensor_to_text(const InstanceTensor& tensor);
InstanceTensor tensor_from_text(const std::string& text);

}  // namespace mapfast
