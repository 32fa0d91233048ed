#include "mapfast/encoding.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mapfast {

namespace {

constexpr std::array<CellCode, 6> kLegal{kObstacleCode, kPathCode, kStartCode, kGoalCode, kStartGoalCode, kEmptyCode};

std::string code_string(const CellCode& c) {
  return std::string{static_cast<char>('0' + c[0]), static_cast<char>('0' + c[1]), static_cast<char>('0' + c[2])};
}

void check_shortest(const MapfInstance& instance, const std::vector<Path>& paths) {
  if (paths.size() != instance.agents.size()) {
    throw std::invalid_argument("expected " + std::to_string(instance.agents.size()) + " paths, got " +
                                std::to_string(paths.size()));
  }
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto& task = instance.agents[i];
    const auto& p = paths[i];
    const DistanceField field = distance_field(instance.map, task.goal);
    const bool ends_ok = !p.cells.empty() && p.cells.front() == task.start && p.cells.back() == task.goal;
    if (!ends_ok || p.cost() != field.at(task.start)) {
      throw std::invalid_argument("path " + std::to_string(i) + " is not a shortest path of its agent");
    }
    for (std::size_t t = 0; t < p.cells.size(); ++t) {
      const Coord c = p.cells[t];
      const bool step_ok = t == 0 || std::abs(c.col - p.cells[t - 1].col) + std::abs(c.row - p.cells[t - 1].row) == 1;
      if (!instance.map.passable(c) || !step_ok) {
        throw std::invalid_argument("path " + std::to_string(i) + " is not a shortest path of its agent");
      }
    }
  }
}

Coord shift(Coord c, Coord offset) { return {c.col + offset.col, c.row + offset.row}; }

InstanceTensor encode_padded(const MapfInstance& instance, const std::vector<Path>* paths, int target_side) {
  if (target_side <= 0) throw std::invalid_argument("tensor side must be positive");
  const GridMap& map = instance.map;
  if (map.width() > target_side || map.height() > target_side) {
    throw std::invalid_argument("map " + std::to_string(map.width()) + "x" + std::to_string(map.height()) +
                                " does not fit tensor side " + std::to_string(target_side));
  }
  const Coord offset{(target_side - map.width()) / 2, (target_side - map.height()) / 2};
  InstanceTensor t(target_side, target_side);
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) {
      if (map.passable(Coord{c, r})) t.set_code(shift({c, r}, offset), kEmptyCode);
    }
  }
  if (paths != nullptr) {
    for (const auto& p : *paths) {
      for (Coord c : p.cells) t.set_code(shift(c, offset), kPathCode);
    }
  }
  std::vector<char> is_start(static_cast<std::size_t>(target_side) * target_side, 0);
  std::vector<char> is_goal(is_start.size(), 0);
  for (const auto& a : instance.agents) {
    const Coord s = shift(a.start, offset);
    const Coord g = shift(a.goal, offset);
    is_start[static_cast<std::size_t>(s.row) * target_side + s.col] = 1;
    is_goal[static_cast<std::size_t>(g.row) * target_side + g.col] = 1;
  }
  for (int r = 0; r < target_side; ++r) {
    for (int c = 0; c < target_side; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * target_side + c;
      if (is_start[i] && is_goal[i]) {
        t.set_code({c, r}, kStartGoalCode);
      } else if (is_start[i]) {
        t.set_code({c, r}, kStartCode);
      } else if (is_goal[i]) {
        t.set_code({c, r}, kGoalCode);
      }
    }
  }
  return t;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  const char bytes[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                         static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char bytes[4];
  if (!in.read(reinterpret_cast<char*>(bytes), 4)) throw ParseError("truncated tensor file");
  return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
         (static_cast<std::uint32_t>(bytes[2]) << 16) | (static_cast<std::uint32_t>(bytes[3]) << 24);
}

}  // namespace

bool is_legal_code(const CellCode& code) {
  return std::find(kLegal.begin(), kLegal.end(), code) != kLegal.end();
}

CellCode InstanceTensor::code(Coord c) const {
  const std::size_t base = (static_cast<std::size_t>(c.row) * width + c.col) * kChannels;
  CellCode out{};
  for (int k = 0; k < kChannels; ++k) {
    const float v = values[base + k];
    if (v != 0.0f && v != 1.0f) throw std::invalid_argument("non-binary tensor value");
    out[k] = v == 1.0f ? 1 : 0;
  }
  return out;
}

void InstanceTensor::set_code(Coord c, const CellCode& code) {
  const std::size_t base = (static_cast<std::size_t>(c.row) * width + c.col) * kChannels;
  for (int k = 0; k < kChannels; ++k) values[base + k] = code[k];
}

std::vector<Path> single_agent_paths(const MapfInstance& instance) {
  std::vector<Path> out;
  out.reserve(instance.agents.size());
  for (const auto& a : instance.agents) {
    const DistanceField field = distance_field(instance.map, a.goal);
    if (!field.reachable(a.start)) {
      throw std::invalid_argument("agent " + std::to_string(a.id) + " cannot reach its goal");
    }
    out.push_back(shortest_path(instance.map, a.start, field));
  }
  return out;
}

InstanceTensor encode_instance(const MapfInstance& instance, const std::vector<Path>& paths, int target_side) {
  check_shortest(instance, paths);
  return encode_padded(instance, &paths, target_side);
}

InstanceTensor encode_instance(const MapfInstance& instance, int target_side) {
  return encode_instance(instance, single_agent_paths(instance), target_side);
}

InstanceTensor encode_agents_only(const MapfInstance& instance, int target_side) {
  return encode_padded(instance, nullptr, target_side);
}

DecodedTensor decode_tensor(const InstanceTensor& tensor) {
  DecodedTensor out;
  for (int r = 0; r < tensor.height; ++r) {
    for (int c = 0; c < tensor.width; ++c) {
      const Coord at{c, r};
      const CellCode code = tensor.code(at);
      if (code == kObstacleCode) {
        out.obstacles.insert(at);
      } else if (code == kPathCode) {
        out.path_cells.insert(at);
      } else if (code == kStartCode) {
        out.starts.insert(at);
      } else if (code == kGoalCode) {
        out.goals.insert(at);
      } else if (code == kStartGoalCode) {
        out.starts.insert(at);
        out.goals.insert(at);
      } else if (code == kEmptyCode) {
        out.empty.insert(at);
      } else {
        throw std::invalid_argument("illegal cell code " + code_string(code) + " at (" + std::to_string(c) + "," +
                                    std::to_string(r) + ")");
      }
    }
  }
  return out;
}

double space_ratio(const MapfInstance& instance, const std::vector<Path>& paths) {
  const int free = instance.map.free_count();
  if (free == 0) throw std::invalid_argument("map has no free cells");
  std::vector<char> on_path(static_cast<std::size_t>(instance.map.cell_count()), 0);
  int covered = 0;
  for (const auto& p : paths) {
    for (Coord c : p.cells) {
      char& slot = on_path[instance.map.index(c)];
      if (!slot) {
        slot = 1;
        ++covered;
      }
    }
  }
  return static_cast<double>(covered) / free;
}

FeatureVector extract_features(const MapfInstance& instance, const std::vector<Path>& paths) {
  FeatureVector f;
  f.n_agents = static_cast<int>(instance.agents.size());
  f.map_width = instance.map.width();
  f.map_height = instance.map.height();
  const int cells = instance.map.cell_count();
  f.obstacle_density = cells == 0 ? 0.0 : static_cast<double>(cells - instance.map.free_count()) / cells;
  if (!paths.empty()) {
    double total = 0.0;
    for (const auto& p : paths) total += p.cost();
    f.avg_sp_length = total / static_cast<double>(paths.size());
  }
  f.space_ratio = space_ratio(instance, paths);
  return f;
}

void write_tensor_binary(std::ostream& out, const InstanceTensor& tensor) {
  put_u32(out, static_cast<std::uint32_t>(tensor.width));
  put_u32(out, static_cast<std::uint32_t>(tensor.height));
  put_u32(out, InstanceTensor::kChannels);
  for (float v : tensor.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  if (!out) throw IoError("failed writing tensor");
}

InstanceTensor read_tensor_binary(std::istream& in) {
  const std::uint32_t w = get_u32(in);
  const std::uint32_t h = get_u32(in);
  const std::uint32_t ch = get_u32(in);
  if (ch != InstanceTensor::kChannels || w == 0 || h == 0 || w > 1u << 15 || h > 1u << 15) {
    throw ParseError("bad tensor header");
  }
  InstanceTensor t(static_cast<int>(w), static_cast<int>(h));
  for (float& v : t.values) v = std::bit_cast<float>(get_u32(in));
  return t;
}

std::string tensor_to_text(const InstanceTensor& tensor) {
  std::ostringstream out;
  out << tensor.width << ' ' << tensor.height << ' ' << InstanceTensor::kChannels << '\n';
  for (int r = 0; r < tensor.height; ++r) {
    for (int c = 0; c < tensor.width; ++c) {
      if (c > 0) out << ' ';
      out << code_string(tensor.code({c, r}));
    }
    out << '\n';
  }
  return out.str();
}

InstanceTensor tensor_from_text(const std::string& text) {
  std::istringstream in(text);
  int w = 0, h = 0, ch = 0;
  if (!(in >> w >> h >> ch) || w <= 0 || h <= 0 || ch != InstanceTensor::kChannels) {
    throw ParseError("bad tensor text header");
  }
  InstanceTensor t(w, h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      std::string token;
      if (!(in >> token) || token.size() != 3 || token.find_first_not_of("01") != std::string::npos) {
        throw ParseError("bad tensor cell at row " + std::to_string(r) + ", column " + std::to_string(c));
      }
      t.set_code({c, r}, {static_cast<std::uint8_t>(token[0] - '0'), static_cast<std::uint8_t>(token[1] - '0'),
                          static_cast<std::uint8_t>(token[2] - '0')});
    }
  }
  return t;
}

}  // namespace mapfast
