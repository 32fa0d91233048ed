#include "mapfast/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mapfast/rng.hpp"

namespace mapfast {

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (end == text.size()) break;
    pos = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    fields.push_back(line.substr(i, j - i));
    i = j;
  }
  return fields;
}

template <typename T>
T parse_number(std::string_view field, const char* what) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(std::string("non-numeric ") + what + ": '" + std::string(field) + "'");
  }
  return value;
}

// Connected-component label per cell, -1 for obstacles.
std::vector<int> component_labels(const GridMap& map) {
  std::vector<int> label(map.cell_count(), -1);
  std::vector<int> stack;
  int next = 0;
  for (int s = 0; s < map.cell_count(); ++s) {
    if (!map.passable(s) || label[s] >= 0) continue;
    label[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      int nb[4];
      int n = map.neighbors(v, nb);
      for (int k = 0; k < n; ++k) {
        if (label[nb[k]] < 0) {
          label[nb[k]] = next;
          stack.push_back(nb[k]);
        }
      }
    }
    ++next;
  }
  return label;
}

}  // namespace

GridMap::GridMap(int width, int height)
    : GridMap(width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 1)) {}

GridMap::GridMap(int width, int height, std::vector<std::uint8_t> passable)
    : width_(width), height_(height), passable_(std::move(passable)) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("map dimensions must be positive");
  if (passable_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("passable array size does not match map dimensions");
  }
}

int GridMap::free_count() const {
  return static_cast<int>(std::count(passable_.begin(), passable_.end(), std::uint8_t{1}));
}

std::vector<Coord> GridMap::obstacles() const {
  std::vector<Coord> out;
  for (int i = 0; i < cell_count(); ++i) {
    if (!passable_[i]) out.push_back(coord(i));
  }
  return out;
}

int GridMap::neighbors(int cell, int out[4]) const {
  const int col = cell % width_;
  const int row = cell / width_;
  int n = 0;
  if (row > 0 && passable_[cell - width_]) out[n++] = cell - width_;
  if (col > 0 && passable_[cell - 1]) out[n++] = cell - 1;
  if (col + 1 < width_ && passable_[cell + 1]) out[n++] = cell + 1;
  if (row + 1 < height_ && passable_[cell + width_]) out[n++] = cell + width_;
  return n;
}

void check_well_formed(const MapfInstance& instance) {
  std::set<Coord> starts;
  std::set<Coord> goals;
  for (std::size_t i = 0; i < instance.agents.size(); ++i) {
    const AgentTask& a = instance.agents[i];
    if (a.id != static_cast<int>(i)) throw std::invalid_argument("agent ids must be 0..n-1 in order");
    if (!instance.map.passable(a.start)) {
      throw std::invalid_argument("agent " + std::to_string(i) + " start is not a passable cell");
    }
    if (!instance.map.passable(a.goal)) {
      throw std::invalid_argument("agent " + std::to_string(i) + " goal is not a passable cell");
    }
    if (!starts.insert(a.start).second) {
      throw std::invalid_argument("duplicate start for agent " + std::to_string(i));
    }
    if (!goals.insert(a.goal).second) {
      throw std::invalid_argument("duplicate goal for agent " + std::to_string(i));
    }
  }
}

GridMap parse_map(std::string_view text) {
  const auto lines = split_lines(text);
  int width = -1;
  int height = -1;
  std::size_t i = 0;
  bool saw_type = false;
  bool saw_map = false;
  for (; i < lines.size(); ++i) {
    auto fields = split_fields(lines[i]);
    if (fields.empty()) continue;
    if (fields[0] == "type") {
      saw_type = true;
    } else if (fields[0] == "height" && fields.size() == 2) {
      height = parse_number<int>(fields[1], "height");
    } else if (fields[0] == "width" && fields.size() == 2) {
      width = parse_number<int>(fields[1], "width");
    } else if (fields[0] == "map" && fields.size() == 1) {
      saw_map = true;
      ++i;
      break;
    } else {
      throw ParseError("malformed map header line: '" + std::string(lines[i]) + "'");
    }
  }
  if (!saw_type || !saw_map || width <= 0 || height <= 0) {
    throw ParseError("malformed map header (expected type/height/width/map)");
  }
  if (lines.size() - i != static_cast<std::size_t>(height)) {
    throw ParseError("map declares height " + std::to_string(height) + " but has " +
                     std::to_string(lines.size() - i) + " rows");
  }
  std::vector<std::uint8_t> passable;
  passable.reserve(static_cast<std::size_t>(width) * height);
  for (int r = 0; r < height; ++r) {
    std::string_view row = lines[i + r];
    if (row.size() != static_cast<std::size_t>(width)) {
      throw ParseError("map row " + std::to_string(r) + " has length " + std::to_string(row.size()) +
                       ", expected " + std::to_string(width));
    }
    for (char g : row) {
      switch (g) {
        case '.':
        case 'G':
          passable.push_back(1);
          break;
        case '@':
        case 'O':
        case 'T':
          passable.push_back(0);
          break;
        default:
          throw ParseError(std::string("unknown map glyph '") + g + "'");
      }
    }
  }
  return GridMap(width, height, std::move(passable));
}

std::string serialize_map(const GridMap& map) {
  std::string out = "type octile\nheight " + std::to_string(map.height()) + "\nwidth " +
                    std::to_string(map.width()) + "\nmap\n";
  for (int r = 0; r < map.height(); ++r) {
    for (int c = 0; c < map.width(); ++c) out += map.passable(Coord{c, r}) ? '.' : '@';
    out += '\n';
  }
  return out;
}

std::vector<ScenarioEntry> parse_scenario(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) throw ParseError("empty scenario (missing version line)");
  auto head = split_fields(lines[0]);
  if (head.size() != 2 || head[0] != "version" || parse_number<double>(head[1], "version") != 1.0) {
    throw ParseError("scenario must start with 'version 1'");
  }
  std::vector<ScenarioEntry> entries;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto f = split_fields(lines[i]);
    if (f.empty()) continue;
    if (f.size() != 9) {
      throw ParseError("scenario line " + std::to_string(i + 1) + " has " + std::to_string(f.size()) +
                       " fields, expected 9");
    }
    ScenarioEntry e;
    e.bucket = parse_number<int>(f[0], "bucket");
    e.map_name = std::string(f[1]);
    e.map_width = parse_number<int>(f[2], "map width");
    e.map_height = parse_number<int>(f[3], "map height");
    e.start = {parse_number<int>(f[4], "start x"), parse_number<int>(f[5], "start y")};
    e.goal = {parse_number<int>(f[6], "goal x"), parse_number<int>(f[7], "goal y")};
    e.optimal_length = parse_number<double>(f[8], "optimal length");
    if (e.optimal_length < 0) throw ParseError("negative optimal length");
    entries.push_back(std::move(e));
  }
  return entries;
}

MapfInstance build_instance(const GridMap& map, const std::vector<ScenarioEntry>& entries,
                            int n_agents, std::string name) {
  if (n_agents < 0 || static_cast<std::size_t>(n_agents) > entries.size()) {
    throw std::invalid_argument("requested " + std::to_string(n_agents) + " agents but scenario has " +
                                std::to_string(entries.size()) + " entries");
  }
  MapfInstance inst;
  inst.map = map;
  inst.name = std::move(name);
  for (int i = 0; i < n_agents; ++i) {
    const ScenarioEntry& e = entries[i];
    if (e.map_width != map.width() || e.map_height != map.height()) {
      throw std::invalid_argument("scenario entry " + std::to_string(i) + " refers to a " +
                                  std::to_string(e.map_width) + "x" + std::to_string(e.map_height) + " map");
    }
    inst.agents.push_back({i, e.start, e.goal});
  }
  check_well_formed(inst);
  return inst;
}

PaddedInstance pad_instance(const MapfInstance& instance, int target_w, int target_h) {
  const GridMap& m = instance.map;
  if (target_w < m.width() || target_h < m.height()) {
    throw std::invalid_argument("pad target " + std::to_string(target_w) + "x" + std::to_string(target_h) +
                                " is smaller than map " + std::to_string(m.width()) + "x" +
                                std::to_string(m.height()));
  }
  const Coord offset{(target_w - m.width()) / 2, (target_h - m.height()) / 2};
  GridMap padded(target_w, target_h, std::vector<std::uint8_t>(static_cast<std::size_t>(target_w) * target_h, 0));
  for (int r = 0; r < m.height(); ++r) {
    for (int c = 0; c < m.width(); ++c) {
      padded.set_passable({c + offset.col, r + offset.row}, m.passable(Coord{c, r}));
    }
  }
  PaddedInstance out{{std::move(padded), instance.agents, instance.name}, offset};
  for (auto& a : out.instance.agents) {
    a.start = {a.start.col + offset.col, a.start.row + offset.row};
    a.goal = {a.goal.col + offset.col, a.goal.row + offset.row};
  }
  return out;
}

namespace {

void place_agents(Rng& rng, MapfInstance& inst, int n_agents) {
  const GridMap& map = inst.map;
  if (n_agents < 0) throw std::invalid_argument("negative agent count");
  if (map.free_count() < 2 * n_agents) {
    throw std::invalid_argument("need " + std::to_string(2 * n_agents) + " distinct free cells, map has " +
                                std::to_string(map.free_count()));
  }
  const auto label = component_labels(map);
  std::vector<int> pool;
  for (int i = 0; i < map.cell_count(); ++i) {
    if (map.passable(i)) pool.push_back(i);
  }
  constexpr int kMaxResamples = 1000;
  for (int a = 0; a < n_agents; ++a) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxResamples && !placed; ++attempt) {
      const auto n = pool.size();
      std::size_t si = rng.below(n);
      std::size_t gi = rng.below(n - 1);
      if (gi >= si) ++gi;
      if (label[pool[si]] != label[pool[gi]]) continue;
      inst.agents.push_back({a, map.coord(pool[si]), map.coord(pool[gi])});
      // Remove the higher index first so the lower stays valid.
      for (std::size_t idx : {std::max(si, gi), std::min(si, gi)}) {
        pool[idx] = pool.back();
        pool.pop_back();
      }
      placed = true;
    }
    if (!placed) {
      throw std::runtime_error("could not place agent " + std::to_string(a) + " after " +
                               std::to_string(kMaxResamples) + " resamples");
    }
  }
}

}  // namespace

MapfInstance random_instance(std::uint64_t seed, int width, int height, double obstacle_density,
                             int n_agents) {
  if (!(obstacle_density >= 0.0 && obstacle_density < 1.0)) {
    throw std::invalid_argument("obstacle density must be in [0, 1)");
  }
  Rng rng(seed);
  GridMap map(width, height);
  const int cells = map.cell_count();
  const int n_obstacles = static_cast<int>(std::floor(obstacle_density * cells));
  std::vector<int> order(cells);
  for (int i = 0; i < cells; ++i) order[i] = i;
  rng.shuffle(std::span<int>(order));
  for (int i = 0; i < n_obstacles; ++i) map.set_passable(map.coord(order[i]), false);

  MapfInstance inst;
  inst.map = std::move(map);
  std::ostringstream name;
  name << "random-s" << seed << "-" << width << "x" << height << "-o" << n_obstacles << "-a" << n_agents;
  inst.name = name.str();
  place_agents(rng, inst, n_agents);
  return inst;
}

MapfInstance random_agents_on_map(std::uint64_t seed, const GridMap& map, int n_agents) {
  Rng rng(seed);
  MapfInstance inst;
  inst.map = map;
  inst.name = "agents-s" + std::to_string(seed) + "-a" + std::to_string(n_agents);
  place_agents(rng, inst, n_agents);
  return inst;
}

nlohmann::json instance_to_json(const MapfInstance& instance) {
  nlohmann::json obstacles = nlohmann::json::array();
  for (Coord c : instance.map.obstacles()) obstacles.push_back({c.col, c.row});
  nlohmann::json agents = nlohmann::json::array();
  for (const auto& a : instance.agents) {
    agents.push_back({{"start", {a.start.col, a.start.row}}, {"goal", {a.goal.col, a.goal.row}}});
  }
  return {{"name", instance.name},
          {"width", instance.map.width()},
          {"height", instance.map.height()},
          {"obstacles", std::move(obstacles)},
          {"agents", std::move(agents)}};
}

MapfInstance instance_from_json(const nlohmann::json& j) {
  try {
    MapfInstance inst;
    inst.name = j.at("name").get<std::string>();
    GridMap map(j.at("width").get<int>(), j.at("height").get<int>());
    for (const auto& o : j.at("obstacles")) {
      Coord c{o.at(0).get<int>(), o.at(1).get<int>()};
      if (!map.in_bounds(c)) throw ParseError("obstacle out of bounds");
      map.set_passable(c, false);
    }
    inst.map = std::move(map);
    int id = 0;
    for (const auto& a : j.at("agents")) {
      inst.agents.push_back({id++,
                             {a.at("start").at(0).get<int>(), a.at("start").at(1).get<int>()},
                             {a.at("goal").at(0).get<int>(), a.at("goal").at(1).get<int>()}});
    }
    check_well_formed(inst);
    return inst;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed instance JSON: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mapfast
