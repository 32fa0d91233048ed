#include "mapfast/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "mapfast/analysis.hpp"
#include "mapfast/evaluator.hpp"
#include "mapfast/oracle.hpp"
#include "mapfast/portfolio.hpp"
#include "mapfast/train.hpp"

namespace mapfast {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::vector<std::string> kSolverNames = {"cbs", "cbsh", "sat", "oracle"};

struct InstanceArgs {
  std::string instance_json;
  std::string map_path;
  std::string scen_path;
  int agents = 0;
  std::optional<std::uint64_t> random_seed;
  int width = 8;
  int height = 8;
  double density = 0.2;

  void add(CLI::App* app) {
    app->add_option("--instance", instance_json, "Instance JSON file");
    app->add_option("--map", map_path, "MovingAI .map file");
    app->add_option("--scen", scen_path, "MovingAI .scen file (with --map)");
    app->add_option("--agents", agents, "Number of agents")->check(CLI::NonNegativeNumber);
    app->add_option("--random-seed", random_seed, "Generate a random instance with this seed");
    app->add_option("--width", width, "Random instance width")->check(CLI::PositiveNumber);
    app->add_option("--height", height, "Random instance height")->check(CLI::PositiveNumber);
    app->add_option("--density", density, "Random instance obstacle density")->check(CLI::Range(0.0, 0.99));
  }

  MapfInstance load() const {
    const int sources = !instance_json.empty() + !map_path.empty() + random_seed.has_value();
    if (sources != 1) throw UsageError("give exactly one of --instance, --map, --random-seed");
    if (!instance_json.empty()) {
      try {
        return instance_from_json(nlohmann::json::parse(read_text_file(instance_json)));
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(instance_json + ": " + e.what());
      }
    }
    if (random_seed) return random_instance(*random_seed, width, height, density, agents);
    const GridMap map = parse_map(read_text_file(map_path));
    if (scen_path.empty()) throw UsageError("--map needs --scen");
    const auto entries = parse_scenario(read_text_file(scen_path));
    const int n = agents > 0 ? agents : static_cast<int>(entries.size());
    return build_instance(map, entries, n, std::filesystem::path(scen_path).filename().string());
  }
};

SelectionMode mode_from_name(const std::string& name) {
  if (name == "class") return SelectionMode::ClassArgmax;
  if (name == "pairwise") return SelectionMode::PairwiseRank;
  throw UsageError("unknown selection mode '" + name + "' (expected class or pairwise)");
}

std::string mode_name(SelectionMode m) { return m == SelectionMode::ClassArgmax ? "class" : "pairwise"; }

LossMask parse_losses(const std::string& text) {
  LossMask mask{false, false, false};
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item == "class") {
      mask.class_loss = true;
    } else if (item == "comp") {
      mask.completion_loss = true;
    } else if (item == "pair") {
      mask.pairwise_loss = true;
    } else {
      throw UsageError("unknown loss '" + item + "' (expected class, comp, pair)");
    }
  }
  return mask;
}

nlohmann::json paths_json(const std::vector<Path>& paths) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : paths) {
    nlohmann::json cells = nlohmann::json::array();
    for (Coord c : p.cells) cells.push_back({c.col, c.row});
    out.push_back(cells);
  }
  return out;
}

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream f(path, mode);
  if (!f) throw IoError("cannot write " + path);
  return f;
}

// Config values become option defaults so that explicit flags still win.
void apply_config(CLI::App& app, const nlohmann::json& config) {
  if (!config.is_object()) throw UsageError("config file must hold a JSON object");
  for (const auto& [verb, section] : config.items()) {
    CLI::App* sub = nullptr;
    try {
      sub = app.get_subcommand(verb);
    } catch (const CLI::OptionNotFound&) {
      throw UsageError("config section '" + verb + "' is not a command");
    }
    if (!section.is_object()) throw UsageError("config section '" + verb + "' must be an object");
    for (const auto& [key, value] : section.items()) {
      CLI::Option* opt = sub->get_option_no_throw("--" + key);
      if (opt == nullptr) throw UsageError("config key '" + verb + "." + key + "' is not an option");
      std::string text;
      if (value.is_string()) {
        text = value.get<std::string>();
      } else if (value.is_boolean()) {
        text = value.get<bool>() ? "true" : "false";
      } else {
        text = value.dump();
      }
      opt->default_val(text);
    }
  }
}

std::optional<std::string> config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a path");
      return args[i + 1];
    }
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  if (const char* env = std::getenv(kConfigEnv); env != nullptr && *env != '\0') return std::string(env);
  return std::nullopt;
}

std::vector<RunRecord> select_ids(const std::vector<RunRecord>& records, const std::vector<std::string>& ids) {
  const std::set<std::string> wanted(ids.begin(), ids.end());
  std::vector<RunRecord> out;
  for (const auto& r : records) {
    if (wanted.count(r.instance_id)) out.push_back(r);
  }
  return out;
}

std::vector<std::string> labeled_ids(const std::vector<RunRecord>& records) {
  std::vector<std::string> ids;
  for (const auto& r : records) {
    if (!r.excluded) ids.push_back(r.instance_id);
  }
  return ids;
}

DatasetSplit load_or_make_split(const std::string& path, const std::vector<RunRecord>& records, std::uint64_t seed) {
  if (std::filesystem::exists(path)) {
    try {
      return split_from_json(nlohmann::json::parse(read_text_file(path)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(path + ": " + e.what());
    }
  }
  const auto ids = labeled_ids(records);
  if (ids.empty()) throw std::domain_error("no labeled records");
  return split_dataset(ids, {0.8, 0.1, 0.1}, seed);
}

std::string default_split_path(const std::string& records) { return records + ".split.json"; }

struct Metadata {
  NetConfig net;
  LossMask mask;
};

Metadata read_metadata(const std::string& checkpoint, const Network& net) {
  Metadata m{net.config(), LossMask{}};
  const std::string path = checkpoint + ".json";
  if (!std::filesystem::exists(path)) return m;
  try {
    const auto j = nlohmann::json::parse(read_text_file(path));
    m.mask = parse_losses(j.at("losses").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return m;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"MAPF algorithm portfolio and selector", "mapfast"};
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("--config", config_file, "JSON config file (sections per command)");

  // solve
  CLI::App* solve_cmd = app.add_subcommand("solve", "Solve one instance with one solver");
  InstanceArgs solve_inst;
  solve_inst.add(solve_cmd);
  std::string solver_name = "cbsh";
  double solve_budget = 10.0;
  std::string solve_clock = "wall";
  std::string solve_sat_cmd;
  std::string solve_out;
  solve_cmd->add_option("--solver", solver_name, "cbs, cbsh, sat or oracle")
      ->check(CLI::Validator(
          [](std::string& v) -> std::string {
            for (const auto& n : kSolverNames) {
              if (v == n) return {};
            }
            return "unknown solver '" + v + "' (supported: cbs, cbsh, sat, oracle)";
          },
          "SOLVER"));
  solve_cmd->add_option("--budget", solve_budget, "Time budget in seconds")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--clock", solve_clock, "wall or work")->check(CLI::IsMember({"wall", "work"}));
  solve_cmd->add_option("--sat-command", solve_sat_cmd, "External DIMACS solver command, {} = CNF path");
  solve_cmd->add_option("--out", solve_out, "Write the solution as JSON");

  // dataset
  CLI::App* dataset_cmd = app.add_subcommand("dataset", "Run the portfolio on generated instances");
  DatasetOptions ds;
  std::string ds_out, ds_split, ds_map, ds_clock = "wall";
  std::uint64_t ds_split_seed = 0;
  dataset_cmd->add_option("--out", ds_out, "Record store (JSONL, appended)")->required();
  dataset_cmd->add_option("--count", ds.count, "Labeled records to add")->check(CLI::NonNegativeNumber);
  dataset_cmd->add_option("--seed", ds.seed, "Generation seed");
  dataset_cmd->add_option("--min-side", ds.min_side)->check(CLI::PositiveNumber);
  dataset_cmd->add_option("--max-side", ds.max_side)->check(CLI::PositiveNumber);
  dataset_cmd->add_option("--min-density", ds.min_density)->check(CLI::Range(0.0, 0.99));
  dataset_cmd->add_option("--max-density", ds.max_density)->check(CLI::Range(0.0, 0.99));
  dataset_cmd->add_option("--min-agents", ds.min_agents)->check(CLI::PositiveNumber);
  dataset_cmd->add_option("--max-agents", ds.max_agents)->check(CLI::PositiveNumber);
  dataset_cmd->add_option("--map", ds_map, "Place agents on this .map instead of random maps");
  dataset_cmd->add_option("--budget", ds.budget_seconds, "Per-solver budget in seconds")->check(CLI::NonNegativeNumber);
  dataset_cmd->add_option("--clock", ds_clock, "wall or work")->check(CLI::IsMember({"wall", "work"}));
  dataset_cmd->add_option("--jobs", ds.jobs, "Instances solved concurrently")->check(CLI::PositiveNumber);
  dataset_cmd->add_option("--sat-command", ds.sat.external_command, "External DIMACS solver command");
  dataset_cmd->add_option("--split", ds_split, "Split file (default <out>.split.json)");
  dataset_cmd->add_option("--split-seed", ds_split_seed, "Shuffle seed for the 80/10/10 split");

  // train
  CLI::App* train_cmd = app.add_subcommand("train", "Train the selector on the train split");
  std::string tr_records, tr_split, tr_checkpoint, tr_trace, tr_losses = "class,comp,pair";
  NetConfig net_config;
  TrainingConfig tc;
  train_cmd->add_option("--records", tr_records, "Record store")->required();
  train_cmd->add_option("--split", tr_split, "Split file (default <records>.split.json)");
  train_cmd->add_option("--checkpoint", tr_checkpoint, "Output checkpoint")->required();
  train_cmd->add_option("--trace", tr_trace, "Loss trace CSV (default <checkpoint>.loss.csv)");
  train_cmd->add_option("--epochs", tc.epochs)->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--lr", tc.learning_rate)->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch-size", tc.batch_size)->check(CLI::PositiveNumber);
  train_cmd->add_option("--seed", tc.seed);
  train_cmd->add_option("--losses", tr_losses, "Comma list of class, comp, pair");
  train_cmd->add_option("--side", net_config.side)->check(CLI::PositiveNumber);
  train_cmd->add_option("--modules", net_config.modules)->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--branch-channels", net_config.branch_channels)->check(CLI::PositiveNumber);
  train_cmd->add_option("--features", net_config.features)->check(CLI::PositiveNumber);
  train_cmd->add_flag("--batch-norm", net_config.batch_norm, "Not supported; rejected when set");

  // predict
  CLI::App* predict_cmd = app.add_subcommand("predict", "Predict the fastest solver for one instance");
  InstanceArgs pred_inst;
  pred_inst.add(predict_cmd);
  std::string pred_checkpoint, pred_mode;
  bool pred_run = false;
  double pred_budget = 10.0;
  predict_cmd->add_option("--checkpoint", pred_checkpoint)->required();
  predict_cmd->add_option("--mode", pred_mode, "class or pairwise (default from training)");
  predict_cmd->add_flag("--run", pred_run, "Also run the selected solver");
  predict_cmd->add_option("--budget", pred_budget)->check(CLI::NonNegativeNumber);

  // evaluate
  CLI::App* eval_cmd = app.add_subcommand("evaluate", "Score the selector and baselines");
  std::string ev_records, ev_split, ev_checkpoint, ev_out, ev_json, ev_subset = "test", ev_mode;
  double ev_limit = 10.0;
  eval_cmd->add_option("--records", ev_records)->required();
  eval_cmd->add_option("--split", ev_split, "Split file (default <records>.split.json)");
  eval_cmd->add_option("--checkpoint", ev_checkpoint, "Selector checkpoint (baselines only when absent)");
  eval_cmd->add_option("--out", ev_out, "Metrics CSV (default <records>.metrics.csv)");
  eval_cmd->add_option("--json", ev_json, "Metrics JSON (default <records>.metrics.json)");
  eval_cmd->add_option("--subset", ev_subset)->check(CLI::IsMember({"train", "validation", "test", "all"}));
  eval_cmd->add_option("--limit", ev_limit, "Runtime charged for a non-finish, seconds")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--mode", ev_mode, "class or pairwise (default from training)");

  // analyze
  CLI::App* an_cmd = app.add_subcommand("analyze", "Write scatter data and heat maps");
  std::string an_records, an_dir;
  an_cmd->add_option("--records", an_records)->required();
  an_cmd->add_option("--out-dir", an_dir)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    if (auto path = config_path(args)) {
      nlohmann::json config;
      try {
        config = nlohmann::json::parse(read_text_file(*path));
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(*path + ": " + e.what());
      }
      apply_config(app, config);
    }
    if (args.empty()) {
      err << app.help();
      return kExitIo;
    }
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    if (e.get_exit_code() != 0) err << "run with --help for usage\n";
    return kExitIo;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }

  try {
    if (*solve_cmd) {
      const MapfInstance inst = solve_inst.load();
      const ClockKind clock = clock_from_string(solve_clock);
      SolveResult r;
      if (solver_name == "oracle") {
        r = joint_state_oracle(inst, solve_budget, clock);
      } else {
        r = solve(algorithm_from_name(solver_name), inst, solve_budget, clock, SatOptions{solve_sat_cmd});
      }
      out << "instance " << inst.name << "\nsolver " << solver_name << "\nstatus " << to_string(r.status)
          << "\nruntime_seconds " << r.runtime_seconds << "\n";
      if (r.solved()) out << "sum_of_costs " << r.sum_of_costs << "\n";
      if (!r.diagnostic.empty()) out << "diagnostic " << r.diagnostic << "\n";
      if (!solve_out.empty()) {
        auto f = open_out(solve_out);
        nlohmann::json j{{"instance", inst.name},       {"solver", solver_name},
                         {"status", to_string(r.status)}, {"runtime_seconds", r.runtime_seconds},
                         {"sum_of_costs", r.sum_of_costs}, {"paths", paths_json(r.paths)}};
        f << j.dump(2) << "\n";
      }
      return r.solved() ? kExitOk : kExitDomain;
    }

    if (*dataset_cmd) {
      ds.clock = clock_from_string(ds_clock);
      if (!ds_map.empty()) ds.map = parse_map(read_text_file(ds_map));
      auto records_file = open_out(ds_out, std::ios::app);
      auto instances_file = open_out(instance_store_path(ds_out), std::ios::app);
      int seen = 0;
      const DatasetSummary summary = generate_dataset(ds, &records_file, &instances_file, [&](const RunRecord& r) {
        ++seen;
        out << "[" << seen << "] " << r.instance_id << " fastest "
            << (r.fastest ? algorithm_name(*r.fastest) : std::string("none")) << "\n";
      });
      records_file.close();
      const auto all = read_records_file(ds_out);
      const DatasetSplit split = split_dataset(labeled_ids(all), {0.8, 0.1, 0.1}, ds_split_seed);
      auto split_file = open_out(ds_split.empty() ? default_split_path(ds_out) : ds_split);
      split_file << split_to_json(split).dump(2) << "\n";
      out << "labeled " << summary.labeled << " excluded " << summary.excluded << " store " << all.size()
          << " records; split " << split.train.size() << "/" << split.validation.size() << "/" << split.test.size()
          << "\n";
      return kExitOk;
    }

    if (*train_cmd) {
      tc.mask = parse_losses(tr_losses);
      tc.validate();
      const auto records = read_records_file(tr_records);
      const auto ids = labeled_ids(records);
      if (ids.empty()) {
        err << "error: no labeled records in " << tr_records << "\n";
        return kExitDomain;
      }
      const DatasetSplit split =
          load_or_make_split(tr_split.empty() ? default_split_path(tr_records) : tr_split, records, 0);
      const auto instances = read_instances_file(instance_store_path(tr_records));
      const auto samples = build_samples(select_ids(records, split.train), instances, net_config.side);
      if (samples.empty()) {
        err << "error: the train split is empty\n";
        return kExitDomain;
      }
      out << "training on " << samples.size() << " instances\n";
      const TrainResult result = train(samples, net_config, tc);
      for (const auto& e : result.trace) {
        out << "epoch " << e.epoch << " l_class " << e.mean.l_class << " l_comp " << e.mean.l_comp << " l_pair "
            << e.mean.l_pair << " l_tot " << e.mean.l_tot << "\n";
      }
      result.network.save(tr_checkpoint);
      auto trace = open_out(tr_trace.empty() ? tr_checkpoint + ".loss.csv" : tr_trace);
      write_loss_trace_csv(trace, result.trace);
      auto meta = open_out(tr_checkpoint + ".json");
      meta << nlohmann::json{{"side", net_config.side},
                             {"modules", net_config.modules},
                             {"branch_channels", net_config.branch_channels},
                             {"features", net_config.features},
                             {"batch_norm", false},
                             {"losses", tr_losses},
                             {"selection", mode_name(selection_mode_for(tc.mask))},
                             {"epochs", tc.epochs},
                             {"learning_rate", tc.learning_rate},
                             {"batch_size", tc.batch_size},
                             {"seed", tc.seed},
                             {"train_instances", samples.size()}}
                  .dump(2)
           << "\n";
      return kExitOk;
    }

    if (*predict_cmd) {
      const Network net = Network::load(pred_checkpoint);
      const Metadata meta = read_metadata(pred_checkpoint, net);
      const SelectionMode mode = pred_mode.empty() ? selection_mode_for(meta.mask) : mode_from_name(pred_mode);
      const MapfInstance inst = pred_inst.load();
      const Prediction p = net.forward(encode_instance(inst, net.config().side));
      const int choice = select_algorithm(p, mode);
      out << std::setprecision(6);
      for (int a = 0; a < kPortfolioSize; ++a) {
        out << algorithm_name(a) << " class_prob " << p.class_probs[a] << " completion_prob " << p.completion_probs[a]
            << "\n";
      }
      out << "selected " << algorithm_name(choice) << "\n";
      if (pred_run) {
        const SolveResult r = solve(kPortfolio[choice], inst, pred_budget);
        out << "status " << to_string(r.status) << "\nruntime_seconds " << r.runtime_seconds << "\n";
        return r.solved() ? kExitOk : kExitDomain;
      }
      return kExitOk;
    }

    if (*eval_cmd) {
      const auto records = read_records_file(ev_records);
      std::vector<RunRecord> subset;
      if (ev_subset == "all") {
        for (const auto& r : records) {
          if (!r.excluded) subset.push_back(r);
        }
      } else {
        const DatasetSplit split =
            load_or_make_split(ev_split.empty() ? default_split_path(ev_records) : ev_split, records, 0);
        subset = select_ids(records, ev_subset == "train" ? split.train
                                     : ev_subset == "validation" ? split.validation
                                                                 : split.test);
      }
      if (subset.empty()) {
        err << "error: no labeled records in the " << ev_subset << " subset\n";
        return kExitDomain;
      }
      std::vector<Entrant> entrants{{"oracle", oracle_selector(subset)}};
      std::optional<CoverageAnalysis> coverage;
      if (!ev_checkpoint.empty()) {
        const Network net = Network::load(ev_checkpoint);
        const Metadata meta = read_metadata(ev_checkpoint, net);
        const SelectionMode mode = ev_mode.empty() ? selection_mode_for(meta.mask) : mode_from_name(ev_mode);
        const auto instances = read_instances_file(instance_store_path(ev_records));
        Entrant selector{"mapfast", {}};
        std::vector<std::vector<bool>> completion;
        for (const auto& s : build_samples(subset, instances, net.config().side)) {
          const Prediction p = net.forward(s.input);
          selector.choices.push_back(select_algorithm(p, mode));
          std::vector<bool> bits;
          for (double v : p.completion_probs) bits.push_back(v >= 0.5);
          completion.push_back(bits);
        }
        entrants.push_back(selector);
        coverage = coverage_analysis(completion, subset);
      }
      for (int a = 0; a < kPortfolioSize; ++a) entrants.push_back(algorithm_entrant(a, subset.size()));
      const auto rows = evaluate_entrants(subset, entrants, ev_limit);
      auto csv = open_out(ev_out.empty() ? ev_records + ".metrics.csv" : ev_out);
      write_metrics_csv(csv, rows);
      auto json = open_out(ev_json.empty() ? ev_records + ".metrics.json" : ev_json);
      json << metrics_json(rows, coverage ? &*coverage : nullptr).dump(2) << "\n";
      write_metrics_csv(out, rows);
      return kExitOk;
    }

    if (*an_cmd) {
      const auto records = read_records_file(an_records);
      const auto instances = read_instances_file(instance_store_path(an_records));
      std::filesystem::create_directories(an_dir);
      auto scatter = open_out((std::filesystem::path(an_dir) / "scatter.csv").string());
      write_scatter_csv(scatter, scatter_rows(records, features_for(instances)));
      // Heat maps need a shared map; use the most frequent one.
      std::map<std::string, std::pair<int, const MapfInstance*>> by_map;
      for (const auto& [id, inst] : instances) {
        auto& slot = by_map[serialize_map(inst.map)];
        ++slot.first;
        slot.second = &inst;
      }
      if (!by_map.empty()) {
        const MapfInstance* common = nullptr;
        int best = 0;
        for (const auto& [key, slot] : by_map) {
          if (slot.first > best) {
            best = slot.first;
            common = slot.second;
          }
        }
        std::map<std::string, MapfInstance> same_map;
        for (const auto& [id, inst] : instances) {
          if (inst.map == common->map) same_map[id] = inst;
        }
        std::vector<std::string> ids;
        for (const auto& r : records) {
          if (!r.excluded && same_map.count(r.instance_id)) ids.push_back(r.instance_id);
        }
        const auto on_map = select_ids(records, ids);
        for (int a = 0; a < kPortfolioSize; ++a) {
          const auto won = instances_won_by(a, on_map, same_map);
          auto pgm = open_out((std::filesystem::path(an_dir) / ("heatmap_" + algorithm_name(a) + ".pgm")).string(),
                              std::ios::binary);
          write_pgm(pgm, heatmap(common->map, won));
        }
        out << "heat maps over " << best << " instances sharing one map\n";
      }
      out << "wrote " << an_dir << "\n";
      return kExitOk;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitDomain;
  }
  return kExitIo;
}

}  // namespace mapfast
