// Copyright 2026 The m2nav Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "m2n/io.hpp"
#include "m2n/manip_map.hpp"
#include "m2n/metrics.hpp"
#include "m2n/rl.hpp"
#include "m2n/simenv.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

struct MapgenArgs {
  std::string chain_file, camera_file, out_dir;
  std::vector<double> region_lo{0.0, -1.0, 0.0}, region_hi{1.2, 1.0, 1.4};
  double cell_size = 0.05;
  int samples = 4;
  std::uint64_t seed = 1;
  int workers = 1;
  int stride = 4;
  double prob_floor = 1e-4;
  double base_height = 0.5;
};

int run_mapgen(const MapgenArgs& a) {
  const auto chain = m2n::io::load_chain(a.chain_file);
  const auto camera = m2n::io::load_camera(a.camera_file);
  const auto grid = m2n::ActionGrid::make(camera.intrinsics.width,
                                          camera.intrinsics.height, a.stride);
  m2n::map::Region region;
  region.lo = {a.region_lo[0], a.region_lo[1], a.region_lo[2]};
  region.hi = {a.region_hi[0], a.region_hi[1], a.region_hi[2]};
  m2n::map::MapBuildOptions opts;
  opts.samples_per_cell = a.samples;
  opts.seed = a.seed;
  opts.workers = a.workers;

  const auto wmap = m2n::map::build_workspace_map(chain, region, a.cell_size, opts);

  double lo = 0.0, hi = 0.0;
  bool first = true;
  for (double s : wmap.scores) {
    if (s == m2n::map::WorkspaceMap::kInfeasible) continue;
    lo = first ? s : std::min(lo, s);
    hi = first ? s : std::max(hi, s);
    first = false;
  }
  std::cout << "map: " << wmap.nx << "x" << wmap.ny << "x" << wmap.nz
            << " cells, feasible " << wmap.feasible_count() << "\n";
  if (!first) {
    std::cout << "score range: [" << m2n::io::format_double(lo) << ", "
              << m2n::io::format_double(hi) << "]\n";
  }

  m2n::map::PixelPrior prior;
  try {
    prior = m2n::map::project_to_pixel_prior(wmap, camera, m2n::BasePose{},
                                             a.base_height, grid, a.prob_floor);
  } catch (const m2n::map::EmptyPriorError& e) {
    std::cerr << "warning: " << e.what() << "; writing a uniform prior\n";
    prior = m2n::map::uniform_prior(grid);
  }

  fs::create_directories(a.out_dir);
  const fs::path out(a.out_dir);
  m2n::io::save_map((out / "wmap.json").string(), wmap);
  m2n::io::save_prior_csv((out / "prior.csv").string(), prior);
  m2n::io::write_prior_heatmap((out / "prior_heatmap.ppm").string(), prior);
  std::cout << "wrote " << (out / "wmap.json").string() << ", "
            << (out / "prior.csv").string() << ", "
            << (out / "prior_heatmap.ppm").string() << "\n";
  return kExitOk;
}

struct RunConfig {
  std::string chain_file, camera_file, task_file, trainer_file;
  std::optional<std::string> prior_file;
  std::string out_dir;
  std::vector<std::uint64_t> seeds;
  std::vector<m2n::rl::Variant> variants;
};

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw m2n::io::ConfigError(path + ": cannot open file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw m2n::io::ConfigError(path + ": " + e.what());
  }
  if (j.value("schema", std::string()) != "run-v1") {
    throw m2n::io::ConfigError(path + ": expected schema \"run-v1\"");
  }
  const fs::path base = fs::path(path).parent_path();
  auto resolve = [&base](const std::string& p) {
    const fs::path fp(p);
    return fp.is_absolute() ? fp.string() : (base / fp).lexically_normal().string();
  };
  RunConfig cfg;
  try {
    cfg.chain_file = resolve(j.at("chain").get<std::string>());
    cfg.camera_file = resolve(j.at("camera").get<std::string>());
    cfg.task_file = resolve(j.at("task").get<std::string>());
    cfg.trainer_file = resolve(j.at("trainer").get<std::string>());
    if (j.contains("prior") && !j["prior"].is_null()) {
      cfg.prior_file = resolve(j["prior"].get<std::string>());
    }
    cfg.out_dir = resolve(j.at("out_dir").get<std::string>());
    for (const json& s : j.at("seeds")) cfg.seeds.push_back(s.get<std::uint64_t>());
    for (const json& v : j.at("variants")) {
      cfg.variants.push_back(m2n::rl::variant_from_string(v.get<std::string>()));
    }
  } catch (const json::exception& e) {
    throw m2n::io::ConfigError(path + ": " + e.what());
  }
  if (cfg.seeds.empty() || cfg.variants.empty()) {
    throw m2n::io::ConfigError(path + ": seeds and variants must be non-empty");
  }
  return cfg;
}

std::string pair_tag(m2n::rl::Variant v, std::uint64_t seed) {
  return m2n::rl::to_string(v) + "_s" + std::to_string(seed);
}

std::set<std::string> load_completed(const fs::path& state_path) {
  std::set<std::string> done;
  std::ifstream in(state_path);
  if (!in) return done;
  try {
    const json j = json::parse(in);
    for (const json& t : j.value("completed", json::array())) {
      done.insert(t.get<std::string>());
    }
  } catch (const json::exception&) {
    // Unreadable state restarts from scratch rather than failing the run.
  }
  return done;
}

void save_completed(const fs::path& state_path, const std::set<std::string>& done) {
  json j;
  j["schema"] = "run-state-v1";
  j["completed"] = done;
  std::ofstream out(state_path);
  out << j.dump(2) << "\n";
}

int run_train(const std::string& run_file, bool resume) {
  const RunConfig run = load_run_config(run_file);
  const auto chain = m2n::io::load_chain(run.chain_file);
  const auto camera = m2n::io::load_camera(run.camera_file);
  const auto task = m2n::io::load_task(run.task_file);
  const auto trainer_base = m2n::io::load_trainer(run.trainer_file);
  const auto grid = m2n::ActionGrid::make(camera.intrinsics.width,
                                          camera.intrinsics.height,
                                          task.action_stride);

  bool needs_prior = false;
  for (auto v : run.variants) needs_prior |= m2n::rl::uses_prior(v);
  Eigen::VectorXd prior_vec =
      Eigen::VectorXd::Constant(grid.bin_count(), 1.0 / grid.bin_count());
  if (needs_prior) {
    if (!run.prior_file) {
      throw m2n::io::ConfigError(run_file +
                                 ": variants with a prior require a \"prior\" file");
    }
    const auto prior = m2n::io::load_prior_csv(*run.prior_file, grid);
    for (int b = 0; b < grid.bin_count(); ++b) prior_vec[b] = prior.probs[b];
  }

  fs::create_directories(run.out_dir);
  const fs::path out(run.out_dir);
  const fs::path state_path = out / "run_state.json";
  std::set<std::string> done = resume ? load_completed(state_path)
                                      : std::set<std::string>{};

  const m2n::rl::EnvFactory factory = [task, chain, camera]() {
    return std::make_unique<m2n::sim::Env>(task, chain, camera);
  };
  // Fail on a broken environment before any training output exists.
  factory()->reset(0);

  for (const auto variant : run.variants) {
    for (const auto seed : run.seeds) {
      const std::string tag = pair_tag(variant, seed);
      if (done.count(tag)) {
        std::cout << tag << ": already complete, skipping\n";
        continue;
      }
      m2n::rl::TrainerConfig cfg = trainer_base;
      cfg.variant = variant;
      cfg.seed = seed;
      const auto result = m2n::rl::train(factory, prior_vec, cfg);

      m2n::rl::QNetConfig qc;
      qc.bin_count = grid.bin_count();
      qc.hidden = cfg.hidden;
      m2n::rl::QFunction net(qc, 0);
      net.set_params(result.final_params);
      m2n::rl::save_checkpoint((out / (tag + ".qnet")).string(), net, variant);
      m2n::io::write_training_log((out / (tag + ".log.csv")).string(),
                                  m2n::rl::to_string(variant), seed,
                                  result.episodes, result.episode_logs);

      m2n::io::RunSummary summary;
      summary.variant = m2n::rl::to_string(variant);
      summary.seed = seed;
      summary.task = task.task == m2n::sim::Task::kReach ? "reach" : "door";
      summary.steps_run = result.steps_run;
      summary.episodes = static_cast<int>(result.episodes.size());
      summary.steps_to_threshold = result.threshold_step;
      if (!result.episodes.empty()) {
        summary.final_success_rate =
            m2n::metrics::success_rate_curve(result.episodes, cfg.metrics_window)
                .back().second;
        summary.final_mean_move_distance =
            m2n::metrics::move_distance_curve(result.episodes, cfg.metrics_window)
                .back().second;
      }
      m2n::io::save_run_summary((out / (tag + ".summary.json")).string(), summary);

      done.insert(tag);
      save_completed(state_path, done);
      std::cout << tag << ": episodes=" << summary.episodes
                << " steps=" << summary.steps_run
                << " final_success=" << m2n::io::format_double(summary.final_success_rate);
      if (summary.steps_to_threshold) {
        std::cout << " steps_to_threshold=" << *summary.steps_to_threshold;
      }
      std::cout << "\n";
    }
  }
  return kExitOk;
}

struct EvalArgs {
  std::string checkpoint, chain_file, camera_file, task_file, out_file;
  int episodes = 100;
  std::uint64_t seed = 1;
};

int run_eval(const EvalArgs& a) {
  if (a.episodes <= 0) {
    throw m2n::io::ConfigError("eval requires a positive --episodes count");
  }
  const auto chain = m2n::io::load_chain(a.chain_file);
  const auto camera = m2n::io::load_camera(a.camera_file);
  const auto task = m2n::io::load_task(a.task_file);
  m2n::rl::Variant variant = m2n::rl::Variant::kDdqn;
  const auto net = m2n::rl::load_checkpoint(a.checkpoint, &variant);
  const auto grid = m2n::ActionGrid::make(camera.intrinsics.width,
                                          camera.intrinsics.height,
                                          task.action_stride);
  if (net.config().bin_count != grid.bin_count() ||
      net.config().state_dim != m2n::aff::kStateDim) {
    throw m2n::io::ConfigError(
        "checkpoint shape (state " + std::to_string(net.config().state_dim) +
        ", bins " + std::to_string(net.config().bin_count) +
        ") does not match task shape (state " + std::to_string(m2n::aff::kStateDim) +
        ", bins " + std::to_string(grid.bin_count()) + ")");
  }

  m2n::sim::Env env(task, chain, camera);
  const auto res = m2n::rl::evaluate(env, net, variant, a.seed, a.episodes);

  json j;
  j["variant"] = m2n::rl::to_string(variant);
  j["seed"] = a.seed;
  j["episodes"] = res.episodes;
  j["successes"] = res.successes;
  j["success_rate"] = res.success_rate();
  j["mean_move_distance"] = res.mean_move_on_success;
  j["candidate_violations"] = res.candidate_violations;
  const std::string body = j.dump(2) + "\n";
  std::cout << body;
  if (!a.out_file.empty()) {
    std::ofstream out(a.out_file);
    if (!out) throw std::runtime_error("cannot open for writing: " + a.out_file);
    out << body;
  }
  return kExitOk;
}

struct CompareArgs {
  std::vector<std::string> summaries;
  std::string out_dir;
  std::int64_t bin_width = 250;
  int window = 50;
  double threshold = 0.85;
};

int run_compare(const CompareArgs& a) {
  if (a.summaries.size() < 2) {
    throw m2n::io::ConfigError("compare needs at least two summary files");
  }
  struct Entry {
    m2n::io::RunSummary summary;
    std::vector<m2n::metrics::EpisodeRecord> records;
  };
  std::map<std::string, std::vector<Entry>> by_variant;
  std::string task;
  std::int64_t max_step = 0;
  for (const std::string& spath : a.summaries) {
    Entry e;
    e.summary = m2n::io::load_run_summary(spath);
    if (task.empty()) {
      task = e.summary.task;
    } else if (task != e.summary.task) {
      throw m2n::io::ConfigError("summaries mix tasks: " + task + " vs " +
                                 e.summary.task + " in " + spath);
    }
    const std::string suffix = ".summary.json";
    if (spath.size() <= suffix.size() ||
        spath.compare(spath.size() - suffix.size(), suffix.size(), suffix) != 0) {
      throw m2n::io::ConfigError(spath + ": expected a *.summary.json path");
    }
    const std::string log_path =
        spath.substr(0, spath.size() - suffix.size()) + ".log.csv";
    e.records = m2n::io::load_training_log(log_path);
    max_step = std::max(max_step, e.summary.steps_run);
    by_variant[e.summary.variant].push_back(std::move(e));
  }

  fs::create_directories(a.out_dir);
  const fs::path out(a.out_dir);
  std::cout << "steps to " << m2n::io::format_double(a.threshold)
            << " success (window " << a.window << "):\n";
  for (const auto& [variant, entries] : by_variant) {
    std::vector<m2n::metrics::Curve> success, move;
    for (const Entry& e : entries) {
      success.push_back(m2n::metrics::success_rate_curve(e.records, a.window));
      move.push_back(m2n::metrics::move_distance_curve(e.records, a.window));
    }
    m2n::io::write_curve_csv(
        (out / (variant + "_success.csv")).string(),
        m2n::metrics::aggregate_curves(success, a.bin_width, max_step));
    m2n::io::write_curve_csv(
        (out / (variant + "_move.csv")).string(),
        m2n::metrics::aggregate_curves(move, a.bin_width, max_step));

    std::vector<double> reached;
    std::cout << "  " << variant << ":";
    for (const Entry& e : entries) {
      const auto steps =
          m2n::metrics::steps_to_threshold(e.records, a.window, a.threshold);
      std::cout << " seed" << e.summary.seed << "=";
      if (steps) {
        std::cout << *steps;
        reached.push_back(static_cast<double>(*steps));
      } else {
        std::cout << "-";
      }
    }
    if (!reached.empty()) {
      std::cout << " mean=" << m2n::io::format_double(m2n::metrics::mean_of(reached));
    }
    std::cout << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"desk-scale manipulate-to-navigate toolkit"};
  app.require_subcommand(1);

  MapgenArgs ma;
  CLI::App* mapgen = app.add_subcommand(
      "mapgen", "precompute the workspace manipulability map and pixel prior");
  mapgen->add_option("--chain", ma.chain_file, "chain-v1 JSON")->required();
  mapgen->add_option("--camera", ma.camera_file, "camera-v1 JSON")->required();
  mapgen->add_option("--out-dir", ma.out_dir, "output directory")->required();
  mapgen->add_option("--region-lo", ma.region_lo, "region lower corner (m)")
      ->expected(3);
  mapgen->add_option("--region-hi", ma.region_hi, "region upper corner (m)")
      ->expected(3);
  mapgen->add_option("--cell-size", ma.cell_size, "cell edge length (m)");
  mapgen->add_option("--samples", ma.samples, "IK seeds per cell");
  mapgen->add_option("--seed", ma.seed, "RNG seed");
  mapgen->add_option("--workers", ma.workers, "worker threads");
  mapgen->add_option("--stride", ma.stride, "action bin stride (px)");
  mapgen->add_option("--floor", ma.prob_floor, "per-bin probability floor");
  mapgen->add_option("--base-height", ma.base_height, "base origin height (m)");

  std::string run_file;
  bool resume = false;
  CLI::App* train = app.add_subcommand("train", "train variants over seeds");
  train->add_option("--run", run_file, "run-v1 JSON")->required();
  train->add_flag("--resume", resume, "skip (variant, seed) pairs recorded in run_state.json");

  EvalArgs ea;
  CLI::App* eval = app.add_subcommand("eval", "greedy evaluation of a checkpoint");
  eval->add_option("--checkpoint", ea.checkpoint, "qnet-v1 file")->required();
  eval->add_option("--chain", ea.chain_file, "chain-v1 JSON")->required();
  eval->add_option("--camera", ea.camera_file, "camera-v1 JSON")->required();
  eval->add_option("--task", ea.task_file, "task-v1 JSON")->required();
  eval->add_option("--episodes", ea.episodes, "episode count");
  eval->add_option("--seed", ea.seed, "RNG seed");
  eval->add_option("--out", ea.out_file, "write the metrics JSON here too");

  CompareArgs ca;
  CLI::App* compare = app.add_subcommand("compare", "merge curves across runs");
  compare->add_option("--summary", ca.summaries, "*.summary.json files (repeatable)")
      ->required();
  compare->add_option("--out-dir", ca.out_dir, "output directory")->required();
  compare->add_option("--bin-width", ca.bin_width, "step bin width");
  compare->add_option("--window", ca.window, "episode window");
  compare->add_option("--threshold", ca.threshold, "success threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (mapgen->parsed()) return run_mapgen(ma);
    if (train->parsed()) return run_train(run_file, resume);
    if (eval->parsed()) return run_eval(ea);
    if (compare->parsed()) return run_compare(ca);
    return kExitUsage;
  } catch (const m2n::io::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
