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

#include "m2n/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "m2n/geometry.hpp"

namespace m2n::io {

namespace {

using nlohmann::json;

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void require_schema(const json& j, const std::string& expected,
                    const std::string& path) {
  const std::string got = j.value("schema", std::string("<missing>"));
  if (got != expected) {
    throw ConfigError(path + ": expected schema \"" + expected + "\", found \"" +
                      got + "\"");
  }
}

Eigen::Vector3d to_vec3(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.size() != 3) {
    throw ConfigError(ctx + ": expected a 3-element array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json from_vec3(const Eigen::Vector3d& v) {
  return json::array({v.x(), v.y(), v.z()});
}

// Euler angles (x-roll, y-pitch, z-yaw applied as Rz*Ry*Rx) from a rotation.
Eigen::Vector3d matrix_to_rpy(const Eigen::Matrix3d& r) {
  Eigen::Vector3d rpy;
  const double sp = -r(2, 0);
  if (std::abs(sp) > 1.0 - 1e-12) {
    rpy.y() = std::copysign(M_PI / 2.0, sp);
    rpy.x() = std::atan2(std::copysign(1.0, sp) * r(0, 1), r(1, 1));
    rpy.z() = 0.0;
  } else {
    rpy.y() = std::asin(sp);
    rpy.x() = std::atan2(r(2, 1), r(2, 2));
    rpy.z() = std::atan2(r(1, 0), r(0, 0));
  }
  return rpy;
}

void write_text_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << body;
  if (!out) throw std::runtime_error("write failed: " + path);
}

void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

json transform_xyz(const Eigen::Isometry3d& t) { return from_vec3(t.translation()); }
json transform_rpy(const Eigen::Isometry3d& t) {
  return from_vec3(matrix_to_rpy(t.rotation()));
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

kin::KinematicChain load_chain(const std::string& path) {
  const json j = parse_file(path);
  require_schema(j, "chain-v1", path);
  kin::KinematicChain chain;
  if (!j.contains("joints") || !j["joints"].is_array() || j["joints"].empty()) {
    throw ConfigError(path + ": \"joints\" must be a non-empty array");
  }
  for (const json& jj : j["joints"]) {
    kin::JointSpec spec;
    const std::string kind = jj.value("kind", std::string());
    if (kind == "revolute") {
      spec.kind = kin::JointKind::kRevolute;
    } else if (kind == "prismatic") {
      spec.kind = kin::JointKind::kPrismatic;
    } else {
      throw ConfigError(path + ": joint kind must be revolute or prismatic");
    }
    spec.axis = to_vec3(jj.at("axis"), path + ": joint axis");
    spec.origin = make_transform(to_vec3(jj.at("origin_xyz"), path),
                                 to_vec3(jj.at("origin_rpy"), path));
    spec.lower = jj.at("lower").get<double>();
    spec.upper = jj.at("upper").get<double>();
    chain.joints.push_back(spec);
  }
  const Eigen::Vector3d zero = Eigen::Vector3d::Zero();
  chain.base_mount = make_transform(
      j.contains("base_mount_xyz") ? to_vec3(j["base_mount_xyz"], path) : zero,
      j.contains("base_mount_rpy") ? to_vec3(j["base_mount_rpy"], path) : zero);
  chain.tool = make_transform(
      j.contains("tool_xyz") ? to_vec3(j["tool_xyz"], path) : zero,
      j.contains("tool_rpy") ? to_vec3(j["tool_rpy"], path) : zero);
  try {
    chain.validate();
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return chain;
}

void save_chain(const std::string& path, const kin::KinematicChain& chain) {
  json j;
  j["schema"] = "chain-v1";
  j["joints"] = json::array();
  for (const kin::JointSpec& spec : chain.joints) {
    json jj;
    jj["kind"] = spec.kind == kin::JointKind::kRevolute ? "revolute" : "prismatic";
    jj["axis"] = from_vec3(spec.axis);
    jj["origin_xyz"] = transform_xyz(spec.origin);
    jj["origin_rpy"] = transform_rpy(spec.origin);
    jj["lower"] = spec.lower;
    jj["upper"] = spec.upper;
    j["joints"].push_back(jj);
  }
  j["base_mount_xyz"] = transform_xyz(chain.base_mount);
  j["base_mount_rpy"] = transform_rpy(chain.base_mount);
  j["tool_xyz"] = transform_xyz(chain.tool);
  j["tool_rpy"] = transform_rpy(chain.tool);
  write_json_file(path, j);
}

cam::CameraModel load_camera(const std::string& path) {
  const json j = parse_file(path);
  require_schema(j, "camera-v1", path);
  cam::CameraModel model;
  model.intrinsics.fx = j.at("fx").get<double>();
  model.intrinsics.fy = j.at("fy").get<double>();
  model.intrinsics.cx = j.at("cx").get<double>();
  model.intrinsics.cy = j.at("cy").get<double>();
  model.intrinsics.width = j.at("width").get<int>();
  model.intrinsics.height = j.at("height").get<int>();
  const Eigen::Vector3d zero = Eigen::Vector3d::Zero();
  model.mount = make_transform(
      j.contains("mount_xyz") ? to_vec3(j["mount_xyz"], path) : zero,
      j.contains("mount_rpy") ? to_vec3(j["mount_rpy"], path) : zero);
  try {
    model.intrinsics.validate();
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return model;
}

void save_camera(const std::string& path, const cam::CameraModel& camera) {
  json j;
  j["schema"] = "camera-v1";
  j["fx"] = camera.intrinsics.fx;
  j["fy"] = camera.intrinsics.fy;
  j["cx"] = camera.intrinsics.cx;
  j["cy"] = camera.intrinsics.cy;
  j["width"] = camera.intrinsics.width;
  j["height"] = camera.intrinsics.height;
  j["mount_xyz"] = transform_xyz(camera.mount);
  j["mount_rpy"] = transform_rpy(camera.mount);
  write_json_file(path, j);
}

sim::TaskConfig load_task(const std::string& path) {
  const json j = parse_file(path);
  require_schema(j, "task-v1", path);
  sim::TaskConfig cfg;
  const std::string task = j.value("task", std::string("reach"));
  if (task == "reach") {
    cfg.task = sim::Task::kReach;
  } else if (task == "door") {
    cfg.task = sim::Task::kDoor;
  } else {
    throw ConfigError(path + ": task must be reach or door");
  }
  cfg.horizon = j.value("horizon", cfg.horizon);
  cfg.action_stride = j.value("action_stride", cfg.action_stride);
  cfg.base_height = j.value("base_height", cfg.base_height);
  cfg.d_stab = j.value("d_stab", cfg.d_stab);
  cfg.d_corridor = j.value("d_corridor", cfg.d_corridor);
  cfg.sweep_step = j.value("sweep_step", cfg.sweep_step);
  if (j.contains("weights")) {
    const json& w = j["weights"];
    cfg.weights.w1 = w.value("w1", cfg.weights.w1);
    cfg.weights.w2 = w.value("w2", cfg.weights.w2);
    cfg.weights.w3 = w.value("w3", cfg.weights.w3);
    cfg.weights.w4 = w.value("w4", cfg.weights.w4);
  }
  if (j.contains("reach")) {
    const json& r = j["reach"];
    auto& g = cfg.reach;
    if (r.contains("table_center")) g.table_center = to_vec3(r["table_center"], path);
    if (r.contains("table_half")) g.table_half = to_vec3(r["table_half"], path);
    if (r.contains("panel_center")) g.panel_center = to_vec3(r["panel_center"], path);
    if (r.contains("panel_half")) g.panel_half = to_vec3(r["panel_half"], path);
    g.rand_y = r.value("rand_y", g.rand_y);
    g.rand_z = r.value("rand_z", g.rand_z);
  }
  if (j.contains("door")) {
    const json& d = j["door"];
    auto& g = cfg.door;
    g.door_x = d.value("door_x", g.door_x);
    if (d.contains("door_half")) g.door_half = to_vec3(d["door_half"], path);
    g.door_z = d.value("door_z", g.door_z);
    g.gap_half_width = d.value("gap_half_width", g.gap_half_width);
    g.wall_x = d.value("wall_x", g.wall_x);
    g.max_displacement = d.value("max_displacement", g.max_displacement);
    g.l_threshold_frac = d.value("l_threshold_frac", g.l_threshold_frac);
  }
  if (j.contains("ik")) {
    const json& ik = j["ik"];
    cfg.ik.damping = ik.value("damping", cfg.ik.damping);
    cfg.ik.max_iterations = ik.value("max_iterations", cfg.ik.max_iterations);
    cfg.ik.position_tolerance = ik.value("position_tolerance", cfg.ik.position_tolerance);
  }
  if (cfg.horizon <= 0) throw ConfigError(path + ": horizon must be positive");
  if (cfg.action_stride <= 0) throw ConfigError(path + ": action_stride must be positive");
  return cfg;
}

void save_task(const std::string& path, const sim::TaskConfig& cfg) {
  json j;
  j["schema"] = "task-v1";
  j["task"] = cfg.task == sim::Task::kReach ? "reach" : "door";
  j["horizon"] = cfg.horizon;
  j["action_stride"] = cfg.action_stride;
  j["base_height"] = cfg.base_height;
  j["d_stab"] = cfg.d_stab;
  j["d_corridor"] = cfg.d_corridor;
  j["sweep_step"] = cfg.sweep_step;
  j["weights"] = {{"w1", cfg.weights.w1}, {"w2", cfg.weights.w2},
                  {"w3", cfg.weights.w3}, {"w4", cfg.weights.w4}};
  j["reach"] = {{"table_center", from_vec3(cfg.reach.table_center)},
                {"table_half", from_vec3(cfg.reach.table_half)},
                {"panel_center", from_vec3(cfg.reach.panel_center)},
                {"panel_half", from_vec3(cfg.reach.panel_half)},
                {"rand_y", cfg.reach.rand_y},
                {"rand_z", cfg.reach.rand_z}};
  j["door"] = {{"door_x", cfg.door.door_x},
               {"door_half", from_vec3(cfg.door.door_half)},
               {"door_z", cfg.door.door_z},
               {"gap_half_width", cfg.door.gap_half_width},
               {"wall_x", cfg.door.wall_x},
               {"max_displacement", cfg.door.max_displacement},
               {"l_threshold_frac", cfg.door.l_threshold_frac}};
  j["ik"] = {{"damping", cfg.ik.damping},
             {"max_iterations", cfg.ik.max_iterations},
             {"position_tolerance", cfg.ik.position_tolerance}};
  write_json_file(path, j);
}

rl::TrainerConfig load_trainer(const std::string& path) {
  const json j = parse_file(path);
  require_schema(j, "trainer-v1", path);
  rl::TrainerConfig cfg;
  try {
    if (j.contains("variant")) {
      cfg.variant = rl::variant_from_string(j["variant"].get<std::string>());
    }
    cfg.seed = j.value("seed", cfg.seed);
    cfg.total_steps = j.value("total_steps", cfg.total_steps);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.buffer_capacity = j.value("buffer_capacity", cfg.buffer_capacity);
    cfg.gamma = j.value("gamma", cfg.gamma);
    cfg.lambda_kl = j.value("lambda_kl", cfg.lambda_kl);
    cfg.tau = j.value("tau", cfg.tau);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.target_sync_every = j.value("target_sync_every", cfg.target_sync_every);
    cfg.epsilon_start = j.value("epsilon_start", cfg.epsilon_start);
    cfg.epsilon_end = j.value("epsilon_end", cfg.epsilon_end);
    cfg.epsilon_decay_steps = j.value("epsilon_decay_steps", cfg.epsilon_decay_steps);
    cfg.env_count = j.value("env_count", cfg.env_count);
    cfg.hidden = j.value("hidden", cfg.hidden);
    cfg.metrics_window = j.value("metrics_window", cfg.metrics_window);
    cfg.success_threshold = j.value("success_threshold", cfg.success_threshold);
    cfg.stop_at_threshold = j.value("stop_at_threshold", cfg.stop_at_threshold);
    cfg.validate();
  } catch (const std::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return cfg;
}

void save_trainer(const std::string& path, const rl::TrainerConfig& cfg) {
  json j;
  j["schema"] = "trainer-v1";
  j["variant"] = rl::to_string(cfg.variant);
  j["seed"] = cfg.seed;
  j["total_steps"] = cfg.total_steps;
  j["batch_size"] = cfg.batch_size;
  j["buffer_capacity"] = cfg.buffer_capacity;
  j["gamma"] = cfg.gamma;
  j["lambda_kl"] = cfg.lambda_kl;
  j["tau"] = cfg.tau;
  j["learning_rate"] = cfg.learning_rate;
  j["target_sync_every"] = cfg.target_sync_every;
  j["epsilon_start"] = cfg.epsilon_start;
  j["epsilon_end"] = cfg.epsilon_end;
  j["epsilon_decay_steps"] = cfg.epsilon_decay_steps;
  j["env_count"] = cfg.env_count;
  j["hidden"] = cfg.hidden;
  j["metrics_window"] = cfg.metrics_window;
  j["success_threshold"] = cfg.success_threshold;
  j["stop_at_threshold"] = cfg.stop_at_threshold;
  write_json_file(path, j);
}

map::WorkspaceMap load_map(const std::string& path) {
  const json j = parse_file(path);
  require_schema(j, "wmap-v1", path);
  map::WorkspaceMap wmap;
  wmap.grid_origin = to_vec3(j.at("origin"), path + ": origin");
  wmap.cell_size = j.at("cell_size").get<double>();
  const json& dims = j.at("dims");
  if (!dims.is_array() || dims.size() != 3) {
    throw ConfigError(path + ": dims must be [nx, ny, nz]");
  }
  wmap.nx = dims[0].get<int>();
  wmap.ny = dims[1].get<int>();
  wmap.nz = dims[2].get<int>();
  if (wmap.nx <= 0 || wmap.ny <= 0 || wmap.nz <= 0 || wmap.cell_size <= 0.0) {
    throw ConfigError(path + ": dims and cell_size must be positive");
  }
  wmap.scores = j.at("scores").get<std::vector<double>>();
  const std::size_t expect = static_cast<std::size_t>(wmap.nx) * wmap.ny * wmap.nz;
  if (wmap.scores.size() != expect) {
    throw ConfigError(path + ": score count " + std::to_string(wmap.scores.size()) +
                      " does not match dims product " + std::to_string(expect));
  }
  return wmap;
}

void save_map(const std::string& path, const map::WorkspaceMap& wmap) {
  json j;
  j["schema"] = "wmap-v1";
  j["origin"] = from_vec3(wmap.grid_origin);
  j["cell_size"] = wmap.cell_size;
  j["dims"] = json::array({wmap.nx, wmap.ny, wmap.nz});
  j["scores"] = wmap.scores;
  write_json_file(path, j);
}

void save_prior_csv(const std::string& path, const map::PixelPrior& prior) {
  std::ostringstream out;
  out << "bin_x,bin_y,prob,supported\n";
  const int bins_x = prior.grid.bins_x();
  for (int b = 0; b < prior.grid.bin_count(); ++b) {
    out << (b % bins_x) << ',' << (b / bins_x) << ',' << format_double(prior.probs[b])
        << ',' << (prior.support[b] ? 1 : 0) << '\n';
  }
  write_text_file(path, out.str());
}

map::PixelPrior load_prior_csv(const std::string& path, const ActionGrid& grid) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line) || line != "bin_x,bin_y,prob,supported") {
    throw ConfigError(path + ": missing prior CSV header");
  }
  map::PixelPrior prior;
  prior.grid = grid;
  prior.probs.assign(grid.bin_count(), 0.0);
  prior.support.assign(grid.bin_count(), 0);
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string fx, fy, fp, fs;
    if (!std::getline(ls, fx, ',') || !std::getline(ls, fy, ',') ||
        !std::getline(ls, fp, ',') || !std::getline(ls, fs, ',')) {
      throw ConfigError(path + ": malformed row: " + line);
    }
    const int bx = std::stoi(fx), by = std::stoi(fy);
    if (bx < 0 || bx >= grid.bins_x() || by < 0 || by >= grid.bins_y()) {
      throw ConfigError(path + ": bin out of range: " + line);
    }
    const int b = by * grid.bins_x() + bx;
    prior.probs[b] = std::stod(fp);
    prior.support[b] = fs == "1" ? 1 : 0;
    ++rows;
  }
  if (rows != grid.bin_count()) {
    throw ConfigError(path + ": expected " + std::to_string(grid.bin_count()) +
                      " rows, found " + std::to_string(rows));
  }
  double sum = 0.0, lo = 1.0;
  for (double p : prior.probs) {
    sum += p;
    lo = std::min(lo, p);
  }
  if (lo <= 0.0 || std::abs(sum - 1.0) > 1e-6) {
    throw ConfigError(path + ": prior rows are not a strictly positive distribution");
  }
  prior.floor = lo;
  return prior;
}

namespace {

void write_netpbm(const std::string& path, const std::string& magic, int width,
                  int height, int maxval, const std::uint8_t* data,
                  std::size_t bytes) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("image dims must be positive");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << magic << "\n" << width << " " << height << "\n" << maxval << "\n";
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(bytes));
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace

void write_ppm(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& rgb) {
  if (rgb.size() != static_cast<std::size_t>(width) * height * 3) {
    throw std::invalid_argument("rgb buffer size mismatch");
  }
  write_netpbm(path, "P6", width, height, 255, rgb.data(), rgb.size());
}

void write_pgm8(const std::string& path, int width, int height,
                const std::vector<std::uint8_t>& gray) {
  if (gray.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("gray buffer size mismatch");
  }
  write_netpbm(path, "P5", width, height, 255, gray.data(), gray.size());
}

void write_pgm16(const std::string& path, int width, int height,
                 const std::vector<std::uint16_t>& gray) {
  if (gray.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("gray buffer size mismatch");
  }
  std::vector<std::uint8_t> be(gray.size() * 2);
  for (std::size_t i = 0; i < gray.size(); ++i) {
    be[2 * i] = static_cast<std::uint8_t>(gray[i] >> 8);
    be[2 * i + 1] = static_cast<std::uint8_t>(gray[i] & 0xff);
  }
  write_netpbm(path, "P5", width, height, 65535, be.data(), be.size());
}

void dump_observation(const std::string& prefix, const Observation& obs) {
  const std::size_t n = static_cast<std::size_t>(obs.width) * obs.height;
  std::vector<std::uint8_t> rgb(n * 3);
  std::vector<std::uint16_t> depth_mm(n);
  for (std::size_t i = 0; i < n; ++i) {
    rgb[3 * i] = obs.rgb[i][0];
    rgb[3 * i + 1] = obs.rgb[i][1];
    rgb[3 * i + 2] = obs.rgb[i][2];
    const double d = obs.depth[i];
    const double mm = std::isfinite(d) ? std::round(d * 1000.0) : 65535.0;
    depth_mm[i] = static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0));
  }
  write_ppm(prefix + ".ppm", obs.width, obs.height, rgb);
  write_pgm16(prefix + "_depth.pgm", obs.width, obs.height, depth_mm);
  write_pgm8(prefix + "_ids.pgm", obs.width, obs.height, obs.ids);
}

void write_prior_heatmap(const std::string& path, const map::PixelPrior& prior) {
  const int w = prior.grid.image_width;
  const int h = prior.grid.image_height;
  double max_p = 0.0;
  for (double p : prior.probs) max_p = std::max(max_p, p);
  std::vector<std::uint8_t> rgb(static_cast<std::size_t>(w) * h * 3);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const double t = max_p > 0.0 ? prior.probs[prior.grid.bin_of_pixel(u, v)] / max_p : 0.0;
      const double r = std::clamp(3.0 * t, 0.0, 1.0);
      const double g = std::clamp(3.0 * t - 1.0, 0.0, 1.0);
      const double b = std::clamp(3.0 * t - 2.0, 0.0, 1.0);
      const std::size_t i = (static_cast<std::size_t>(v) * w + u) * 3;
      rgb[i] = static_cast<std::uint8_t>(std::lround(r * 255.0));
      rgb[i + 1] = static_cast<std::uint8_t>(std::lround(g * 255.0));
      rgb[i + 2] = static_cast<std::uint8_t>(std::lround(b * 255.0));
    }
  }
  write_ppm(path, w, h, rgb);
}

void write_training_log(const std::string& path, const std::string& variant,
                        std::uint64_t seed,
                        const std::vector<metrics::EpisodeRecord>& episodes,
                        const std::vector<rl::StepLog>& logs) {
  if (episodes.size() != logs.size()) {
    throw std::invalid_argument("episode records and logs must align");
  }
  std::ostringstream out;
  out << "global_step,episode,variant,seed,success,move_distance,loss,kl,epsilon\n";
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    out << logs[i].global_step << ',' << episodes[i].episode << ',' << variant
        << ',' << seed << ',' << (episodes[i].success ? 1 : 0) << ','
        << format_double(episodes[i].move_distance) << ','
        << format_double(logs[i].loss) << ',' << format_double(logs[i].kl) << ','
        << format_double(logs[i].epsilon) << '\n';
  }
  write_text_file(path, out.str());
}

std::vector<metrics::EpisodeRecord> load_training_log(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::string line;
  if (!std::getline(in, line) ||
      line != "global_step,episode,variant,seed,success,move_distance,loss,kl,epsilon") {
    throw ConfigError(path + ": missing training log header");
  }
  std::vector<metrics::EpisodeRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() != 9) throw ConfigError(path + ": malformed row: " + line);
    metrics::EpisodeRecord rec;
    rec.end_step = std::stoll(fields[0]);
    rec.episode = std::stoi(fields[1]);
    rec.success = fields[4] == "1";
    rec.move_distance = std::stod(fields[5]);
    out.push_back(rec);
  }
  return out;
}

void write_curve_csv(const std::string& path,
                     const std::vector<metrics::CurvePoint>& curve) {
  std::ostringstream out;
  out << "step,mean,stderr\n";
  for (const metrics::CurvePoint& p : curve) {
    out << p.step << ',' << format_double(p.mean) << ','
        << format_double(p.stderr_mean) << '\n';
  }
  write_text_file(path, out.str());
}

void save_run_summary(const std::string& path, const RunSummary& summary) {
  json j;
  j["variant"] = summary.variant;
  j["seed"] = summary.seed;
  j["task"] = summary.task;
  j["final_success_rate"] = summary.final_success_rate;
  j["final_mean_move_distance"] = summary.final_mean_move_distance;
  if (summary.steps_to_threshold) {
    j["steps_to_threshold"] = *summary.steps_to_threshold;
  } else {
    j["steps_to_threshold"] = nullptr;
  }
  j["steps_run"] = summary.steps_run;
  j["episodes"] = summary.episodes;
  write_json_file(path, j);
}

RunSummary load_run_summary(const std::string& path) {
  const json j = parse_file(path);
  RunSummary s;
  try {
    s.variant = j.at("variant").get<std::string>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.task = j.value("task", std::string());
    s.final_success_rate = j.at("final_success_rate").get<double>();
    s.final_mean_move_distance = j.at("final_mean_move_distance").get<double>();
    if (j.contains("steps_to_threshold") && !j["steps_to_threshold"].is_null()) {
      s.steps_to_threshold = j["steps_to_threshold"].get<std::int64_t>();
    }
    s.steps_run = j.value("steps_run", std::int64_t{0});
    s.episodes = j.value("episodes", 0);
  } catch (const json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return s;
}

}  // namespace m2n::io
