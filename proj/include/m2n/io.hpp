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

#ifndef M2N_IO_HPP_
#define M2N_IO_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "m2n/camera.hpp"
#include "m2n/kinematics.hpp"
#include "m2n/manip_map.hpp"
#include "m2n/metrics.hpp"
#include "m2n/observation.hpp"
#include "m2n/rl.hpp"
#include "m2n/simenv.hpp"

namespace m2n::io {

// Bad or inconsistent input files. The CLI maps this to the usage exit code;
// everything else stays a runtime error.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// JSON config files, each carrying a "schema" tag.
kin::KinematicChain load_chain(const std::string& path);        // chain-v1
void save_chain(const std::string& path, const kin::KinematicChain& chain);

cam::CameraModel load_camera(const std::string& path);          // camera-v1
void save_camera(const std::string& path, const cam::CameraModel& camera);

sim::TaskConfig load_task(const std::string& path);             // task-v1
void save_task(const std::string& path, const sim::TaskConfig& task);

rl::TrainerConfig load_trainer(const std::string& path);        // trainer-v1
void save_trainer(const std::string& path, const rl::TrainerConfig& cfg);

// Workspace map: JSON with a flat row-major score array, infeasible = -1.
map::WorkspaceMap load_map(const std::string& path);            // wmap-v1
void save_map(const std::string& path, const map::WorkspaceMap& wmap);

// Pixel prior as CSV rows (bin_x, bin_y, prob, supported) with a header.
void save_prior_csv(const std::string& path, const map::PixelPrior& prior);
map::PixelPrior load_prior_csv(const std::string& path, const ActionGrid& grid);

// Binary netpbm writers.
void write_ppm(const std::string& path, int width, int height,
               const std::vector<std::uint8_t>& rgb);
void write_pgm8(const std::string& path, int width, int height,
                const std::vector<std::uint8_t>& gray);
void write_pgm16(const std::string& path, int width, int height,
                 const std::vector<std::uint16_t>& gray);  // big-endian payload

// Frame dumps: <prefix>.ppm (color), <prefix>_depth.pgm (millimeters,
// clamped to 65535; sky saturates), <prefix>_ids.pgm.
void dump_observation(const std::string& prefix, const Observation& obs);

// Fig-2 style heat image of the prior at full image resolution.
void write_prior_heatmap(const std::string& path, const map::PixelPrior& prior);

// Per-episode training log.
void write_training_log(const std::string& path, const std::string& variant,
                        std::uint64_t seed,
                        const std::vector<metrics::EpisodeRecord>& episodes,
                        const std::vector<rl::StepLog>& logs);

// Reads a training log back into episode records (variant and seed columns
// are validated, not returned).
std::vector<metrics::EpisodeRecord> load_training_log(const std::string& path);

// Aggregated curve CSV: step, mean, stderr.
void write_curve_csv(const std::string& path,
                     const std::vector<metrics::CurvePoint>& curve);

struct RunSummary {
  std::string variant;
  std::uint64_t seed = 0;
  std::string task;
  double final_success_rate = 0.0;
  double final_mean_move_distance = 0.0;
  std::optional<std::int64_t> steps_to_threshold;
  std::int64_t steps_run = 0;
  int episodes = 0;
};

void save_run_summary(const std::string& path, const RunSummary& summary);
RunSummary load_run_summary(const std::string& path);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace m2n::io

#endif  // M2N_IO_HPP_
