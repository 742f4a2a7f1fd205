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

#ifndef M2N_RL_HPP_
#define M2N_RL_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "m2n/affordance.hpp"
#include "m2n/manip_map.hpp"
#include "m2n/metrics.hpp"
#include "m2n/rng.hpp"
#include "m2n/simenv.hpp"

namespace m2n::rl {

// Agent variants. The affordance flag gates both the candidate action set and
// the affordance half of the network input; the prior flag gates the KL loss
// term and prior-weighted exploration.
enum class Variant { kDdqn, kDdqnP, kDdqnA, kDdqnAP };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& name);
bool uses_prior(Variant v);
bool uses_affordance(Variant v);

// Fully connected Q-network: two tanh hidden layers, one linear output per
// action bin. Input is the state feature concatenated with the per-bin
// affordance indicator vector. Parameters live in one flat vector so the
// optimizer and checkpoint code stay trivial.
struct QNetConfig {
  int state_dim = aff::kStateDim;
  int bin_count = 0;
  int hidden = 128;

  int input_dim() const { return state_dim + bin_count; }
};

class QFunction {
 public:
  QFunction(QNetConfig cfg, std::uint64_t seed);

  const QNetConfig& config() const { return cfg_; }
  const Eigen::VectorXd& params() const { return params_; }
  Eigen::VectorXd& params() { return params_; }
  void set_params(const Eigen::VectorXd& p);
  std::int64_t param_count() const { return params_.size(); }

  // Cached activations of a batch pass; columns are samples.
  struct Activation {
    Eigen::MatrixXd x;
    Eigen::MatrixXd a1;
    Eigen::MatrixXd a2;
    Eigen::MatrixXd q;
  };

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  Activation forward_batch(const Eigen::MatrixXd& x) const;

  // Accumulates d(sum_bj dLdQ(b,j) * Q_j(x_b))/dtheta into grad (same length
  // as params, zeroed by the caller).
  void backward_batch(const Activation& act, const Eigen::MatrixXd& dLdQ,
                      Eigen::VectorXd* grad) const;

 private:
  QNetConfig cfg_;
  Eigen::VectorXd params_;
};

// Softmax policy over Q values at temperature tau.
Eigen::VectorXd softmax_policy(const Eigen::VectorXd& q, double tau);

// Policy used by the KL term: softmax over the variant's candidate set, zero
// on every other bin. Sums to one.
Eigen::VectorXd policy_distribution(const Eigen::VectorXd& q,
                                    const std::vector<std::uint8_t>& aff_bins,
                                    double tau, Variant variant);

// KL(pi || prior) with the convention 0 * log(0/p) = 0. Prior entries must be
// strictly positive wherever pi is.
double kl_divergence(const Eigen::VectorXd& pi, const Eigen::VectorXd& prior);

// Analytic gradient of kl_divergence(softmax_policy(q, tau), prior) in q.
Eigen::VectorXd kl_grad_wrt_q(const Eigen::VectorXd& pi,
                              const Eigen::VectorXd& prior, double tau);

// One replay transition. Features are stored as float32 to halve memory; the
// affordance bins are kept raw so the candidate set can be rebuilt per
// variant.
struct Transition {
  std::vector<float> feature;
  std::vector<std::uint8_t> aff_bins;
  int action = 0;
  float reward = 0.0f;
  std::vector<float> next_feature;
  std::vector<std::uint8_t> next_aff_bins;
  bool done = false;
};

// Fixed-capacity FIFO ring.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  const Transition& at(std::size_t i) const { return storage_[i]; }

  // Uniform sample without replacement; requires batch <= size.
  std::vector<const Transition*> sample(Rng& rng, int batch) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  std::vector<Transition> storage_;
};

// Candidate action set: the affordance bins when the variant uses them and at
// least one is set, otherwise every bin.
std::vector<int> candidate_bins(const std::vector<std::uint8_t>& aff_bins,
                                bool use_affordance);

// Argmax restricted to candidates; ties resolve to the lowest bin index.
int argmax_over(const Eigen::VectorXd& q, const std::vector<int>& candidates);

// Samples a candidate with probability proportional to the prior mass on it.
int sample_prior_restricted(const Eigen::VectorXd& prior_probs,
                            const std::vector<int>& candidates, Rng& rng);

// Assembles the network input for a variant. Affordance-blind variants see
// zeros in the affordance slots so the architecture stays identical.
Eigen::VectorXd assemble_input(const std::vector<float>& feature,
                               const std::vector<std::uint8_t>& aff_bins,
                               Variant variant, int bin_count);

// Epsilon-greedy action over the candidate set. Exploration draws from the
// prior (restricted and renormalized) for prior variants, uniformly
// otherwise; exploitation is the candidate-restricted argmax.
int select_action(const QFunction& net, const std::vector<float>& feature,
                  const std::vector<std::uint8_t>& aff_bins,
                  const Eigen::VectorXd& prior_probs, double epsilon,
                  Variant variant, Rng& rng);

// The double-Q backup value: the online row picks the action over the
// candidate set, the target row evaluates it.
double double_q_target(const Eigen::VectorXd& q_online_next,
                       const Eigen::VectorXd& q_target_next,
                       const std::vector<int>& candidates, double reward,
                       double gamma, bool done);

struct TrainerConfig {
  Variant variant = Variant::kDdqnAP;
  std::uint64_t seed = 1;
  std::int64_t total_steps = 20000;
  int batch_size = 64;
  std::size_t buffer_capacity = 20000;
  double gamma = 0.99;
  double lambda_kl = 0.1;
  double tau = 1.0;
  double learning_rate = 1e-3;
  int target_sync_every = 200;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::int64_t epsilon_decay_steps = 12000;
  int env_count = 1;
  int hidden = 128;
  int metrics_window = 50;
  double success_threshold = 0.85;
  bool stop_at_threshold = false;

  double epsilon_at(std::int64_t step) const;
  void validate() const;
};

struct LossTerms {
  double total = 0.0;
  double td = 0.0;
  double kl = 0.0;
};

// Double-Q target: online net picks the next action over the next candidate
// set, the target net evaluates it. Terminal transitions use the bare reward.
double td_target(const QFunction& online, const QFunction& target,
                 const Transition& t, const TrainerConfig& cfg);

// Mean squared TD error plus lambda * mean KL(policy || prior) over the
// batch. Accumulates the parameter gradient into grad (zeroed first).
LossTerms loss_and_grad(const QFunction& online, const QFunction& target,
                        const std::vector<const Transition*>& batch,
                        const TrainerConfig& cfg,
                        const Eigen::VectorXd& prior_probs,
                        Eigen::VectorXd* grad);

struct StepLog {
  std::int64_t global_step = 0;
  int episode = 0;
  double loss = 0.0;
  double kl = 0.0;
  double epsilon = 0.0;
};

struct TrainResult {
  std::vector<metrics::EpisodeRecord> episodes;
  std::vector<StepLog> episode_logs;  // one entry per episode, aligned
  std::int64_t steps_run = 0;
  std::optional<std::int64_t> threshold_step;
  Eigen::VectorXd final_params;
};

using EnvFactory = std::function<std::unique_ptr<sim::Env>()>;

// Runs the training loop. env_count == 1 is single threaded and bitwise
// reproducible for a fixed config; env_count > 1 spawns actor threads that
// feed one learner through a queue.
TrainResult train(const EnvFactory& make_env, const Eigen::VectorXd& prior_probs,
                  const TrainerConfig& cfg);

struct EvalResult {
  int episodes = 0;
  int successes = 0;
  double mean_move_on_success = 0.0;
  int candidate_violations = 0;  // greedy action outside the candidate set

  double success_rate() const {
    return episodes > 0 ? static_cast<double>(successes) / episodes : 0.0;
  }
};

// Greedy rollout of a trained network.
EvalResult evaluate(sim::Env& env, const QFunction& net, Variant variant,
                    std::uint64_t seed, int episodes);

// Binary checkpoint: little endian u32 header length, JSON header, raw f64
// parameters.
void save_checkpoint(const std::string& path, const QFunction& net, Variant variant);
QFunction load_checkpoint(const std::string& path, Variant* variant_out = nullptr);

}  // namespace m2n::rl

#endif  // M2N_RL_HPP_
