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

#include "m2n/rl.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <fstream>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace m2n::rl {

namespace {

using RowMajorMap = Eigen::Map<
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using ConstRowMajorMap = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using VecMap = Eigen::Map<Eigen::VectorXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

struct LayerSizes {
  int in, h, out;
  std::int64_t w1, b1, w2, b2, w3, b3;  // offsets into the flat vector

  explicit LayerSizes(const QNetConfig& c)
      : in(c.input_dim()), h(c.hidden), out(c.bin_count) {
    w1 = 0;
    b1 = w1 + static_cast<std::int64_t>(h) * in;
    w2 = b1 + h;
    b2 = w2 + static_cast<std::int64_t>(h) * h;
    w3 = b2 + h;
    b3 = w3 + static_cast<std::int64_t>(out) * h;
  }
  std::int64_t total() const { return b3 + out; }
};

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kDdqn: return "ddqn";
    case Variant::kDdqnP: return "ddqn_p";
    case Variant::kDdqnA: return "ddqn_a";
    case Variant::kDdqnAP: return "ddqn_ap";
  }
  throw std::logic_error("unknown variant");
}

Variant variant_from_string(const std::string& name) {
  if (name == "ddqn") return Variant::kDdqn;
  if (name == "ddqn_p") return Variant::kDdqnP;
  if (name == "ddqn_a") return Variant::kDdqnA;
  if (name == "ddqn_ap") return Variant::kDdqnAP;
  throw std::invalid_argument("unknown variant name: " + name);
}

bool uses_prior(Variant v) {
  return v == Variant::kDdqnP || v == Variant::kDdqnAP;
}

bool uses_affordance(Variant v) {
  return v == Variant::kDdqnA || v == Variant::kDdqnAP;
}

QFunction::QFunction(QNetConfig cfg, std::uint64_t seed) : cfg_(cfg) {
  if (cfg_.state_dim <= 0 || cfg_.bin_count <= 0 || cfg_.hidden <= 0) {
    throw std::invalid_argument("QNetConfig dimensions must be positive");
  }
  const LayerSizes ls(cfg_);
  params_ = Eigen::VectorXd::Zero(ls.total());
  Rng rng(seed);
  auto fill = [&rng](double* p, std::int64_t count, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::int64_t i = 0; i < count; ++i) p[i] = rng.uniform(-limit, limit);
  };
  fill(params_.data() + ls.w1, static_cast<std::int64_t>(ls.h) * ls.in, ls.in, ls.h);
  fill(params_.data() + ls.w2, static_cast<std::int64_t>(ls.h) * ls.h, ls.h, ls.h);
  fill(params_.data() + ls.w3, static_cast<std::int64_t>(ls.out) * ls.h, ls.h, ls.out);
}

void QFunction::set_params(const Eigen::VectorXd& p) {
  if (p.size() != params_.size()) {
    throw std::invalid_argument("parameter vector size mismatch");
  }
  params_ = p;
}

Eigen::VectorXd QFunction::forward(const Eigen::VectorXd& x) const {
  return forward_batch(x).q.col(0);
}

QFunction::Activation QFunction::forward_batch(const Eigen::MatrixXd& x) const {
  const LayerSizes ls(cfg_);
  if (x.rows() != ls.in) throw std::invalid_argument("input dimension mismatch");
  ConstRowMajorMap w1(params_.data() + ls.w1, ls.h, ls.in);
  ConstVecMap b1(params_.data() + ls.b1, ls.h);
  ConstRowMajorMap w2(params_.data() + ls.w2, ls.h, ls.h);
  ConstVecMap b2(params_.data() + ls.b2, ls.h);
  ConstRowMajorMap w3(params_.data() + ls.w3, ls.out, ls.h);
  ConstVecMap b3(params_.data() + ls.b3, ls.out);

  Activation act;
  act.x = x;
  act.a1 = (((w1 * x).colwise() + b1).array().tanh()).matrix();
  act.a2 = (((w2 * act.a1).colwise() + b2).array().tanh()).matrix();
  act.q = (w3 * act.a2).colwise() + b3;
  return act;
}

void QFunction::backward_batch(const Activation& act, const Eigen::MatrixXd& dLdQ,
                               Eigen::VectorXd* grad) const {
  const LayerSizes ls(cfg_);
  if (grad->size() != params_.size()) {
    throw std::invalid_argument("gradient vector size mismatch");
  }
  ConstRowMajorMap w2(params_.data() + ls.w2, ls.h, ls.h);
  ConstRowMajorMap w3(params_.data() + ls.w3, ls.out, ls.h);

  RowMajorMap gw1(grad->data() + ls.w1, ls.h, ls.in);
  VecMap gb1(grad->data() + ls.b1, ls.h);
  RowMajorMap gw2(grad->data() + ls.w2, ls.h, ls.h);
  VecMap gb2(grad->data() + ls.b2, ls.h);
  RowMajorMap gw3(grad->data() + ls.w3, ls.out, ls.h);
  VecMap gb3(grad->data() + ls.b3, ls.out);

  gw3 += dLdQ * act.a2.transpose();
  gb3 += dLdQ.rowwise().sum();
  Eigen::MatrixXd dz2 =
      (w3.transpose() * dLdQ).array() * (1.0 - act.a2.array().square());
  gw2 += dz2 * act.a1.transpose();
  gb2 += dz2.rowwise().sum();
  Eigen::MatrixXd dz1 =
      (w2.transpose() * dz2).array() * (1.0 - act.a1.array().square());
  gw1 += dz1 * act.x.transpose();
  gb1 += dz1.rowwise().sum();
}

Eigen::VectorXd softmax_policy(const Eigen::VectorXd& q, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("temperature must be positive");
  const Eigen::ArrayXd shifted = (q.array() - q.maxCoeff()) / tau;
  Eigen::ArrayXd e = shifted.exp();
  return (e / e.sum()).matrix();
}

Eigen::VectorXd policy_distribution(const Eigen::VectorXd& q,
                                    const std::vector<std::uint8_t>& aff_bins,
                                    double tau, Variant variant) {
  if (tau <= 0.0) throw std::invalid_argument("temperature must be positive");
  const std::vector<int> cands = candidate_bins(aff_bins, uses_affordance(variant));
  double m = q[cands[0]];
  for (int c : cands) m = std::max(m, q[c]);
  Eigen::VectorXd pi = Eigen::VectorXd::Zero(q.size());
  double total = 0.0;
  for (int c : cands) {
    pi[c] = std::exp((q[c] - m) / tau);
    total += pi[c];
  }
  for (int c : cands) pi[c] /= total;
  return pi;
}

double kl_divergence(const Eigen::VectorXd& pi, const Eigen::VectorXd& prior) {
  if (pi.size() != prior.size()) throw std::invalid_argument("size mismatch");
  double kl = 0.0;
  for (Eigen::Index i = 0; i < pi.size(); ++i) {
    if (pi[i] <= 0.0) continue;  // 0 log 0 = 0
    if (prior[i] <= 0.0) throw std::invalid_argument("prior has a zero where the policy does not");
    kl += pi[i] * std::log(pi[i] / prior[i]);
  }
  return kl;
}

Eigen::VectorXd kl_grad_wrt_q(const Eigen::VectorXd& pi,
                              const Eigen::VectorXd& prior, double tau) {
  const double kl = kl_divergence(pi, prior);
  Eigen::VectorXd g(pi.size());
  for (Eigen::Index i = 0; i < pi.size(); ++i) {
    const double f = std::log(pi[i] / prior[i]);
    g[i] = pi[i] / tau * (f - kl);
  }
  return g;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("capacity must be positive");
  storage_.reserve(capacity);
}

void ReplayBuffer::push(Transition t) {
  if (size_ < capacity_) {
    storage_.push_back(std::move(t));
    ++size_;
  } else {
    storage_[head_] = std::move(t);
  }
  head_ = (head_ + 1) % capacity_;
}

std::vector<const Transition*> ReplayBuffer::sample(Rng& rng, int batch) const {
  if (batch <= 0 || static_cast<std::size_t>(batch) > size_) {
    throw std::invalid_argument("batch size exceeds buffer contents");
  }
  std::vector<std::size_t> idx(size_);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<const Transition*> out;
  out.reserve(batch);
  for (int i = 0; i < batch; ++i) {
    const std::size_t j = i + rng.uniform_index(size_ - i);
    std::swap(idx[i], idx[j]);
    out.push_back(&storage_[idx[i]]);
  }
  return out;
}

std::vector<int> candidate_bins(const std::vector<std::uint8_t>& aff_bins,
                                bool use_affordance) {
  std::vector<int> out;
  if (use_affordance) {
    for (std::size_t i = 0; i < aff_bins.size(); ++i) {
      if (aff_bins[i]) out.push_back(static_cast<int>(i));
    }
    if (!out.empty()) return out;
  }
  out.resize(aff_bins.size());
  std::iota(out.begin(), out.end(), 0);
  return out;
}

int argmax_over(const Eigen::VectorXd& q, const std::vector<int>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("empty candidate set");
  int best = candidates[0];
  for (int c : candidates) {
    if (q[c] > q[best]) best = c;
  }
  return best;
}

int sample_prior_restricted(const Eigen::VectorXd& prior_probs,
                            const std::vector<int>& candidates, Rng& rng) {
  if (candidates.empty()) throw std::invalid_argument("empty candidate set");
  double total = 0.0;
  for (int c : candidates) total += prior_probs[c];
  if (total <= 0.0) {
    return candidates[rng.uniform_index(candidates.size())];
  }
  const double r = rng.uniform() * total;
  double acc = 0.0;
  for (int c : candidates) {
    acc += prior_probs[c];
    if (acc >= r) return c;
  }
  return candidates.back();
}

Eigen::VectorXd assemble_input(const std::vector<float>& feature,
                               const std::vector<std::uint8_t>& aff_bins,
                               Variant variant, int bin_count) {
  if (static_cast<int>(aff_bins.size()) != bin_count) {
    throw std::invalid_argument("affordance bin vector size mismatch");
  }
  Eigen::VectorXd x(static_cast<Eigen::Index>(feature.size()) + bin_count);
  for (std::size_t i = 0; i < feature.size(); ++i) x[i] = feature[i];
  const bool pass = uses_affordance(variant);
  for (int i = 0; i < bin_count; ++i) {
    x[feature.size() + i] = pass && aff_bins[i] ? 1.0 : 0.0;
  }
  return x;
}

int select_action(const QFunction& net, const std::vector<float>& feature,
                  const std::vector<std::uint8_t>& aff_bins,
                  const Eigen::VectorXd& prior_probs, double epsilon,
                  Variant variant, Rng& rng) {
  const std::vector<int> cands = candidate_bins(aff_bins, uses_affordance(variant));
  if (rng.uniform() < epsilon) {
    if (uses_prior(variant)) {
      if (prior_probs.size() != static_cast<Eigen::Index>(aff_bins.size())) {
        throw std::invalid_argument("prior variant requires a per-bin prior");
      }
      return sample_prior_restricted(prior_probs, cands, rng);
    }
    return cands[rng.uniform_index(cands.size())];
  }
  const Eigen::VectorXd x =
      assemble_input(feature, aff_bins, variant, net.config().bin_count);
  return argmax_over(net.forward(x), cands);
}

double double_q_target(const Eigen::VectorXd& q_online_next,
                       const Eigen::VectorXd& q_target_next,
                       const std::vector<int>& candidates, double reward,
                       double gamma, bool done) {
  if (done) return reward;
  const int a_star = argmax_over(q_online_next, candidates);
  return reward + gamma * q_target_next[a_star];
}

double TrainerConfig::epsilon_at(std::int64_t step) const {
  if (step >= epsilon_decay_steps) return epsilon_end;
  const double frac = static_cast<double>(step) / static_cast<double>(epsilon_decay_steps);
  return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

void TrainerConfig::validate() const {
  if (total_steps < 0) throw std::invalid_argument("total_steps must be non-negative");
  if (batch_size <= 0) throw std::invalid_argument("batch_size must be positive");
  if (buffer_capacity < static_cast<std::size_t>(batch_size)) {
    throw std::invalid_argument("buffer_capacity must be at least batch_size");
  }
  if (gamma <= 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must be in (0, 1]");
  if (tau <= 0.0) throw std::invalid_argument("tau must be positive");
  if (learning_rate <= 0.0) throw std::invalid_argument("learning_rate must be positive");
  if (target_sync_every <= 0) throw std::invalid_argument("target_sync_every must be positive");
  if (epsilon_start < 0.0 || epsilon_start > 1.0 || epsilon_end < 0.0 ||
      epsilon_end > 1.0) {
    throw std::invalid_argument("epsilon bounds must be in [0, 1]");
  }
  if (epsilon_decay_steps <= 0) throw std::invalid_argument("epsilon_decay_steps must be positive");
  if (env_count < 1) throw std::invalid_argument("env_count must be at least 1");
  if (hidden <= 0) throw std::invalid_argument("hidden must be positive");
  if (metrics_window <= 0) throw std::invalid_argument("metrics_window must be positive");
  if (lambda_kl < 0.0) throw std::invalid_argument("lambda_kl must be non-negative");
}

double td_target(const QFunction& online, const QFunction& target,
                 const Transition& t, const TrainerConfig& cfg) {
  if (t.done) return t.reward;
  const Eigen::VectorXd xn = assemble_input(t.next_feature, t.next_aff_bins,
                                            cfg.variant, online.config().bin_count);
  const std::vector<int> cands =
      candidate_bins(t.next_aff_bins, uses_affordance(cfg.variant));
  return double_q_target(online.forward(xn), target.forward(xn), cands,
                         t.reward, cfg.gamma, false);
}

LossTerms loss_and_grad(const QFunction& online, const QFunction& target,
                        const std::vector<const Transition*>& batch,
                        const TrainerConfig& cfg,
                        const Eigen::VectorXd& prior_probs,
                        Eigen::VectorXd* grad) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const int bins = online.config().bin_count;
  const int in = online.config().input_dim();
  const int bsz = static_cast<int>(batch.size());

  Eigen::MatrixXd x(in, bsz), xn(in, bsz);
  for (int b = 0; b < bsz; ++b) {
    x.col(b) = assemble_input(batch[b]->feature, batch[b]->aff_bins, cfg.variant, bins);
    xn.col(b) = assemble_input(batch[b]->next_feature, batch[b]->next_aff_bins,
                               cfg.variant, bins);
  }

  const QFunction::Activation act = online.forward_batch(x);
  const Eigen::MatrixXd qn_online = online.forward_batch(xn).q;
  const Eigen::MatrixXd qn_target = target.forward_batch(xn).q;

  grad->setZero(online.param_count());
  Eigen::MatrixXd dLdQ = Eigen::MatrixXd::Zero(bins, bsz);
  LossTerms terms;
  const double inv_b = 1.0 / bsz;

  for (int b = 0; b < bsz; ++b) {
    const Transition& t = *batch[b];
    const std::vector<int> next_cands =
        candidate_bins(t.next_aff_bins, uses_affordance(cfg.variant));
    const double y = double_q_target(qn_online.col(b), qn_target.col(b),
                                     next_cands, t.reward, cfg.gamma, t.done);
    const double td = act.q(t.action, b) - y;
    terms.td += td * td * inv_b;
    dLdQ(t.action, b) += 2.0 * td * inv_b;

    if (cfg.lambda_kl > 0.0) {
      // KL of the candidate-restricted softmax against the pixel prior; bins
      // outside the candidate set carry no policy mass and no gradient.
      const Eigen::VectorXd pi =
          policy_distribution(act.q.col(b), t.aff_bins, cfg.tau, cfg.variant);
      const std::vector<int> cands =
          candidate_bins(t.aff_bins, uses_affordance(cfg.variant));
      double kl = 0.0;
      for (int c : cands) {
        if (pi[c] > 0.0) kl += pi[c] * std::log(pi[c] / prior_probs[c]);
      }
      terms.kl += kl * inv_b;
      const double scale = cfg.lambda_kl * inv_b / cfg.tau;
      for (int c : cands) {
        if (pi[c] <= 0.0) continue;
        dLdQ(c, b) += scale * pi[c] * (std::log(pi[c] / prior_probs[c]) - kl);
      }
    }
  }
  terms.total = terms.td + cfg.lambda_kl * terms.kl;
  online.backward_batch(act, dLdQ, grad);
  return terms;
}

namespace {

// Per-step context an actor produces and the learner consumes.
struct ActorEvent {
  Transition transition;
  bool episode_end = false;
  bool success = false;
  double move_distance = 0.0;
  double return_sum = 0.0;
  int episode = 0;
};

struct EpisodeState {
  std::vector<float> feature;
  std::vector<std::uint8_t> aff_bins;
  bool success = false;
  double move_distance = 0.0;
  double return_sum = 0.0;
};

ObjectClass affordance_class(sim::Task task) {
  return task == sim::Task::kReach ? ObjectClass::kTarget : ObjectClass::kDoor;
}

std::vector<float> to_float(const aff::StateFeature& f) {
  return std::vector<float>(f.begin(), f.end());
}

EpisodeState observe(const Observation& obs, sim::Task task,
                     const ActionGrid& grid) {
  EpisodeState ep;
  ep.feature = to_float(aff::encode_state(obs));
  ep.aff_bins = aff::mask_to_bins(aff::extract_affordance(obs, affordance_class(task)), grid);
  return ep;
}

TrainResult train_single(const EnvFactory& make_env,
                         const Eigen::VectorXd& prior_probs,
                         const TrainerConfig& cfg) {
  auto env = make_env();
  const ActionGrid grid = env->action_grid();
  const sim::Task task = env->config().task;

  QNetConfig qc;
  qc.bin_count = grid.bin_count();
  qc.hidden = cfg.hidden;
  QFunction online(qc, derive_seed(cfg.seed, 1));
  QFunction target = online;
  ReplayBuffer buffer(cfg.buffer_capacity);
  Rng action_rng(derive_seed(cfg.seed, 2));
  Rng sample_rng(derive_seed(cfg.seed, 3));

  TrainResult result;
  Eigen::VectorXd grad(online.param_count());
  LossTerms last_terms;
  std::int64_t global_step = 0, updates = 0;
  int episode_idx = 0;
  int window_successes = 0;

  while (global_step < cfg.total_steps) {
    EpisodeState ep = observe(env->reset(derive_seed(cfg.seed, 1000 + episode_idx)),
                              task, grid);
    bool done = false;
    double epsilon = cfg.epsilon_at(global_step);
    while (!done && global_step < cfg.total_steps) {
      epsilon = cfg.epsilon_at(global_step);
      const int action = select_action(online, ep.feature, ep.aff_bins,
                                       prior_probs, epsilon, cfg.variant,
                                       action_rng);
      const sim::StepResult sr = env->step(action);
      EpisodeState next = observe(sr.obs, task, grid);

      Transition t;
      t.feature = ep.feature;
      t.aff_bins = ep.aff_bins;
      t.action = action;
      t.reward = static_cast<float>(sr.reward);
      t.next_feature = next.feature;
      t.next_aff_bins = next.aff_bins;
      t.done = sr.done;
      buffer.push(std::move(t));
      ++global_step;

      if (buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
        const auto batch = buffer.sample(sample_rng, cfg.batch_size);
        last_terms = loss_and_grad(online, target, batch, cfg, prior_probs, &grad);
        online.params() -= cfg.learning_rate * grad;
        ++updates;
        if (updates % cfg.target_sync_every == 0) target.set_params(online.params());
      }

      if (sr.reach) {
        ep.success = true;
        ep.move_distance = sr.move_distance;
      }
      done = sr.done;
      next.success = ep.success;
      next.move_distance = ep.move_distance;
      next.return_sum = ep.return_sum + sr.reward;
      ep = std::move(next);
    }
    if (!done) break;  // budget exhausted mid-episode, drop the partial tail

    metrics::EpisodeRecord rec;
    rec.episode = episode_idx;
    rec.end_step = global_step;
    rec.success = ep.success;
    rec.move_distance = ep.success ? ep.move_distance : 0.0;
    rec.reward = ep.return_sum;
    result.episodes.push_back(rec);
    result.episode_logs.push_back(
        {global_step, episode_idx, last_terms.total, last_terms.kl, epsilon});

    window_successes += rec.success ? 1 : 0;
    const int n = static_cast<int>(result.episodes.size());
    if (n > cfg.metrics_window) {
      window_successes -=
          result.episodes[n - 1 - cfg.metrics_window].success ? 1 : 0;
    }
    if (!result.threshold_step && n >= cfg.metrics_window &&
        static_cast<double>(window_successes) / cfg.metrics_window >=
            cfg.success_threshold) {
      result.threshold_step = global_step;
      if (cfg.stop_at_threshold) {
        ++episode_idx;
        break;
      }
    }
    ++episode_idx;
  }

  result.steps_run = global_step;
  result.final_params = online.params();
  return result;
}

// Bounded multi-producer queue feeding the learner thread.
class EventQueue {
 public:
  explicit EventQueue(std::size_t limit) : limit_(limit) {}

  bool push(ActorEvent ev) {
    std::unique_lock lk(mu_);
    not_full_.wait(lk, [&] { return items_.size() < limit_ || closed_; });
    if (closed_) return false;
    items_.push_back(std::move(ev));
    not_empty_.notify_one();
    return true;
  }

  bool pop(ActorEvent* ev) {
    std::unique_lock lk(mu_);
    not_empty_.wait(lk, [&] { return !items_.empty() || closed_; });
    if (items_.empty()) return false;
    *ev = std::move(items_.front());
    items_.pop_front();
    not_full_.notify_one();
    return true;
  }

  void close() {
    std::lock_guard lk(mu_);
    closed_ = true;
    not_empty_.notify_all();
    not_full_.notify_all();
  }

 private:
  std::mutex mu_;
  std::condition_variable not_empty_, not_full_;
  std::deque<ActorEvent> items_;
  std::size_t limit_;
  bool closed_ = false;
};

TrainResult train_parallel(const EnvFactory& make_env,
                           const Eigen::VectorXd& prior_probs,
                           const TrainerConfig& cfg) {
  auto probe = make_env();
  const ActionGrid grid = probe->action_grid();
  const sim::Task task = probe->config().task;
  probe.reset();

  QNetConfig qc;
  qc.bin_count = grid.bin_count();
  qc.hidden = cfg.hidden;
  QFunction online(qc, derive_seed(cfg.seed, 1));
  QFunction target = online;

  std::mutex net_mu;  // guards online parameters
  std::atomic<double> epsilon{cfg.epsilon_at(0)};
  std::atomic<std::int64_t> next_episode{0};
  std::atomic<bool> stop{false};
  EventQueue queue(256);

  auto actor = [&](int worker) {
    auto env = make_env();
    Rng rng(derive_seed(cfg.seed, 10 + worker));
    while (!stop.load(std::memory_order_relaxed)) {
      const std::int64_t episode = next_episode.fetch_add(1);
      EpisodeState ep = observe(env->reset(derive_seed(cfg.seed, 1000 + episode)),
                                task, grid);
      bool done = false;
      while (!done) {
        int action;
        {
          std::lock_guard lk(net_mu);
          action = select_action(online, ep.feature, ep.aff_bins, prior_probs,
                                 epsilon.load(std::memory_order_relaxed),
                                 cfg.variant, rng);
        }
        const sim::StepResult sr = env->step(action);
        EpisodeState next = observe(sr.obs, task, grid);
        if (sr.reach) {
          ep.success = true;
          ep.move_distance = sr.move_distance;
        }
        ep.return_sum += sr.reward;
        ActorEvent ev;
        ev.transition = {ep.feature, ep.aff_bins, action,
                         static_cast<float>(sr.reward), next.feature,
                         next.aff_bins, sr.done};
        ev.episode_end = sr.done;
        ev.success = ep.success;
        ev.move_distance = ep.success ? ep.move_distance : 0.0;
        ev.return_sum = ep.return_sum;
        ev.episode = static_cast<int>(episode);
        done = sr.done;
        next.success = ep.success;
        next.move_distance = ep.move_distance;
        next.return_sum = ep.return_sum;
        ep = std::move(next);
        if (!queue.push(std::move(ev))) return;
        if (stop.load(std::memory_order_relaxed)) return;
      }
    }
  };

  std::vector<std::thread> actors;
  actors.reserve(cfg.env_count);
  for (int w = 0; w < cfg.env_count; ++w) actors.emplace_back(actor, w);

  TrainResult result;
  ReplayBuffer buffer(cfg.buffer_capacity);
  Rng sample_rng(derive_seed(cfg.seed, 3));
  Eigen::VectorXd grad(online.param_count());
  LossTerms last_terms;
  std::int64_t global_step = 0, updates = 0;
  int window_successes = 0;

  ActorEvent ev;
  while (global_step < cfg.total_steps && queue.pop(&ev)) {
    buffer.push(std::move(ev.transition));
    ++global_step;
    epsilon.store(cfg.epsilon_at(global_step), std::memory_order_relaxed);

    if (buffer.size() >= static_cast<std::size_t>(cfg.batch_size)) {
      const auto batch = buffer.sample(sample_rng, cfg.batch_size);
      std::lock_guard lk(net_mu);
      last_terms = loss_and_grad(online, target, batch, cfg, prior_probs, &grad);
      online.params() -= cfg.learning_rate * grad;
      ++updates;
      if (updates % cfg.target_sync_every == 0) target.set_params(online.params());
    }

    if (ev.episode_end) {
      metrics::EpisodeRecord rec;
      rec.episode = static_cast<int>(result.episodes.size());
      rec.end_step = global_step;
      rec.success = ev.success;
      rec.move_distance = ev.move_distance;
      rec.reward = ev.return_sum;
      result.episodes.push_back(rec);
      result.episode_logs.push_back({global_step, rec.episode, last_terms.total,
                                     last_terms.kl, cfg.epsilon_at(global_step)});
      window_successes += rec.success ? 1 : 0;
      const int n = static_cast<int>(result.episodes.size());
      if (n > cfg.metrics_window) {
        window_successes -=
            result.episodes[n - 1 - cfg.metrics_window].success ? 1 : 0;
      }
      if (!result.threshold_step && n >= cfg.metrics_window &&
          static_cast<double>(window_successes) / cfg.metrics_window >=
              cfg.success_threshold) {
        result.threshold_step = global_step;
        if (cfg.stop_at_threshold) break;
      }
    }
  }

  stop.store(true);
  queue.close();
  for (auto& t : actors) t.join();

  result.steps_run = global_step;
  result.final_params = online.params();
  return result;
}

}  // namespace

TrainResult train(const EnvFactory& make_env, const Eigen::VectorXd& prior_probs,
                  const TrainerConfig& cfg) {
  cfg.validate();
  TrainerConfig eff = cfg;
  if (!uses_prior(cfg.variant)) eff.lambda_kl = 0.0;
  if (eff.env_count == 1) return train_single(make_env, prior_probs, eff);
  return train_parallel(make_env, prior_probs, eff);
}

EvalResult evaluate(sim::Env& env, const QFunction& net, Variant variant,
                    std::uint64_t seed, int episodes) {
  const ActionGrid grid = env.action_grid();
  const sim::Task task = env.config().task;
  EvalResult res;
  res.episodes = episodes;
  double move_sum = 0.0;
  for (int e = 0; e < episodes; ++e) {
    EpisodeState ep = observe(env.reset(derive_seed(seed, 5000 + e)), task, grid);
    bool done = false;
    while (!done) {
      const std::vector<int> cands = candidate_bins(ep.aff_bins, uses_affordance(variant));
      const Eigen::VectorXd x =
          assemble_input(ep.feature, ep.aff_bins, variant, net.config().bin_count);
      const int action = argmax_over(net.forward(x), cands);
      if (uses_affordance(variant) &&
          std::find(cands.begin(), cands.end(), action) == cands.end()) {
        ++res.candidate_violations;
      }
      const sim::StepResult sr = env.step(action);
      if (sr.reach) {
        ep.success = true;
        ep.move_distance = sr.move_distance;
      }
      done = sr.done;
      EpisodeState next = observe(sr.obs, task, grid);
      next.success = ep.success;
      next.move_distance = ep.move_distance;
      ep = std::move(next);
    }
    if (ep.success) {
      ++res.successes;
      move_sum += ep.move_distance;
    }
  }
  res.mean_move_on_success = res.successes > 0 ? move_sum / res.successes : 0.0;
  return res;
}

void save_checkpoint(const std::string& path, const QFunction& net, Variant variant) {
  const QNetConfig& c = net.config();
  nlohmann::json header;
  header["schema"] = "qnet-v1";
  header["state_dim"] = c.state_dim;
  header["bin_count"] = c.bin_count;
  header["hidden"] = c.hidden;
  header["variant"] = to_string(variant);
  header["param_count"] = net.param_count();
  header["shapes"] = nlohmann::json::array(
      {{c.hidden, c.input_dim()}, {c.hidden}, {c.hidden, c.hidden}, {c.hidden},
       {c.bin_count, c.hidden}, {c.bin_count}});
  const std::string head = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  const std::uint32_t len = static_cast<std::uint32_t>(head.size());
  std::uint8_t len_le[4] = {
      static_cast<std::uint8_t>(len & 0xff),
      static_cast<std::uint8_t>((len >> 8) & 0xff),
      static_cast<std::uint8_t>((len >> 16) & 0xff),
      static_cast<std::uint8_t>((len >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(len_le), 4);
  out.write(head.data(), static_cast<std::streamsize>(head.size()));
  static_assert(sizeof(double) == 8);
  out.write(reinterpret_cast<const char*>(net.params().data()),
            static_cast<std::streamsize>(net.param_count() * 8));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

QFunction load_checkpoint(const std::string& path, Variant* variant_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::uint8_t len_le[4];
  in.read(reinterpret_cast<char*>(len_le), 4);
  if (!in) throw std::runtime_error("truncated checkpoint header: " + path);
  const std::uint32_t len = static_cast<std::uint32_t>(len_le[0]) |
                            (static_cast<std::uint32_t>(len_le[1]) << 8) |
                            (static_cast<std::uint32_t>(len_le[2]) << 16) |
                            (static_cast<std::uint32_t>(len_le[3]) << 24);
  std::string head(len, '\0');
  in.read(head.data(), len);
  if (!in) throw std::runtime_error("truncated checkpoint header: " + path);
  const nlohmann::json header = nlohmann::json::parse(head);
  if (header.at("schema").get<std::string>() != "qnet-v1") {
    throw std::runtime_error("unexpected checkpoint schema");
  }
  QNetConfig c;
  c.state_dim = header.at("state_dim").get<int>();
  c.bin_count = header.at("bin_count").get<int>();
  c.hidden = header.at("hidden").get<int>();
  QFunction net(c, 0);
  Eigen::VectorXd params(header.at("param_count").get<std::int64_t>());
  if (params.size() != net.param_count()) {
    throw std::runtime_error("checkpoint parameter count does not match shapes");
  }
  in.read(reinterpret_cast<char*>(params.data()),
          static_cast<std::streamsize>(params.size() * 8));
  if (!in) throw std::runtime_error("truncated checkpoint payload: " + path);
  net.set_params(params);
  if (variant_out) {
    *variant_out = variant_from_string(header.at("variant").get<std::string>());
  }
  return net;
}

}  // namespace m2n::rl
