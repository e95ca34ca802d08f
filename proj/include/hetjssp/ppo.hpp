#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "hetjssp/env.hpp"
#include "hetjssp/graph.hpp"
#include "hetjssp/instance.hpp"
#include "hetjssp/nn/checkpoint.hpp"
#include "hetjssp/nn/parameters.hpp"
#include "hetjssp/nn/policy.hpp"
#include "hetjssp/rng.hpp"

namespace hetjssp {

struct TrainConfig {
  long total_steps = 50'000;
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double value_coef = 0.5;
  double entropy_coef = 0.01;
  int epochs = 4;
  int minibatch = 32;
  double lr = 3e-4;
  double max_grad_norm = 0.5;
  int episodes_per_update = 4;
  std::uint64_t seed = 0;
  bool normalize_advantages = true;
  /// Learning-curve cadence in environment steps and greedy episodes per point.
  long eval_interval = 2'000;
  int curve_episodes = 10;
};

void validate(const TrainConfig& config);

/// One decision: the feature snapshot and mask before the step, plus what
/// the behaviour policy did and received.
struct Transition {
  FeatureMatrix features;
  ActionMask mask;
  int action = -1;
  double log_prob_old = 0;
  double reward = 0;
  double value_old = 0;
  bool done = false;
};

struct RolloutBuffer {
  std::vector<Transition> transitions;
  std::vector<double> advantages;
  std::vector<double> returns;
  std::vector<Time> episode_makespans;

  std::size_t size() const { return transitions.size(); }
};

/// Samples action from masked log-probabilities using one uniform draw.
int sample_action(std::span<const double> log_probs, const ActionMask& mask, Rng& rng);

/// Runs `episodes` complete episodes with actions sampled from the policy.
/// The behaviour policy runs without dropout so that log_prob_old is the
/// exact probability of the sampled action.
RolloutBuffer collect_rollout(const JsspInstance& inst, nn::PolicyModel& model, Rng& sample_rng, int episodes = 4);

struct Gae {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// delta_t = r_t + gamma V_{t+1} (1 - done_t) - V_t,
/// A_t = delta_t + gamma lambda (1 - done_t) A_{t+1}, returns = A + V.
/// Bootstrap past the final transition is zero.
Gae compute_gae(std::span<const double> rewards, std::span<const double> values, std::span<const bool> dones,
                double gamma, double lambda);

/// Fills buffer.advantages/returns; advantages are optionally standardized
/// (sample std) after returns are formed.
void compute_gae(RolloutBuffer& buffer, double gamma, double lambda, bool normalize);

struct LossTerms {
  nn::RealVar total;
  nn::RealVar policy;
  nn::RealVar value;
  nn::RealVar entropy;
  double clip_fraction = 0;
  double approx_kl = 0;
};

/// Clipped-surrogate loss for the transitions in `indices`:
/// policy + value_coef * value - entropy_coef * entropy.
LossTerms ppo_loss(nn::RealTape& tape, nn::PolicyModel& model, const HeteroGraph& topology,
                   const RolloutBuffer& buffer, std::span<const int> indices, const TrainConfig& config,
                   nn::Mode mode, Rng* dropout_rng);

struct UpdateStats {
  double policy_loss = 0;
  double value_loss = 0;
  double entropy = 0;
  double total_loss = 0;
  double clip_fraction = 0;
  double approx_kl = 0;
  double grad_norm = 0;
  int minibatches = 0;
};

/// `epochs` passes over shuffled minibatches with one Adam step each.
UpdateStats ppo_update(nn::PolicyModel& model, nn::Adam<nn::Real>& optimizer, const HeteroGraph& topology,
                       const RolloutBuffer& buffer, const TrainConfig& config, Rng& shuffle_rng, Rng& dropout_rng);

struct CurvePoint {
  long env_steps = 0;
  double eval_mean = 0;
  double eval_std = 0;
};

struct TrainProgress {
  int update = 0;
  long env_steps = 0;
  double mean_rollout_makespan = 0;
  UpdateStats stats;
};

struct TrainResult {
  nn::Checkpoint checkpoint;
  std::vector<CurvePoint> curve;
  int updates = 0;
};

/// collect -> GAE -> update until at least total_steps environment steps.
/// Greedy evaluation runs at step 0, whenever another eval_interval steps
/// have elapsed, and at the end. Writes the final checkpoint when a path is
/// given.
TrainResult train(const JsspInstance& inst, const nn::ModelConfig& model_config, const TrainConfig& config,
                  const std::optional<std::filesystem::path>& checkpoint_path = std::nullopt,
                  const std::function<void(const TrainProgress&)>& on_update = {});

}  // namespace hetjssp
