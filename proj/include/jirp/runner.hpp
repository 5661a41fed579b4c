#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "jirp/common.hpp"
#include "jirp/inference.hpp"
#include "jirp/mdp.hpp"
#include "jirp/perception.hpp"
#include "jirp/qrm.hpp"
#include "jirp/reward_machine.hpp"

namespace jirp {

struct ObservationConfig {
  std::string kind = "accurate";  // accurate | bernoulli | range_uniform
  double accuracy = 1.0;          // bernoulli
  double low = 0.1, high = 0.9;   // range_uniform
  std::string resample = "never"; // never | per_episode
  std::optional<int> radius;      // null = observe every state
};

struct PriorConfig {
  std::string kind = "uniform";   // uniform | random
  double value = 0.5;             // uniform
};

struct TrainConfig {
  long total_steps = 500000;
  int eplength = 1000;
  double epsilon = 0.3;
  double alpha = 0.1;
  double gamma_d = 1e-5;
  int k_max = 4;
  int trace_capacity = 20;
  long eval_every = 100;
  std::uint64_t seed = 0;
  bool belief_updates_enabled = true;
  bool early_stop = true;
  ObservationConfig observation;
  PriorConfig prior;

  void validate() const;
  static TrainConfig from_json(const std::string& text);
  std::string to_json_string() const;
};

struct BeliefUpdateEvent {
  int episode;
  long global_step;
  double jsd_value;
};

struct InferenceEvent {
  int episode;
  std::optional<int> k;  // nullopt: no consistent machine within k_max
};

struct TrainResult {
  RewardMachine final_hypothesis = RewardMachine::trivial({});
  QTable final_q;
  Belief final_belief;
  std::vector<std::pair<long, double>> eval_curve;  // (global step, reward)
  std::vector<BeliefUpdateEvent> belief_update_log;
  std::vector<InferenceEvent> inference_log;
  std::optional<long> converged_step;
  long steps_run = 0;
  int episodes_run = 0;

  std::string to_json_string(const LabeledMdp& mdp) const;
};

/// Test seams into the training loop; all optional.
struct TrainObserver {
  std::function<void(const RewardMachine& hypothesis_before, const Trace&)>
      on_counterexample;
  std::function<void(const RewardMachine& hypothesis, const Sample&)>
      on_inference_success;
  std::function<void(const Sample&, const RewardMachine& hypothesis)>
      on_belief_swap;
  std::function<void(const EpisodeResult&)> on_episode_end;
  StepHook on_step;
};

/// Joint perception and learning: runs training episodes, collects
/// counterexample traces whenever the hypothesis disagrees with the observed
/// rewards, re-infers a minimal consistent hypothesis from them, and swaps
/// in the freshly updated belief (resetting hypothesis, q-functions and
/// sample) whenever it diverges significantly from the belief in use.
/// The ground-truth machine only emits rewards; the learner never reads it.
TrainResult train(const TrainConfig& config, const LabeledMdp& mdp,
                  const RewardMachine& truth_rm,
                  std::optional<Belief> initial_belief = std::nullopt,
                  const TrainObserver& observer = {});

/// Baseline with a perfect labelling: labels come directly from
/// `labelling`, beliefs are frozen and the divergence test never fires.
TrainResult train_baseline_jirp(const TrainConfig& config,
                                const LabeledMdp& mdp,
                                const RewardMachine& truth_rm,
                                const std::vector<Label>& labelling,
                                const TrainObserver& observer = {});

/// One greedy evaluation episode (epsilon = 0, lowest-index tie-break):
/// tracks the hypothesis through belief estimates, sums the observed
/// rewards undiscounted, stops on a nonzero reward. No learning and no
/// belief updates happen.
double evaluate(const RewardMachine& hypothesis, const QTable& q,
                const Belief& belief_h, const LabeledMdp& mdp,
                const RewardMachine& truth_rm, int eplength, Rng& rng);

}  // namespace jirp
