#pragma once

#include <functional>
#include <vector>

#include "jirp/common.hpp"
#include "jirp/mdp.hpp"
#include "jirp/perception.hpp"
#include "jirp/reward_machine.hpp"

namespace jirp {

/// One q-function per machine state of the current hypothesis, tabular over
/// (machine state, environment state, action). Owned by exactly one run.
class QTable {
 public:
  QTable() = default;
  QTable(int num_rm_states, int num_mdp_states, int num_actions);

  int num_rm_states() const { return num_rm_states_; }
  int num_mdp_states() const { return num_mdp_states_; }
  int num_actions() const { return num_actions_; }

  double at(int v, int s, int a) const { return q_[index(v, s, a)]; }
  void set(int v, int s, int a, double val) { q_[index(v, s, a)] = val; }

  double max_value(int v, int s) const;
  /// Lowest-index maximizing action.
  int argmax_action(int v, int s) const;

  std::size_t update_count() const { return update_count_; }

  /// Standard q-learning step with constant learning rate:
  /// q^v(s,a) <- (1-alpha) q^v(s,a) + alpha (r + gamma max_a' q^{v'}(s',a')).
  void update(int v, int s, int a, double reward, int s_next, int v_next,
              double alpha, double gamma);

 private:
  std::size_t index(int v, int s, int a) const {
    return (static_cast<std::size_t>(v) * num_mdp_states_ + s) * num_actions_ +
           a;
  }

  int num_rm_states_ = 0;
  int num_mdp_states_ = 0;
  int num_actions_ = 0;
  std::size_t update_count_ = 0;
  std::vector<double> q_;
};

/// With probability epsilon a uniformly random action; otherwise a maximizer
/// of q^v(s, .), ties broken uniformly at random so a frozen table still
/// explores every direction.
int epsilon_greedy(const QTable& q, int v, int s, double epsilon, Rng& rng);

/// Deterministic policy extraction: argmax with lowest-index tie-break.
std::vector<int> greedy_policy(const QTable& q, const RewardMachine& hypothesis);

struct EpisodeParams {
  int eplength = 1000;
  double epsilon = 0.3;
  double alpha = 0.1;
  bool early_stop = true;        // end the episode on a nonzero reward
  bool belief_updates = true;    // maintain belief_j from observations
  long step_budget = -1;         // remaining global steps; -1 = unlimited
};

struct StepEvent {
  long global_step;
  int t;
  int state;
  int action;
  int next_state;
  double reward;
};
using StepHook = std::function<void(const StepEvent&)>;

struct EpisodeResult {
  std::vector<Label> labels;    // estimate of belief_h at each successor
  std::vector<double> rewards;  // observed rewards
  int steps_taken = 0;
};

/// One training episode. The hypothesis machine is tracked through labels
/// estimated from belief_h; rewards are emitted by the hidden ground-truth
/// machine run on the ground-truth labels. Every step updates the
/// q-function of each hypothesis state: the current one with the observed
/// reward, the others counterfactually with the hypothesis outputs.
/// belief_j receives a Bayesian update from fresh observations each step.
EpisodeResult qrm_episode_mod(const RewardMachine& hypothesis, QTable& q,
                              const Belief& belief_h, Belief& belief_j,
                              const LabeledMdp& mdp,
                              const RewardMachine& truth_rm,
                              const ObservationModel& om,
                              const EpisodeParams& params, Rng& rng,
                              long& global_step, const StepHook& hook = {});

}  // namespace jirp
