#include "jirp/qrm.hpp"

#include <algorithm>

namespace jirp {

QTable::QTable(int num_rm_states, int num_mdp_states, int num_actions)
    : num_rm_states_(num_rm_states),
      num_mdp_states_(num_mdp_states),
      num_actions_(num_actions),
      q_(static_cast<std::size_t>(num_rm_states) * num_mdp_states * num_actions,
         0.0) {}

double QTable::max_value(int v, int s) const {
  double best = at(v, s, 0);
  for (int a = 1; a < num_actions_; ++a) best = std::max(best, at(v, s, a));
  return best;
}

int QTable::argmax_action(int v, int s) const {
  int best = 0;
  for (int a = 1; a < num_actions_; ++a) {
    if (at(v, s, a) > at(v, s, best)) best = a;
  }
  return best;
}

void QTable::update(int v, int s, int a, double reward, int s_next, int v_next,
                    double alpha, double gamma) {
  const double target = reward + gamma * max_value(v_next, s_next);
  const std::size_t i = index(v, s, a);
  q_[i] = (1.0 - alpha) * q_[i] + alpha * target;
  ++update_count_;
}

int epsilon_greedy(const QTable& q, int v, int s, double epsilon, Rng& rng) {
  const int num_actions = q.num_actions();
  if (epsilon > 0.0 && uniform01(rng) < epsilon) {
    return uniform_int(rng, num_actions);
  }
  const double best = q.max_value(v, s);
  int ties = 0;
  for (int a = 0; a < num_actions; ++a) {
    if (q.at(v, s, a) == best) ++ties;
  }
  // Uniform tie-break keeps a fresh table exploring in every direction.
  int pick = ties == 1 ? 0 : uniform_int(rng, ties);
  for (int a = 0; a < num_actions; ++a) {
    if (q.at(v, s, a) == best && pick-- == 0) return a;
  }
  return num_actions - 1;
}

std::vector<int> greedy_policy(const QTable& q,
                               const RewardMachine& hypothesis) {
  std::vector<int> policy(static_cast<std::size_t>(hypothesis.num_states()) *
                          q.num_mdp_states());
  for (int v = 0; v < hypothesis.num_states(); ++v) {
    for (int s = 0; s < q.num_mdp_states(); ++s) {
      policy[static_cast<std::size_t>(v) * q.num_mdp_states() + s] =
          q.argmax_action(v, s);
    }
  }
  return policy;
}

EpisodeResult qrm_episode_mod(const RewardMachine& hypothesis, QTable& q,
                              const Belief& belief_h, Belief& belief_j,
                              const LabeledMdp& mdp,
                              const RewardMachine& truth_rm,
                              const ObservationModel& om,
                              const EpisodeParams& params, Rng& rng,
                              long& global_step, const StepHook& hook) {
  if (params.eplength < 1) throw ValidationError("eplength must be at least 1");
  if (params.epsilon < 0.0 || params.epsilon > 1.0) {
    throw ValidationError("epsilon must lie in [0, 1]");
  }
  const double gamma = mdp.discount();
  const int num_rm_states = hypothesis.num_states();

  EpisodeResult result;
  int s = mdp.initial_state();
  int v = hypothesis.initial();
  int v_truth = truth_rm.initial();

  for (int t = 0; t < params.eplength; ++t) {
    if (params.step_budget >= 0 && result.steps_taken >= params.step_budget) {
      break;
    }
    const int a = epsilon_greedy(q, v, s, params.epsilon, rng);
    const int s_next = mdp.step(s, a, rng);

    // The environment emits the reward; the learner never sees the machine
    // behind it.
    const auto [v_truth_next, reward] =
        truth_rm.step(v_truth, mdp.ground_label(s_next));
    v_truth = v_truth_next;

    const Label est = belief_h.estimate_label(s_next);
    const auto [v_next, hyp_reward_unused] = hypothesis.step(v, est);
    (void)hyp_reward_unused;

    // Observed reward drives the active q-function; every other machine
    // state learns counterfactually from the hypothesis outputs.
    q.update(v, s, a, reward, s_next, v_next, params.alpha, gamma);
    for (int other = 0; other < num_rm_states; ++other) {
      if (other == v) continue;
      const auto [other_next, other_reward] = hypothesis.step(other, est);
      q.update(other, s, a, other_reward, s_next, other_next, params.alpha,
               gamma);
    }

    ++global_step;
    if (params.belief_updates) {
      const ObservationBatch obs = sample_observations(om, mdp, s_next, rng);
      bayes_update(belief_j, s_next, obs, om);
    }

    result.labels.push_back(est);
    result.rewards.push_back(reward);
    ++result.steps_taken;

    if (hook) hook(StepEvent{global_step, t, s, a, s_next, reward});

    s = s_next;
    v = v_next;
    if (params.early_stop && reward != 0.0) break;
  }
  return result;
}

}  // namespace jirp
