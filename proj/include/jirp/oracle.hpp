#pragma once

#include <set>
#include <utility>
#include <vector>

#include "jirp/common.hpp"
#include "jirp/kernels.hpp"
#include "jirp/mdp.hpp"
#include "jirp/qrm.hpp"
#include "jirp/reward_machine.hpp"

namespace jirp::oracle {

/// Synchronous product of an MDP and a reward machine under a fixed
/// labelling; the reward becomes Markovian. Only states reachable from
/// (s_I, v_I) are kept. Transitions are stored flattened for the sweep
/// kernels.
struct ProductMdp {
  int num_states = 0;
  int num_actions = 0;
  int initial = 0;
  double discount = 0.0;
  std::vector<std::pair<int, int>> state_pairs;  // x -> (s, v)
  std::vector<int> offsets;                      // size num_states*A + 1
  std::vector<int> next;
  std::vector<double> prob;
  std::vector<double> reward;
};

ProductMdp product_mdp(const LabeledMdp& mdp, const RewardMachine& rm,
                       const std::vector<Label>& labelling);

struct ValueIterationResult {
  std::vector<double> values;   // per product state
  std::vector<int> policy;      // per product state, lowest-index tie-break
  int sweeps = 0;
  double initial_value() const { return values.empty() ? 0.0 : values[0]; }
};

/// Jacobi value iteration to sup-norm Bellman residual < tol. The initial
/// product state has index 0.
ValueIterationResult value_iteration(const ProductMdp& p, double tol,
                                     kernels::Exec exec = kernels::Exec::Auto);

/// All label sequences of length <= m realizable by positive-probability
/// trajectories from the initial state (labels taken at successor states).
/// Includes the empty sequence. Refuses when the result would exceed the
/// tractability cap.
std::set<std::vector<Label>> attainable_label_sequences(
    const LabeledMdp& mdp, const std::vector<Label>& labelling, int m,
    std::size_t cap = 1000000);

/// True iff both machines emit identical reward sequences on every
/// m-attainable label sequence. Checked by synchronized search over
/// (state of a, state of b, environment state) triples, which is exact for
/// every m once the search closes.
bool equivalent_on_attainable(const RewardMachine& a, const RewardMachine& b,
                              const LabeledMdp& mdp,
                              const std::vector<Label>& labelling, int m);

/// Discounted Monte-Carlo return of a product-MDP policy from the initial
/// product state.
double rollout_product_policy(const ProductMdp& p, const std::vector<int>& policy,
                              int horizon, Rng& rng);

/// Discounted Monte-Carlo return of a learned greedy policy executed in the
/// environment: actions follow argmax of q under hypothesis-state tracking
/// via belief estimates, rewards come from the hidden ground-truth machine.
double rollout_learned_policy(const QTable& q, const RewardMachine& hypothesis,
                              const Belief& belief_h, const LabeledMdp& mdp,
                              const RewardMachine& truth_rm, int horizon,
                              Rng& rng);

}  // namespace jirp::oracle
