#include "jirp/oracle.hpp"

#include <cmath>
#include <deque>
#include <map>

namespace jirp::oracle {

ProductMdp product_mdp(const LabeledMdp& mdp, const RewardMachine& rm,
                       const std::vector<Label>& labelling) {
  if (labelling.size() != static_cast<std::size_t>(mdp.num_states())) {
    throw ValidationError("labelling must cover every state");
  }
  ProductMdp p;
  p.num_actions = mdp.num_actions();
  p.discount = mdp.discount();

  std::map<std::pair<int, int>, int> index;
  std::deque<std::pair<int, int>> frontier;
  auto intern = [&](int s, int v) {
    auto [it, inserted] = index.try_emplace({s, v},
                                            static_cast<int>(p.state_pairs.size()));
    if (inserted) {
      p.state_pairs.emplace_back(s, v);
      frontier.emplace_back(s, v);
    }
    return it->second;
  };
  intern(mdp.initial_state(), rm.initial());

  // Reachability and transitions in one pass; the flattened table grows in
  // BFS discovery order, so row offsets are filled once per popped state.
  std::vector<std::vector<std::tuple<int, double, double>>> rows;
  while (!frontier.empty()) {
    const auto [s, v] = frontier.front();
    frontier.pop_front();
    for (int a = 0; a < p.num_actions; ++a) {
      std::vector<std::tuple<int, double, double>> row;
      for (const auto& [s_next, prob] : mdp.successors(s, a)) {
        const auto [v_next, reward] = rm.step(v, labelling[s_next]);
        row.emplace_back(intern(s_next, v_next), prob, reward);
      }
      rows.push_back(std::move(row));
    }
  }

  p.num_states = static_cast<int>(p.state_pairs.size());
  p.initial = 0;
  p.offsets.assign(static_cast<std::size_t>(p.num_states) * p.num_actions + 1,
                   0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    p.offsets[r + 1] = p.offsets[r] + static_cast<int>(rows[r].size());
  }
  for (const auto& row : rows) {
    for (const auto& [next, prob, reward] : row) {
      p.next.push_back(next);
      p.prob.push_back(prob);
      p.reward.push_back(reward);
    }
  }
  return p;
}

ValueIterationResult value_iteration(const ProductMdp& p, double tol,
                                     kernels::Exec exec) {
  if (tol <= 0.0) throw ValidationError("tolerance must be positive");
  if (p.discount >= 1.0) throw ValidationError("discount must be below 1");

  kernels::SweepTable table{p.num_states, p.num_actions, p.offsets.data(),
                            p.next.data(),  p.prob.data(), p.reward.data(),
                            p.discount};
  std::vector<double> values(p.num_states, 0.0);
  std::vector<double> next(p.num_states, 0.0);
  ValueIterationResult result;
  while (true) {
    kernels::value_sweep(table, values.data(), next.data(), exec);
    ++result.sweeps;
    double residual = 0.0;
    for (int x = 0; x < p.num_states; ++x) {
      residual = std::max(residual, std::abs(next[x] - values[x]));
    }
    values.swap(next);
    if (residual < tol) break;
  }

  result.policy.assign(p.num_states, 0);
  for (int x = 0; x < p.num_states; ++x) {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < p.num_actions; ++a) {
      const int row = x * p.num_actions + a;
      double q = 0.0;
      for (int e = p.offsets[row]; e < p.offsets[row + 1]; ++e) {
        q += p.prob[e] * (p.reward[e] + p.discount * values[p.next[e]]);
      }
      if (q > best) {
        best = q;
        result.policy[x] = a;
      }
    }
  }
  result.values = std::move(values);
  return result;
}

std::set<std::vector<Label>> attainable_label_sequences(
    const LabeledMdp& mdp, const std::vector<Label>& labelling, int m,
    std::size_t cap) {
  if (m < 0) throw ValidationError("sequence length bound must be >= 0");
  if (labelling.size() != static_cast<std::size_t>(mdp.num_states())) {
    throw ValidationError("labelling must cover every state");
  }
  std::set<std::vector<Label>> result;
  result.insert({});

  // Frontier per sequence: the set of states any realizing trajectory can
  // end in; extending from any of them keeps realizability exact.
  std::map<std::vector<Label>, std::set<int>> frontier;
  frontier[{}] = {mdp.initial_state()};

  for (int depth = 0; depth < m; ++depth) {
    std::map<std::vector<Label>, std::set<int>> next_frontier;
    for (const auto& [seq, ends] : frontier) {
      for (int s : ends) {
        for (int a = 0; a < mdp.num_actions(); ++a) {
          for (const auto& [s_next, prob] : mdp.successors(s, a)) {
            if (prob <= 0.0) continue;
            std::vector<Label> extended = seq;
            extended.push_back(labelling[s_next]);
            next_frontier[extended].insert(s_next);
          }
        }
      }
    }
    for (const auto& [seq, ends] : next_frontier) {
      result.insert(seq);
      if (result.size() > cap) {
        throw TractabilityError("attainable sequence set exceeds the cap");
      }
    }
    frontier.swap(next_frontier);
    if (frontier.empty()) break;
  }
  return result;
}

bool equivalent_on_attainable(const RewardMachine& a, const RewardMachine& b,
                              const LabeledMdp& mdp,
                              const std::vector<Label>& labelling, int m) {
  if (labelling.size() != static_cast<std::size_t>(mdp.num_states())) {
    throw ValidationError("labelling must cover every state");
  }
  // Breadth-first over (state of a, state of b, environment state); visiting
  // shallowest-first means every edge reachable within m steps is checked.
  struct Node {
    int va, vb, s, depth;
  };
  auto key = [&](int va, int vb, int s) {
    return (static_cast<long>(va) * b.num_states() + vb) * mdp.num_states() + s;
  };
  std::set<long> visited;
  std::deque<Node> queue;
  queue.push_back({a.initial(), b.initial(), mdp.initial_state(), 0});
  visited.insert(key(a.initial(), b.initial(), mdp.initial_state()));

  while (!queue.empty()) {
    const Node n = queue.front();
    queue.pop_front();
    if (n.depth >= m) continue;
    for (int act = 0; act < mdp.num_actions(); ++act) {
      for (const auto& [s_next, prob] : mdp.successors(n.s, act)) {
        if (prob <= 0.0) continue;
        const Label l = labelling[s_next];
        const auto [va_next, ra] = a.step(n.va, l);
        const auto [vb_next, rb] = b.step(n.vb, l);
        if (ra != rb) return false;
        const long k = key(va_next, vb_next, s_next);
        if (visited.insert(k).second) {
          queue.push_back({va_next, vb_next, s_next, n.depth + 1});
        }
      }
    }
  }
  return true;
}

double rollout_product_policy(const ProductMdp& p, const std::vector<int>& policy,
                              int horizon, Rng& rng) {
  int x = p.initial;
  double ret = 0.0;
  double discount_pow = 1.0;
  for (int t = 0; t < horizon; ++t) {
    const int row = x * p.num_actions + policy[x];
    const int begin = p.offsets[row], end = p.offsets[row + 1];
    int e = begin;
    if (end - begin > 1) {
      double u = uniform01(rng);
      double acc = 0.0;
      for (e = begin; e < end - 1; ++e) {
        acc += p.prob[e];
        if (u < acc) break;
      }
    }
    ret += discount_pow * p.reward[e];
    discount_pow *= p.discount;
    x = p.next[e];
  }
  return ret;
}

double rollout_learned_policy(const QTable& q, const RewardMachine& hypothesis,
                              const Belief& belief_h, const LabeledMdp& mdp,
                              const RewardMachine& truth_rm, int horizon,
                              Rng& rng) {
  int s = mdp.initial_state();
  int v = hypothesis.initial();
  int v_truth = truth_rm.initial();
  double ret = 0.0;
  double discount_pow = 1.0;
  for (int t = 0; t < horizon; ++t) {
    const int a = q.argmax_action(v, s);
    const int s_next = mdp.step(s, a, rng);
    const auto [v_truth_next, reward] =
        truth_rm.step(v_truth, mdp.ground_label(s_next));
    ret += discount_pow * reward;
    discount_pow *= mdp.discount();
    v = hypothesis.step(v, belief_h.estimate_label(s_next)).first;
    v_truth = v_truth_next;
    s = s_next;
  }
  return ret;
}

}  // namespace jirp::oracle
