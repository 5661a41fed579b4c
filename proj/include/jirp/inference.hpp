#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "jirp/common.hpp"
#include "jirp/reward_machine.hpp"
#include "jirp/sat.hpp"

namespace jirp {

/// Insertion-ordered set of counterexample traces with a capacity cap.
/// Re-adding a trace already present is a no-op; adding beyond capacity
/// evicts the oldest trace.
class Sample {
 public:
  explicit Sample(std::size_t capacity);

  void add(Trace trace);
  void clear() { traces_.clear(); }

  std::size_t size() const { return traces_.size(); }
  bool empty() const { return traces_.empty(); }
  std::size_t capacity() const { return capacity_; }
  const std::deque<Trace>& traces() const { return traces_; }

 private:
  std::size_t capacity_;
  std::deque<Trace> traces_;
};

bool consistent_with(const RewardMachine& rm, const Sample& sample);

/// Decode context for a phi_k encoding: maps satisfying assignments back to
/// machines. Variables encode (i) the machine-state reached after each
/// prefix of the sample, (ii) the transition choice per (state, label), and
/// (iii) the output choice per (state, label).
struct PhiEncoding {
  sat::CnfFormula cnf;
  int k = 0;
  std::vector<Label> alphabet;       // label index -> label
  std::vector<double> reward_values; // reward index -> value
  int num_nodes = 0;                 // prefix-tree nodes, node 0 = root

  int x_var(int node, int v) const { return 1 + node * k + v; }
  int d_var(int v, int l, int v2) const {
    return 1 + num_nodes * k + (v * static_cast<int>(alphabet.size()) + l) * k + v2;
  }
  int o_var(int v, int l, int r) const {
    return 1 + num_nodes * k +
           static_cast<int>(alphabet.size()) * k * k +
           (v * static_cast<int>(alphabet.size()) + l) *
               static_cast<int>(reward_values.size()) + r;
  }
};

/// Builds the propositional formula that is satisfiable iff some k-state
/// machine over the sample's label alphabet is consistent with every trace.
PhiEncoding encode_phi(const Sample& sample, int k);

/// Reconstructs the machine a satisfying assignment describes. Only the
/// (state, label) entries actually exercised by the sample become explicit
/// edges; everything else falls to the per-state default (self-loop, 0),
/// which keeps unconstrained solver choices out of the result.
RewardMachine decode_model(const sat::Model& model, const PhiEncoding& enc,
                           const Sample& sample,
                           std::vector<std::string> propositions);

/// Minimal consistent machine via satisfiability checks for k = 1..k_max.
/// nullopt means no machine with at most k_max states is consistent; the
/// caller keeps its previous hypothesis in that case.
std::optional<RewardMachine> infer_minimal(
    const Sample& sample, int k_max, std::vector<std::string> propositions,
    sat::Solver* solver = nullptr);

/// Exhaustive test oracle: backtracking enumeration of Mealy machines up to
/// k_max states over the sample alphabet. Guarded against intractable
/// inputs (alphabet <= 4 labels, k_max <= 3, <= 2 distinct rewards).
std::optional<RewardMachine> brute_force_infer(
    const Sample& sample, int k_max, std::vector<std::string> propositions);

/// Parses the sample-file JSON: a list of {"labels": [[names]],
/// "rewards": [numbers]}. The vocabulary is the sorted set of label names
/// unless given.
Sample parse_sample(const std::string& text,
                    std::vector<std::string>* propositions_out,
                    std::size_t capacity = 1u << 20);

}  // namespace jirp
