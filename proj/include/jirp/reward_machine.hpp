#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jirp/common.hpp"

namespace jirp {

/// Conjunction of literals over the proposition set: a label matches iff it
/// contains every proposition in `all_of` and none in `none_of`.
struct Guard {
  Label all_of = 0;
  Label none_of = 0;

  bool matches(Label l) const {
    return (l & all_of) == all_of && (l & none_of) == 0;
  }
};

struct RmEdge {
  Guard guard;
  int to = 0;
  double reward = 0.0;
};

/// One observed trace: a label sequence and the rewards obtained along it.
struct Trace {
  std::vector<Label> labels;
  std::vector<double> rewards;

  bool operator==(const Trace&) const = default;
};

/// Deterministic Mealy machine over label sets with reward outputs. The
/// transition and output functions are total: states carry explicitly
/// guarded edges plus a default edge taken when no guard matches.
/// Immutable after construction.
class RewardMachine {
 public:
  RewardMachine(int num_states, int initial,
                std::vector<std::string> propositions,
                std::vector<std::vector<RmEdge>> guarded_edges,
                std::vector<RmEdge> default_edges);

  /// The unique 1-state machine emitting reward 0 on every label.
  static RewardMachine trivial(std::vector<std::string> propositions);

  int num_states() const { return num_states_; }
  int initial() const { return initial_; }
  const std::vector<std::string>& propositions() const { return propositions_; }

  /// Distinct reward values the machine can emit.
  std::vector<double> reward_alphabet() const;

  /// Applies one input label: returns (successor state, emitted reward).
  std::pair<int, double> step(int v, Label l) const;

  /// Runs the machine from its initial state. The state sequence has
  /// |labels|+1 entries, the reward sequence |labels|.
  std::pair<std::vector<int>, std::vector<double>> run(
      std::span<const Label> labels) const;

  /// Reward sequence of run().
  std::vector<double> rewards_on(std::span<const Label> labels) const;

  /// True iff the machine reproduces the reward sequence of every trace.
  bool consistent_with(std::span<const Trace> traces) const;
  bool consistent_with(const Trace& trace) const;

  const std::vector<std::vector<RmEdge>>& guarded_edges() const {
    return guarded_edges_;
  }
  const std::vector<RmEdge>& default_edges() const { return default_edges_; }

  /// Re-expresses the machine over a different proposition order; fails if
  /// a used proposition is missing from `propositions`.
  RewardMachine rebind(const std::vector<std::string>& propositions) const;

  std::string to_json_string() const;

 private:
  int num_states_;
  int initial_;
  std::vector<std::string> propositions_;
  std::vector<std::vector<RmEdge>> guarded_edges_;  // per state
  std::vector<RmEdge> default_edges_;               // per state
};

/// Parses the JSON reward-machine document. When `propositions` is given it
/// fixes the vocabulary (unknown guard names are rejected); otherwise the
/// vocabulary is the sorted set of names appearing in guards.
RewardMachine parse_rm(const std::string& text,
                       std::optional<std::vector<std::string>> propositions =
                           std::nullopt);

}  // namespace jirp
