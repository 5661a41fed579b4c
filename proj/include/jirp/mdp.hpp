#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "jirp/common.hpp"

namespace jirp {

/// Finite MDP with a ground-truth labelling of states by atomic
/// propositions. Immutable after construction and safe to share across
/// concurrent runs; step() takes an explicit random source.
class LabeledMdp {
 public:
  using Successors = std::vector<std::pair<int, double>>;

  LabeledMdp(int num_states, int initial_state, int num_actions,
             std::vector<std::string> propositions,
             std::vector<Label> ground_labels,
             std::vector<Successors> transitions,  // indexed s * num_actions + a
             double discount,
             int grid_width = 0, int grid_height = 0);

  /// Parses the JSON layout document and builds a 4-connected grid with
  /// deterministic moves (walls clamp) or slip-perturbed moves.
  static LabeledMdp load_layout(const std::string& text);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }
  int initial_state() const { return initial_state_; }
  double discount() const { return discount_; }
  const std::vector<std::string>& propositions() const { return propositions_; }

  Label ground_label(int s) const;
  const Successors& successors(int s, int a) const;

  /// Samples a successor of (s, a); deterministic rows skip the rng draw.
  int step(int s, int a, Rng& rng) const;

  bool is_grid() const { return grid_width_ > 0; }
  int grid_width() const { return grid_width_; }
  int grid_height() const { return grid_height_; }
  int row_of(int s) const { return s / grid_width_; }
  int col_of(int s) const { return s % grid_width_; }

  /// Grid actions, in index order.
  enum Action { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };

 private:
  void check_state(int s) const;

  int num_states_;
  int initial_state_;
  int num_actions_;
  std::vector<std::string> propositions_;
  std::vector<Label> ground_labels_;
  std::vector<Successors> transitions_;
  double discount_;
  int grid_width_;
  int grid_height_;
};

/// One realized episode path. Labels and rewards are indexed by step:
/// entry j corresponds to the successor state of action j.
struct Trajectory {
  std::vector<int> states;        // length k+1
  std::vector<int> actions;       // length k
  std::vector<Label> observed_labels;
  std::vector<double> rewards;
};

}  // namespace jirp
