#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "jirp/common.hpp"
#include "jirp/kernels.hpp"
#include "jirp/mdp.hpp"

namespace jirp {

/// Per-(state, proposition) probability that the proposition holds.
/// A value type: each run owns and mutates its own copies.
class Belief {
 public:
  Belief() = default;
  Belief(int num_states, int num_props, double prior = 0.5);

  int num_states() const { return num_states_; }
  int num_props() const { return num_props_; }

  double at(int s, int p) const { return table_[index(s, p)]; }
  void set(int s, int p, double v) { table_[index(s, p)] = v; }

  std::span<const double> data() const { return table_; }
  double* raw() { return table_.data(); }

  /// Most probable label: propositions with probability >= 0.5.
  Label estimate_label(int s) const;

  /// Probability that every proposition in `subset` holds at s, under the
  /// per-state independence assumption (product of entries).
  double joint_probability(int s, Label subset) const;

  bool operator==(const Belief&) const = default;

 private:
  std::size_t index(int s, int p) const {
    return static_cast<std::size_t>(s) * num_props_ + p;
  }

  int num_states_ = 0;
  int num_props_ = 0;
  std::vector<double> table_;
};

/// One round of perception outputs. Entries are indexed s * num_props + p;
/// `observed` marks which entries carry a reading this round.
struct ObservationBatch {
  std::vector<std::uint8_t> value;
  std::vector<std::uint8_t> observed;
};

/// Sensor model: O(s1, s2, p, b) is the probability that the sensor reports
/// True for proposition p at state s2, observed from s1, when the actual
/// truth value is b. The compact kinds are complementary
/// (O(.., False) = 1 - O(.., True)) and do not depend on s1.
class ObservationModel {
 public:
  enum class Kind { Accurate, Bernoulli, RangeUniform };
  enum class Resample { Never, PerEpisode };

  static ObservationModel accurate(int num_states, int num_props);
  static ObservationModel bernoulli(int num_states, int num_props,
                                    double accuracy);
  static ObservationModel per_proposition(int num_states, int num_props,
                                          std::vector<double> accuracies);
  static ObservationModel range_uniform(int num_states, int num_props,
                                        double low, double high,
                                        Resample resample, Rng& rng);

  /// Builds from the JSON config document
  /// {"kind", "accuracy", "low", "high", "resample", "radius"}.
  static ObservationModel from_json(const std::string& text, int num_states,
                                    int num_props, Rng& rng);

  double prob_report_true(int s_agent, int s_target, int p, bool truth) const;

  /// Redraws the range-sampled accuracies; called by the owning run at the
  /// start of each episode when configured to resample.
  void begin_episode(Rng& rng);
  bool resamples_per_episode() const {
    return resample_ == Resample::PerEpisode;
  }

  std::optional<int> radius() const { return radius_; }
  void set_radius(std::optional<int> r) { radius_ = r; }

  Kind kind() const { return kind_; }

 private:
  ObservationModel(Kind kind, int num_states, int num_props);
  void resample_table(Rng& rng);
  double accuracy_at(int s_target, int p) const;

  Kind kind_;
  int num_states_;
  int num_props_;
  Resample resample_ = Resample::Never;
  double uniform_accuracy_ = 1.0;
  double low_ = 0.0, high_ = 1.0;
  std::vector<double> table_;  // per (s_target, p) accuracy, when non-uniform
  std::optional<int> radius_;
};

/// Draws perception outputs for every (state, proposition) pair, or for the
/// pairs within the model's sensing radius of the agent (Chebyshev distance
/// on grids). Output agrees with the model: when the truth value of p at s
/// is b, the reading is True with probability O(s_agent, s, p, b).
ObservationBatch sample_observations(const ObservationModel& om,
                                     const LabeledMdp& mdp, int s_agent,
                                     Rng& rng);

/// Bayesian posterior update of the observed entries, exactly:
///   reading True:  b' = b O(True)  / (b O(True)  + (1-b)(1-O(True)))
///   reading False: b' = b O(False) / (b O(False) + (1-b)(1-O(False)))
/// Unobserved entries are unchanged. Posteriors are clamped away from 0/1
/// unless the prior was exactly 0 or 1 (certainty is absorbing).
void bayes_update(Belief& belief, int s_agent, const ObservationBatch& obs,
                  const ObservationModel& om,
                  kernels::Exec exec = kernels::Exec::Auto);

/// Cumulative Jensen-Shannon divergence over all (state, proposition)
/// entries, natural log. Symmetric, nonnegative, zero iff equal, bounded by
/// num_states * num_props * ln 2.
double jsd(const Belief& bh, const Belief& bj,
           kernels::Exec exec = kernels::Exec::Auto);

/// True iff jsd(bh, bj) strictly exceeds the threshold.
bool signif_change(const Belief& bh, const Belief& bj, double gamma_d);

/// Counter-based alternative to the Bayesian update: estimates each entry as
/// (True readings) / (readings). Entries with no readings keep the prior.
class FrequencyEstimator {
 public:
  FrequencyEstimator(int num_states, int num_props);
  void observe(const ObservationBatch& obs);
  void write_into(Belief& belief) const;

 private:
  int num_props_;
  std::vector<long> true_counts_;
  std::vector<long> total_counts_;
};

}  // namespace jirp
