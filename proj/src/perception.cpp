#include "jirp/perception.hpp"

#include <cmath>

#include <json.hpp>

namespace jirp {

Belief::Belief(int num_states, int num_props, double prior)
    : num_states_(num_states),
      num_props_(num_props),
      table_(static_cast<std::size_t>(num_states) * num_props, prior) {
  if (prior < 0.0 || prior > 1.0) {
    throw ValidationError("belief prior must lie in [0, 1]");
  }
}

Label Belief::estimate_label(int s) const {
  Label label = 0;
  for (int p = 0; p < num_props_; ++p) {
    if (at(s, p) >= 0.5) label |= Label{1} << p;
  }
  return label;
}

double Belief::joint_probability(int s, Label subset) const {
  double prod = 1.0;
  for (int p = 0; p < num_props_; ++p) {
    if (subset & (Label{1} << p)) prod *= at(s, p);
  }
  return prod;
}

ObservationModel::ObservationModel(Kind kind, int num_states, int num_props)
    : kind_(kind), num_states_(num_states), num_props_(num_props) {}

ObservationModel ObservationModel::accurate(int num_states, int num_props) {
  ObservationModel om(Kind::Accurate, num_states, num_props);
  om.uniform_accuracy_ = 1.0;
  return om;
}

ObservationModel ObservationModel::bernoulli(int num_states, int num_props,
                                             double accuracy) {
  if (accuracy < 0.0 || accuracy > 1.0) {
    throw ValidationError("observation accuracy must lie in [0, 1]");
  }
  ObservationModel om(Kind::Bernoulli, num_states, num_props);
  om.uniform_accuracy_ = accuracy;
  return om;
}

ObservationModel ObservationModel::per_proposition(
    int num_states, int num_props, std::vector<double> accuracies) {
  if (accuracies.size() != static_cast<std::size_t>(num_props)) {
    throw ValidationError("need one accuracy per proposition");
  }
  ObservationModel om(Kind::Bernoulli, num_states, num_props);
  om.table_.reserve(static_cast<std::size_t>(num_states) * num_props);
  for (int s = 0; s < num_states; ++s) {
    for (int p = 0; p < num_props; ++p) om.table_.push_back(accuracies[p]);
  }
  return om;
}

ObservationModel ObservationModel::range_uniform(int num_states, int num_props,
                                                 double low, double high,
                                                 Resample resample, Rng& rng) {
  if (low < 0.0 || high > 1.0 || low > high) {
    throw ValidationError("observation accuracy range must lie in [0, 1]");
  }
  ObservationModel om(Kind::RangeUniform, num_states, num_props);
  om.low_ = low;
  om.high_ = high;
  om.resample_ = resample;
  om.resample_table(rng);
  return om;
}

ObservationModel ObservationModel::from_json(const std::string& text,
                                             int num_states, int num_props,
                                             Rng& rng) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ParseError("malformed observation config");
  const std::string kind = doc.value("kind", "accurate");
  ObservationModel om = [&] {
    if (kind == "accurate") return accurate(num_states, num_props);
    if (kind == "bernoulli") {
      return bernoulli(num_states, num_props, doc.at("accuracy").get<double>());
    }
    if (kind == "range_uniform") {
      const auto resample = doc.value("resample", "never") == std::string("per_episode")
                                ? Resample::PerEpisode
                                : Resample::Never;
      return range_uniform(num_states, num_props, doc.value("low", 0.1),
                           doc.value("high", 0.9), resample, rng);
    }
    throw ValidationError("unknown observation model kind '" + kind + "'");
  }();
  if (doc.contains("radius") && !doc.at("radius").is_null()) {
    om.set_radius(doc.at("radius").get<int>());
  }
  return om;
}

void ObservationModel::resample_table(Rng& rng) {
  table_.resize(static_cast<std::size_t>(num_states_) * num_props_);
  for (auto& a : table_) a = low_ + (high_ - low_) * uniform01(rng);
}

void ObservationModel::begin_episode(Rng& rng) {
  if (kind_ == Kind::RangeUniform && resample_ == Resample::PerEpisode) {
    resample_table(rng);
  }
}

double ObservationModel::accuracy_at(int s_target, int p) const {
  if (table_.empty()) return uniform_accuracy_;
  return table_[static_cast<std::size_t>(s_target) * num_props_ + p];
}

double ObservationModel::prob_report_true(int /*s_agent*/, int s_target, int p,
                                          bool truth) const {
  const double a = accuracy_at(s_target, p);
  return truth ? a : 1.0 - a;
}

ObservationBatch sample_observations(const ObservationModel& om,
                                     const LabeledMdp& mdp, int s_agent,
                                     Rng& rng) {
  if (s_agent < 0 || s_agent >= mdp.num_states()) {
    throw DomainError("unknown agent state");
  }
  const int num_states = mdp.num_states();
  const int num_props = static_cast<int>(mdp.propositions().size());
  ObservationBatch batch;
  batch.value.assign(static_cast<std::size_t>(num_states) * num_props, 0);
  batch.observed.assign(batch.value.size(), 0);

  auto in_range = [&](int s) {
    if (!om.radius()) return true;
    if (!mdp.is_grid()) return true;
    const int dr = std::abs(mdp.row_of(s) - mdp.row_of(s_agent));
    const int dc = std::abs(mdp.col_of(s) - mdp.col_of(s_agent));
    return std::max(dr, dc) <= *om.radius();
  };

  for (int s = 0; s < num_states; ++s) {
    if (!in_range(s)) continue;
    const Label truth_label = mdp.ground_label(s);
    for (int p = 0; p < num_props; ++p) {
      const bool truth = (truth_label >> p) & 1;
      const double p_true = om.prob_report_true(s_agent, s, p, truth);
      const std::size_t i = static_cast<std::size_t>(s) * num_props + p;
      batch.observed[i] = 1;
      batch.value[i] = bernoulli(rng, p_true) ? 1 : 0;
    }
  }
  return batch;
}

void bayes_update(Belief& belief, int s_agent, const ObservationBatch& obs,
                  const ObservationModel& om, kernels::Exec exec) {
  const int num_props = belief.num_props();
  const std::size_t n = belief.data().size();
  if (obs.value.size() != n || obs.observed.size() != n) {
    throw ValidationError("observation batch does not match the belief shape");
  }
  // The posterior has the same algebraic form for both outcomes; select the
  // model probability matching the reading.
  std::vector<double> o_used(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (!obs.observed[i]) continue;
    const int s = static_cast<int>(i) / num_props;
    const int p = static_cast<int>(i) % num_props;
    o_used[i] = obs.value[i] ? om.prob_report_true(s_agent, s, p, true)
                             : om.prob_report_true(s_agent, s, p, false);
  }
  kernels::bayes_posterior_batch(belief.raw(), o_used.data(),
                                 obs.observed.data(), belief.raw(), n, exec);
}

double jsd(const Belief& bh, const Belief& bj, kernels::Exec exec) {
  if (bh.num_states() != bj.num_states() || bh.num_props() != bj.num_props()) {
    throw ValidationError("beliefs are defined over different spaces");
  }
  const std::size_t n = bh.data().size();
  std::vector<double> terms(n);
  kernels::jsd_terms(bh.data().data(), bj.data().data(), terms.data(), n, exec);
  // Sequential sum keeps the value independent of the thread count.
  double total = 0.0;
  for (double t : terms) total += t;
  return total;
}

bool signif_change(const Belief& bh, const Belief& bj, double gamma_d) {
  if (gamma_d < 0.0) throw ValidationError("divergence threshold must be >= 0");
  return jsd(bh, bj) > gamma_d;
}

FrequencyEstimator::FrequencyEstimator(int num_states, int num_props)
    : num_props_(num_props),
      true_counts_(static_cast<std::size_t>(num_states) * num_props, 0),
      total_counts_(static_cast<std::size_t>(num_states) * num_props, 0) {}

void FrequencyEstimator::observe(const ObservationBatch& obs) {
  for (std::size_t i = 0; i < total_counts_.size(); ++i) {
    if (!obs.observed[i]) continue;
    ++total_counts_[i];
    if (obs.value[i]) ++true_counts_[i];
  }
}

void FrequencyEstimator::write_into(Belief& belief) const {
  for (std::size_t i = 0; i < total_counts_.size(); ++i) {
    if (total_counts_[i] == 0) continue;
    const int s = static_cast<int>(i) / num_props_;
    const int p = static_cast<int>(i) % num_props_;
    belief.set(s, p,
               static_cast<double>(true_counts_[i]) / total_counts_[i]);
  }
}

}  // namespace jirp
