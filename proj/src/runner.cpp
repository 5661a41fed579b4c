#include "jirp/runner.hpp"

#include <json.hpp>

namespace jirp {

namespace {

using nlohmann::json;

ObservationConfig observation_from_json(const json& doc) {
  ObservationConfig oc;
  oc.kind = doc.value("kind", "accurate");
  oc.accuracy = doc.value("accuracy", 1.0);
  oc.low = doc.value("low", 0.1);
  oc.high = doc.value("high", 0.9);
  oc.resample = doc.value("resample", "never");
  if (doc.contains("radius") && !doc.at("radius").is_null()) {
    oc.radius = doc.at("radius").get<int>();
  }
  return oc;
}

json observation_to_json(const ObservationConfig& oc) {
  json doc = {{"kind", oc.kind},   {"accuracy", oc.accuracy},
              {"low", oc.low},     {"high", oc.high},
              {"resample", oc.resample}};
  doc["radius"] = oc.radius ? json(*oc.radius) : json(nullptr);
  return doc;
}

ObservationModel build_observation_model(const ObservationConfig& oc,
                                         const LabeledMdp& mdp, Rng& rng) {
  const int S = mdp.num_states();
  const int P = static_cast<int>(mdp.propositions().size());
  ObservationModel om = [&] {
    if (oc.kind == "accurate") return ObservationModel::accurate(S, P);
    if (oc.kind == "bernoulli") {
      return ObservationModel::bernoulli(S, P, oc.accuracy);
    }
    if (oc.kind == "range_uniform") {
      const auto resample = oc.resample == "per_episode"
                                ? ObservationModel::Resample::PerEpisode
                                : ObservationModel::Resample::Never;
      return ObservationModel::range_uniform(S, P, oc.low, oc.high, resample,
                                             rng);
    }
    throw ValidationError("unknown observation model kind '" + oc.kind + "'");
  }();
  om.set_radius(oc.radius);
  return om;
}

Belief build_prior(const PriorConfig& pc, const LabeledMdp& mdp, Rng& rng) {
  const int S = mdp.num_states();
  const int P = static_cast<int>(mdp.propositions().size());
  if (pc.kind == "uniform") return Belief(S, P, pc.value);
  if (pc.kind == "random") {
    Belief b(S, P);
    for (int s = 0; s < S; ++s) {
      for (int p = 0; p < P; ++p) b.set(s, p, uniform01(rng));
    }
    return b;
  }
  throw ValidationError("unknown prior kind '" + pc.kind + "'");
}

std::optional<long> compute_converged_step(
    const std::vector<std::pair<long, double>>& curve) {
  if (curve.empty() || curve.back().second != 1.0) return std::nullopt;
  long step = curve.back().first;
  for (auto it = curve.rbegin(); it != curve.rend() && it->second == 1.0; ++it) {
    step = it->first;
  }
  return step;
}

TrainResult train_impl(const TrainConfig& config, const LabeledMdp& mdp,
                       const RewardMachine& truth_rm_raw,
                       std::optional<Belief> initial_belief,
                       bool perception_enabled, const TrainObserver& observer) {
  config.validate();
  const RewardMachine truth_rm = truth_rm_raw.rebind(mdp.propositions());
  Rng rng(config.seed);

  ObservationModel om = build_observation_model(config.observation, mdp, rng);
  Belief belief_h = initial_belief
                        ? *initial_belief
                        : build_prior(config.prior, mdp, rng);
  Belief belief_j = belief_h;
  RewardMachine hypothesis = RewardMachine::trivial(mdp.propositions());
  QTable q(1, mdp.num_states(), mdp.num_actions());
  Sample sample(static_cast<std::size_t>(config.trace_capacity));

  TrainResult result;
  const bool updates_on = perception_enabled && config.belief_updates_enabled;

  // Evaluation episodes use a stream derived from the step index so they
  // never perturb the training draws.
  auto eval_hook = [&](const StepEvent& ev) {
    if (ev.global_step % config.eval_every == 0) {
      Rng eval_rng(config.seed ^ 0x9e3779b97f4a7c15ull ^
                   static_cast<std::uint64_t>(ev.global_step));
      const double reward = evaluate(hypothesis, q, belief_h, mdp, truth_rm,
                                     config.eplength, eval_rng);
      result.eval_curve.emplace_back(ev.global_step, reward);
    }
    if (observer.on_step) observer.on_step(ev);
  };

  long global_step = 0;
  int episode = 0;
  while (global_step < config.total_steps) {
    ++episode;
    if (updates_on) om.begin_episode(rng);

    EpisodeParams params;
    params.eplength = config.eplength;
    params.epsilon = config.epsilon;
    params.alpha = config.alpha;
    params.early_stop = config.early_stop;
    params.belief_updates = updates_on;
    params.step_budget = config.total_steps - global_step;

    EpisodeResult er =
        qrm_episode_mod(hypothesis, q, belief_h, belief_j, mdp, truth_rm, om,
                        params, rng, global_step, eval_hook);
    if (observer.on_episode_end) observer.on_episode_end(er);

    Trace trace{er.labels, er.rewards};
    if (hypothesis.rewards_on(trace.labels) != trace.rewards) {
      if (observer.on_counterexample) {
        observer.on_counterexample(hypothesis, trace);
      }
      sample.add(std::move(trace));
      auto inferred =
          infer_minimal(sample, config.k_max, mdp.propositions());
      result.inference_log.push_back(
          {episode, inferred ? std::optional<int>(inferred->num_states())
                             : std::nullopt});
      if (inferred) {
        hypothesis = std::move(*inferred);
        q = QTable(hypothesis.num_states(), mdp.num_states(),
                   mdp.num_actions());
        if (observer.on_inference_success) {
          observer.on_inference_success(hypothesis, sample);
        }
      }
      // No consistent machine within the state cap: keep the last valid
      // hypothesis and carry on.
    }

    if (updates_on && signif_change(belief_h, belief_j, config.gamma_d)) {
      result.belief_update_log.push_back(
          {episode, global_step, jsd(belief_h, belief_j)});
      hypothesis = RewardMachine::trivial(mdp.propositions());
      q = QTable(1, mdp.num_states(), mdp.num_actions());
      sample.clear();
      belief_h = belief_j;
      if (observer.on_belief_swap) observer.on_belief_swap(sample, hypothesis);
    }
  }

  result.final_hypothesis = std::move(hypothesis);
  result.final_q = std::move(q);
  result.final_belief = std::move(belief_h);
  result.converged_step = compute_converged_step(result.eval_curve);
  result.steps_run = global_step;
  result.episodes_run = episode;
  return result;
}

}  // namespace

void TrainConfig::validate() const {
  if (eplength < 1) throw ValidationError("eplength must be at least 1");
  if (total_steps < eplength) {
    throw ValidationError("total_steps must be at least eplength");
  }
  if (eval_every < 1) throw ValidationError("eval_every must be at least 1");
  if (k_max < 1) throw ValidationError("k_max must be at least 1");
  if (trace_capacity < 1) {
    throw ValidationError("trace_capacity must be at least 1");
  }
  if (epsilon < 0.0 || epsilon > 1.0) {
    throw ValidationError("epsilon must lie in [0, 1]");
  }
  if (alpha <= 0.0 || alpha > 1.0) {
    throw ValidationError("alpha must lie in (0, 1]");
  }
  if (gamma_d < 0.0) throw ValidationError("gamma_d must be >= 0");
}

TrainConfig TrainConfig::from_json(const std::string& text) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ParseError("malformed train config");
  TrainConfig c;
  c.total_steps = doc.value("total_steps", c.total_steps);
  c.eplength = doc.value("eplength", c.eplength);
  c.epsilon = doc.value("epsilon", c.epsilon);
  c.alpha = doc.value("alpha", c.alpha);
  c.gamma_d = doc.value("gamma_d", c.gamma_d);
  c.k_max = doc.value("k_max", c.k_max);
  c.trace_capacity = doc.value("trace_capacity", c.trace_capacity);
  c.eval_every = doc.value("eval_every", c.eval_every);
  c.seed = doc.value("seed", c.seed);
  c.belief_updates_enabled =
      doc.value("belief_updates_enabled", c.belief_updates_enabled);
  c.early_stop = doc.value("early_stop", c.early_stop);
  if (doc.contains("observation")) {
    c.observation = observation_from_json(doc.at("observation"));
  }
  if (doc.contains("prior")) {
    c.prior.kind = doc.at("prior").value("kind", c.prior.kind);
    c.prior.value = doc.at("prior").value("value", c.prior.value);
  }
  return c;
}

std::string TrainConfig::to_json_string() const {
  json doc = {{"total_steps", total_steps},
              {"eplength", eplength},
              {"epsilon", epsilon},
              {"alpha", alpha},
              {"gamma_d", gamma_d},
              {"k_max", k_max},
              {"trace_capacity", trace_capacity},
              {"eval_every", eval_every},
              {"seed", seed},
              {"belief_updates_enabled", belief_updates_enabled},
              {"early_stop", early_stop},
              {"observation", observation_to_json(observation)},
              {"prior", {{"kind", prior.kind}, {"value", prior.value}}}};
  return doc.dump(2);
}

std::string TrainResult::to_json_string(const LabeledMdp& mdp) const {
  json eval = json::array();
  for (const auto& [step, reward] : eval_curve) {
    eval.push_back({step, reward});
  }
  json beliefs = json::array();
  for (const auto& e : belief_update_log) {
    beliefs.push_back({e.episode, e.global_step, e.jsd_value});
  }
  json inferences = json::array();
  for (const auto& e : inference_log) {
    inferences.push_back({e.episode, e.k ? json(*e.k) : json(nullptr)});
  }
  json q_values = json::array();
  for (int v = 0; v < final_q.num_rm_states(); ++v) {
    for (int s = 0; s < final_q.num_mdp_states(); ++s) {
      for (int a = 0; a < final_q.num_actions(); ++a) {
        q_values.push_back(final_q.at(v, s, a));
      }
    }
  }
  json belief_values = json::array();
  for (double x : final_belief.data()) belief_values.push_back(x);

  json doc = {
      {"final_hypothesis", json::parse(final_hypothesis.to_json_string())},
      {"final_q",
       {{"rm_states", final_q.num_rm_states()},
        {"mdp_states", final_q.num_mdp_states()},
        {"actions", final_q.num_actions()},
        {"values", q_values}}},
      {"final_belief",
       {{"states", final_belief.num_states()},
        {"props", mdp.propositions()},
        {"values", belief_values}}},
      {"eval_curve", eval},
      {"belief_update_log", beliefs},
      {"inference_log", inferences},
      {"converged_step", converged_step ? json(*converged_step) : json(nullptr)},
      {"steps_run", steps_run},
      {"episodes_run", episodes_run}};
  return doc.dump(2);
}

TrainResult train(const TrainConfig& config, const LabeledMdp& mdp,
                  const RewardMachine& truth_rm,
                  std::optional<Belief> initial_belief,
                  const TrainObserver& observer) {
  return train_impl(config, mdp, truth_rm, std::move(initial_belief), true,
                    observer);
}

TrainResult train_baseline_jirp(const TrainConfig& config,
                                const LabeledMdp& mdp,
                                const RewardMachine& truth_rm,
                                const std::vector<Label>& labelling,
                                const TrainObserver& observer) {
  if (labelling.size() != static_cast<std::size_t>(mdp.num_states())) {
    throw ValidationError("labelling must cover every state");
  }
  // A 0/1 belief reproduces the given labelling exactly and stays frozen,
  // which specializes the joint loop to the known-labelling baseline.
  const int P = static_cast<int>(mdp.propositions().size());
  Belief exact(mdp.num_states(), P);
  for (int s = 0; s < mdp.num_states(); ++s) {
    for (int p = 0; p < P; ++p) {
      exact.set(s, p, (labelling[s] >> p) & 1 ? 1.0 : 0.0);
    }
  }
  return train_impl(config, mdp, truth_rm, std::move(exact), false, observer);
}

double evaluate(const RewardMachine& hypothesis, const QTable& q,
                const Belief& belief_h, const LabeledMdp& mdp,
                const RewardMachine& truth_rm, int eplength, Rng& rng) {
  int s = mdp.initial_state();
  int v = hypothesis.initial();
  int v_truth = truth_rm.initial();
  double total = 0.0;
  for (int t = 0; t < eplength; ++t) {
    const int a = q.argmax_action(v, s);
    const int s_next = mdp.step(s, a, rng);
    const auto [v_truth_next, reward] =
        truth_rm.step(v_truth, mdp.ground_label(s_next));
    total += reward;
    v = hypothesis.step(v, belief_h.estimate_label(s_next)).first;
    v_truth = v_truth_next;
    s = s_next;
    if (reward != 0.0) break;
  }
  return total;
}

}  // namespace jirp
