#include "jirp/reward_machine.hpp"

#include <algorithm>
#include <set>

#include <json.hpp>

namespace jirp {

namespace {

using nlohmann::json;

// Two literal-conjunction guards admit a common label iff no proposition is
// required by one and forbidden by the other.
bool guards_overlap(const Guard& a, const Guard& b) {
  return ((a.all_of | b.all_of) & (a.none_of | b.none_of)) == 0;
}

}  // namespace

RewardMachine::RewardMachine(int num_states, int initial,
                             std::vector<std::string> propositions,
                             std::vector<std::vector<RmEdge>> guarded_edges,
                             std::vector<RmEdge> default_edges)
    : num_states_(num_states),
      initial_(initial),
      propositions_(std::move(propositions)),
      guarded_edges_(std::move(guarded_edges)),
      default_edges_(std::move(default_edges)) {
  if (num_states_ <= 0) throw ValidationError("machine needs at least 1 state");
  if (initial_ < 0 || initial_ >= num_states_) {
    throw ValidationError("initial machine state out of range");
  }
  if (propositions_.size() > static_cast<std::size_t>(kMaxPropositions)) {
    throw ValidationError("too many propositions");
  }
  if (guarded_edges_.size() != static_cast<std::size_t>(num_states_)) {
    throw ValidationError("guarded edges must cover every state");
  }
  if (default_edges_.size() != static_cast<std::size_t>(num_states_)) {
    throw ValidationError("missing default edge for some state");
  }
  for (int v = 0; v < num_states_; ++v) {
    if (default_edges_[v].to < 0 || default_edges_[v].to >= num_states_) {
      throw ValidationError("default edge target out of range");
    }
    const auto& edges = guarded_edges_[v];
    for (std::size_t i = 0; i < edges.size(); ++i) {
      if (edges[i].to < 0 || edges[i].to >= num_states_) {
        throw ValidationError("edge target out of range");
      }
      if ((edges[i].guard.all_of & edges[i].guard.none_of) != 0) {
        throw ValidationError("guard requires and forbids a proposition");
      }
      for (std::size_t j = i + 1; j < edges.size(); ++j) {
        if (guards_overlap(edges[i].guard, edges[j].guard)) {
          throw ValidationError("overlapping guards make the machine "
                                "nondeterministic");
        }
      }
    }
  }
}

RewardMachine RewardMachine::trivial(std::vector<std::string> propositions) {
  return RewardMachine(1, 0, std::move(propositions), {{}},
                       {RmEdge{{}, 0, 0.0}});
}

std::vector<double> RewardMachine::reward_alphabet() const {
  std::set<double> values;
  for (int v = 0; v < num_states_; ++v) {
    values.insert(default_edges_[v].reward);
    for (const auto& e : guarded_edges_[v]) values.insert(e.reward);
  }
  return {values.begin(), values.end()};
}

std::pair<int, double> RewardMachine::step(int v, Label l) const {
  if (v < 0 || v >= num_states_) throw DomainError("unknown machine state");
  for (const auto& e : guarded_edges_[v]) {
    if (e.guard.matches(l)) return {e.to, e.reward};
  }
  const RmEdge& d = default_edges_[v];
  return {d.to, d.reward};
}

std::pair<std::vector<int>, std::vector<double>> RewardMachine::run(
    std::span<const Label> labels) const {
  std::vector<int> states;
  std::vector<double> rewards;
  states.reserve(labels.size() + 1);
  rewards.reserve(labels.size());
  int v = initial_;
  states.push_back(v);
  for (Label l : labels) {
    auto [v2, r] = step(v, l);
    states.push_back(v2);
    rewards.push_back(r);
    v = v2;
  }
  return {std::move(states), std::move(rewards)};
}

std::vector<double> RewardMachine::rewards_on(
    std::span<const Label> labels) const {
  return run(labels).second;
}

bool RewardMachine::consistent_with(const Trace& trace) const {
  if (trace.labels.size() != trace.rewards.size()) {
    throw ValidationError("trace label and reward sequences differ in length");
  }
  int v = initial_;
  for (std::size_t j = 0; j < trace.labels.size(); ++j) {
    auto [v2, r] = step(v, trace.labels[j]);
    if (r != trace.rewards[j]) return false;
    v = v2;
  }
  return true;
}

bool RewardMachine::consistent_with(std::span<const Trace> traces) const {
  return std::all_of(traces.begin(), traces.end(), [&](const Trace& t) {
    return consistent_with(t);
  });
}

RewardMachine RewardMachine::rebind(
    const std::vector<std::string>& propositions) const {
  if (propositions == propositions_) return *this;
  std::vector<int> remap(propositions_.size());
  for (std::size_t i = 0; i < propositions_.size(); ++i) {
    auto it =
        std::find(propositions.begin(), propositions.end(), propositions_[i]);
    if (it == propositions.end()) {
      throw ValidationError("machine uses proposition '" + propositions_[i] +
                            "' absent from the target vocabulary");
    }
    remap[i] = static_cast<int>(it - propositions.begin());
  }
  auto remap_label = [&](Label l) {
    Label out = 0;
    for (std::size_t i = 0; i < propositions_.size(); ++i) {
      if (l & (Label{1} << i)) out |= Label{1} << remap[i];
    }
    return out;
  };
  auto guarded = guarded_edges_;
  for (auto& edges : guarded) {
    for (auto& e : edges) {
      e.guard.all_of = remap_label(e.guard.all_of);
      e.guard.none_of = remap_label(e.guard.none_of);
    }
  }
  return RewardMachine(num_states_, initial_, propositions, std::move(guarded),
                       default_edges_);
}

std::string RewardMachine::to_json_string() const {
  json transitions = json::array();
  for (int v = 0; v < num_states_; ++v) {
    for (const auto& e : guarded_edges_[v]) {
      transitions.push_back(
          {{"from", v},
           {"guard",
            {{"all_of", label_to_names(e.guard.all_of, propositions_)},
             {"none_of", label_to_names(e.guard.none_of, propositions_)}}},
           {"to", e.to},
           {"reward", e.reward}});
    }
    transitions.push_back({{"from", v},
                           {"guard", "else"},
                           {"to", default_edges_[v].to},
                           {"reward", default_edges_[v].reward}});
  }
  json doc = {{"states", num_states_},
              {"initial", initial_},
              {"propositions", propositions_},
              {"transitions", transitions}};
  return doc.dump(2);
}

RewardMachine parse_rm(const std::string& text,
                       std::optional<std::vector<std::string>> propositions) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ParseError("malformed machine document");
  if (!doc.is_object()) throw ParseError("machine document must be an object");

  int num_states, initial;
  try {
    num_states = doc.at("states").get<int>();
    initial = doc.at("initial").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("machine: ") + e.what());
  }

  std::vector<std::string> props;
  if (propositions) {
    props = *propositions;
  } else if (doc.contains("propositions")) {
    props = doc.at("propositions").get<std::vector<std::string>>();
  } else {
    // Vocabulary defaults to the sorted set of names used by guards.
    std::set<std::string> names;
    for (const auto& t : doc.value("transitions", json::array())) {
      if (t.contains("guard") && t.at("guard").is_object()) {
        for (const char* key : {"all_of", "none_of"}) {
          for (const auto& n : t.at("guard").value(key, json::array())) {
            names.insert(n.get<std::string>());
          }
        }
      }
    }
    props.assign(names.begin(), names.end());
  }

  if (num_states <= 0) throw ValidationError("machine needs at least 1 state");
  std::vector<std::vector<RmEdge>> guarded(num_states);
  std::vector<RmEdge> defaults;
  std::vector<bool> has_default(num_states, false);
  for (int v = 0; v < num_states; ++v) defaults.push_back(RmEdge{{}, v, 0.0});

  for (const auto& t : doc.value("transitions", json::array())) {
    int from, to;
    double reward;
    try {
      from = t.at("from").get<int>();
      to = t.at("to").get<int>();
      reward = t.at("reward").get<double>();
    } catch (const json::exception& e) {
      throw ParseError(std::string("machine transition: ") + e.what());
    }
    if (from < 0 || from >= num_states || to < 0 || to >= num_states) {
      throw ValidationError("machine transition state out of range");
    }
    const auto& guard = t.at("guard");
    if (guard.is_string() && guard.get<std::string>() == "else") {
      if (has_default[from]) {
        throw ValidationError("duplicate else transition on one state");
      }
      has_default[from] = true;
      defaults[from] = RmEdge{{}, to, reward};
    } else if (guard.is_object()) {
      Guard g;
      g.all_of = label_from_names(
          guard.value("all_of", std::vector<std::string>{}), props);
      g.none_of = label_from_names(
          guard.value("none_of", std::vector<std::string>{}), props);
      guarded[from].push_back(RmEdge{g, to, reward});
    } else {
      throw ParseError("machine guard must be an object or \"else\"");
    }
  }

  return RewardMachine(num_states, initial, std::move(props),
                       std::move(guarded), std::move(defaults));
}

}  // namespace jirp
