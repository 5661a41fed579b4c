#include "jirp/inference.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

namespace jirp {

namespace {

// Prefix-tree acceptor over the sample's label sequences. Each edge carries
// the reward values observed at that position; more than one value on an
// edge means no deterministic machine of any size fits.
struct PrefixTree {
  struct Edge {
    int parent;
    int label;  // alphabet index
    int child;
    std::set<int> reward_indices;
  };

  std::vector<std::map<int, int>> children{1};  // node -> (label idx -> edge idx)
  std::vector<Edge> edges;
  bool conflict = false;

  int num_nodes() const { return static_cast<int>(children.size()); }

  void insert(const std::vector<int>& label_seq, const std::vector<int>& reward_seq) {
    int node = 0;
    for (std::size_t j = 0; j < label_seq.size(); ++j) {
      auto it = children[node].find(label_seq[j]);
      int edge_idx;
      if (it == children[node].end()) {
        edge_idx = static_cast<int>(edges.size());
        const int child = num_nodes();
        children[node][label_seq[j]] = edge_idx;
        edges.push_back(Edge{node, label_seq[j], child, {}});
        children.emplace_back();
      } else {
        edge_idx = it->second;
      }
      edges[edge_idx].reward_indices.insert(reward_seq[j]);
      if (edges[edge_idx].reward_indices.size() > 1) conflict = true;
      node = edges[edge_idx].child;
    }
  }
};

struct IndexedSample {
  std::vector<Label> alphabet;        // sorted distinct labels
  std::vector<double> reward_values;  // sorted distinct rewards
  std::vector<std::vector<int>> label_seqs;
  std::vector<std::vector<int>> reward_seqs;
  PrefixTree tree;
};

IndexedSample index_sample(const Sample& sample) {
  IndexedSample idx;
  std::set<Label> labels;
  std::set<double> rewards;
  for (const Trace& t : sample.traces()) {
    labels.insert(t.labels.begin(), t.labels.end());
    rewards.insert(t.rewards.begin(), t.rewards.end());
  }
  idx.alphabet.assign(labels.begin(), labels.end());
  idx.reward_values.assign(rewards.begin(), rewards.end());
  auto label_index = [&](Label l) {
    return static_cast<int>(std::lower_bound(idx.alphabet.begin(),
                                             idx.alphabet.end(), l) -
                            idx.alphabet.begin());
  };
  auto reward_index = [&](double r) {
    return static_cast<int>(std::lower_bound(idx.reward_values.begin(),
                                             idx.reward_values.end(), r) -
                            idx.reward_values.begin());
  };
  for (const Trace& t : sample.traces()) {
    std::vector<int> ls, rs;
    ls.reserve(t.labels.size());
    rs.reserve(t.rewards.size());
    for (Label l : t.labels) ls.push_back(label_index(l));
    for (double r : t.rewards) rs.push_back(reward_index(r));
    idx.tree.insert(ls, rs);
    idx.label_seqs.push_back(std::move(ls));
    idx.reward_seqs.push_back(std::move(rs));
  }
  return idx;
}

// Exact-label guard: matches l and nothing else within the vocabulary.
Guard exact_guard(Label l, std::size_t num_props) {
  const Label universe =
      num_props == 0 ? 0 : (Label{1} << num_props) - 1;
  return Guard{l, static_cast<Label>(universe & ~l)};
}

RewardMachine machine_from_table(
    int k, const std::vector<std::vector<std::optional<std::pair<int, double>>>>& table,
    const std::vector<Label>& alphabet, std::vector<std::string> propositions) {
  std::vector<std::vector<RmEdge>> guarded(k);
  std::vector<RmEdge> defaults;
  for (int v = 0; v < k; ++v) defaults.push_back(RmEdge{{}, v, 0.0});
  for (int v = 0; v < k; ++v) {
    for (std::size_t l = 0; l < alphabet.size(); ++l) {
      if (!table[v][l]) continue;
      const auto& [to, reward] = *table[v][l];
      guarded[v].push_back(
          RmEdge{exact_guard(alphabet[l], propositions.size()), to, reward});
    }
  }
  return RewardMachine(k, 0, std::move(propositions), std::move(guarded),
                       std::move(defaults));
}

}  // namespace

Sample::Sample(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw ValidationError("sample capacity must be positive");
}

void Sample::add(Trace trace) {
  if (trace.labels.size() != trace.rewards.size()) {
    throw ValidationError("trace label and reward sequences differ in length");
  }
  if (std::find(traces_.begin(), traces_.end(), trace) != traces_.end()) {
    return;  // X is a set
  }
  traces_.push_back(std::move(trace));
  while (traces_.size() > capacity_) traces_.pop_front();
}

bool consistent_with(const RewardMachine& rm, const Sample& sample) {
  for (const Trace& t : sample.traces()) {
    if (!rm.consistent_with(t)) return false;
  }
  return true;
}

PhiEncoding encode_phi(const Sample& sample, int k) {
  if (k < 1) throw ValidationError("machine size must be at least 1");
  IndexedSample idx = index_sample(sample);
  const int num_nodes = idx.tree.num_nodes();
  const int num_labels = static_cast<int>(idx.alphabet.size());
  const int num_rewards = static_cast<int>(idx.reward_values.size());

  PhiEncoding enc;
  enc.k = k;
  enc.alphabet = idx.alphabet;
  enc.reward_values = idx.reward_values;
  enc.num_nodes = num_nodes;
  enc.cnf.variable_count =
      num_nodes * k + num_labels * k * k + num_labels * k * num_rewards;

  // The run starts in state 0 at the root prefix.
  enc.cnf.add_unit(enc.x_var(0, 0));
  for (int v = 1; v < k; ++v) enc.cnf.add_unit(-enc.x_var(0, v));

  // Exactly one successor and exactly one output per (state, label).
  for (int v = 0; v < k; ++v) {
    for (int l = 0; l < num_labels; ++l) {
      std::vector<int> at_least;
      for (int v2 = 0; v2 < k; ++v2) at_least.push_back(enc.d_var(v, l, v2));
      enc.cnf.add_clause(at_least);
      for (int a = 0; a < k; ++a) {
        for (int b = a + 1; b < k; ++b) {
          enc.cnf.add_clause({-enc.d_var(v, l, a), -enc.d_var(v, l, b)});
        }
      }
      std::vector<int> out_least;
      for (int r = 0; r < num_rewards; ++r) out_least.push_back(enc.o_var(v, l, r));
      if (!out_least.empty()) enc.cnf.add_clause(out_least);
      for (int a = 0; a < num_rewards; ++a) {
        for (int b = a + 1; b < num_rewards; ++b) {
          enc.cnf.add_clause({-enc.o_var(v, l, a), -enc.o_var(v, l, b)});
        }
      }
    }
  }

  // Runs follow the transition choices along the prefix tree, and the output
  // at every visited (state, label) matches the observed reward.
  for (const auto& e : idx.tree.edges) {
    for (int v = 0; v < k; ++v) {
      for (int v2 = 0; v2 < k; ++v2) {
        enc.cnf.add_clause({-enc.x_var(e.parent, v), -enc.d_var(v, e.label, v2),
                            enc.x_var(e.child, v2)});
      }
      for (int r : e.reward_indices) {
        enc.cnf.add_clause({-enc.x_var(e.parent, v), enc.o_var(v, e.label, r)});
      }
    }
  }
  return enc;
}

RewardMachine decode_model(const sat::Model& model, const PhiEncoding& enc,
                           const Sample& sample,
                           std::vector<std::string> propositions) {
  const int k = enc.k;
  const int num_labels = static_cast<int>(enc.alphabet.size());
  std::vector<std::vector<std::pair<int, double>>> full(
      k, std::vector<std::pair<int, double>>(num_labels));
  for (int v = 0; v < k; ++v) {
    for (int l = 0; l < num_labels; ++l) {
      int to = -1;
      for (int v2 = 0; v2 < k; ++v2) {
        if (model.value(enc.d_var(v, l, v2))) {
          if (to != -1) throw std::logic_error("encoding breach: two successors");
          to = v2;
        }
      }
      int reward_idx = -1;
      for (int r = 0; r < static_cast<int>(enc.reward_values.size()); ++r) {
        if (model.value(enc.o_var(v, l, r))) {
          if (reward_idx != -1) {
            throw std::logic_error("encoding breach: two outputs");
          }
          reward_idx = r;
        }
      }
      if (to == -1 || reward_idx == -1) {
        throw std::logic_error("encoding breach: missing choice");
      }
      full[v][l] = {to, enc.reward_values[reward_idx]};
    }
  }

  // Keep only entries the sample actually exercises; the rest fall to the
  // per-state defaults instead of carrying arbitrary solver choices.
  auto label_index = [&](Label l) {
    return static_cast<int>(std::lower_bound(enc.alphabet.begin(),
                                             enc.alphabet.end(), l) -
                            enc.alphabet.begin());
  };
  std::vector<std::vector<std::optional<std::pair<int, double>>>> used(
      k, std::vector<std::optional<std::pair<int, double>>>(num_labels));
  for (const Trace& t : sample.traces()) {
    int v = 0;
    for (Label label : t.labels) {
      const int l = label_index(label);
      used[v][l] = full[v][l];
      v = full[v][l].first;
    }
  }
  return machine_from_table(k, used, enc.alphabet, std::move(propositions));
}

std::optional<RewardMachine> infer_minimal(
    const Sample& sample, int k_max, std::vector<std::string> propositions,
    sat::Solver* solver) {
  if (k_max < 1) throw ValidationError("k_max must be at least 1");
  // A shared prefix observed with two different rewards rules out machines
  // of every size; skip the solver entirely.
  if (index_sample(sample).tree.conflict) return std::nullopt;

  sat::CdclSolver embedded;
  sat::Solver* backend = solver ? solver : &embedded;
  for (int k = 1; k <= k_max; ++k) {
    PhiEncoding enc = encode_phi(sample, k);
    sat::SatResult result = backend->solve(enc.cnf);
    if (result) {
      return decode_model(*result, enc, sample, std::move(propositions));
    }
  }
  return std::nullopt;
}

namespace {

// Depth-first search over machine assignments, filling the transition table
// lazily along the prefix tree. Outputs are forced by the observed rewards,
// so only successor states branch.
bool search_assignment(
    const PrefixTree& tree, const std::vector<double>& reward_values, int k,
    std::size_t edge_idx, std::vector<int>& node_state,
    std::vector<std::vector<std::optional<std::pair<int, double>>>>& table) {
  if (edge_idx == tree.edges.size()) return true;
  const auto& e = tree.edges[edge_idx];
  const int vu = node_state[e.parent];
  const double reward = reward_values[*e.reward_indices.begin()];
  auto& slot = table[vu][e.label];
  if (slot) {
    if (slot->second != reward) return false;
    node_state[e.child] = slot->first;
    return search_assignment(tree, reward_values, k, edge_idx + 1, node_state,
                             table);
  }
  for (int v2 = 0; v2 < k; ++v2) {
    slot = {{v2, reward}};
    node_state[e.child] = v2;
    if (search_assignment(tree, reward_values, k, edge_idx + 1, node_state,
                          table)) {
      return true;
    }
    slot.reset();
  }
  return false;
}

}  // namespace

std::optional<RewardMachine> brute_force_infer(
    const Sample& sample, int k_max, std::vector<std::string> propositions) {
  IndexedSample idx = index_sample(sample);
  if (idx.alphabet.size() > 4 || k_max > 3 || idx.reward_values.size() > 2) {
    throw TractabilityError("input exceeds the exhaustive-search guard");
  }
  if (k_max < 1) throw ValidationError("k_max must be at least 1");
  if (idx.tree.conflict) return std::nullopt;

  for (int k = 1; k <= k_max; ++k) {
    std::vector<int> node_state(idx.tree.num_nodes(), 0);
    std::vector<std::vector<std::optional<std::pair<int, double>>>> table(
        k, std::vector<std::optional<std::pair<int, double>>>(
               idx.alphabet.size()));
    if (search_assignment(idx.tree, idx.reward_values, k, 0, node_state,
                          table)) {
      return machine_from_table(k, table, idx.alphabet, propositions);
    }
  }
  return std::nullopt;
}

Sample parse_sample(const std::string& text,
                    std::vector<std::string>* propositions_out,
                    std::size_t capacity) {
  nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) {
    throw ParseError("sample file must be a JSON array of traces");
  }
  std::set<std::string> names;
  for (const auto& t : doc) {
    for (const auto& label : t.at("labels")) {
      for (const auto& n : label) names.insert(n.get<std::string>());
    }
  }
  std::vector<std::string> props(names.begin(), names.end());
  Sample sample(capacity);
  for (const auto& t : doc) {
    Trace trace;
    for (const auto& label : t.at("labels")) {
      trace.labels.push_back(
          label_from_names(label.get<std::vector<std::string>>(), props));
    }
    trace.rewards = t.at("rewards").get<std::vector<double>>();
    sample.add(std::move(trace));
  }
  if (propositions_out) *propositions_out = std::move(props);
  return sample;
}

}  // namespace jirp
