#include "jirp/mdp.hpp"

#include <cmath>
#include <map>

#include <json.hpp>

namespace jirp {

namespace {

constexpr double kRowSumTolerance = 1e-9;

using nlohmann::json;

json parse_json(const std::string& text, const char* what) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    throw ParseError(std::string("malformed ") + what + " document");
  }
  return doc;
}

}  // namespace

LabeledMdp::LabeledMdp(int num_states, int initial_state, int num_actions,
                       std::vector<std::string> propositions,
                       std::vector<Label> ground_labels,
                       std::vector<Successors> transitions, double discount,
                       int grid_width, int grid_height)
    : num_states_(num_states),
      initial_state_(initial_state),
      num_actions_(num_actions),
      propositions_(std::move(propositions)),
      ground_labels_(std::move(ground_labels)),
      transitions_(std::move(transitions)),
      discount_(discount),
      grid_width_(grid_width),
      grid_height_(grid_height) {
  if (num_states_ <= 0 || num_actions_ <= 0) {
    throw ValidationError("state and action spaces must be nonempty");
  }
  if (initial_state_ < 0 || initial_state_ >= num_states_) {
    throw ValidationError("initial state out of range");
  }
  if (discount_ < 0.0 || discount_ >= 1.0) {
    throw ValidationError("discount must lie in [0, 1)");
  }
  if (propositions_.size() > static_cast<std::size_t>(kMaxPropositions)) {
    throw ValidationError("too many propositions");
  }
  if (ground_labels_.size() != static_cast<std::size_t>(num_states_)) {
    throw ValidationError("ground labels must cover every state");
  }
  const Label universe =
      propositions_.empty() ? 0 : (Label{1} << propositions_.size()) - 1;
  for (Label l : ground_labels_) {
    if ((l & ~universe) != 0) {
      throw ValidationError("ground label uses an undeclared proposition");
    }
  }
  if (transitions_.size() !=
      static_cast<std::size_t>(num_states_) * num_actions_) {
    throw ValidationError("transition table must cover every (state, action)");
  }
  for (const auto& row : transitions_) {
    if (row.empty()) throw ValidationError("empty transition row");
    double sum = 0.0;
    for (const auto& [next, p] : row) {
      if (next < 0 || next >= num_states_) {
        throw ValidationError("transition successor out of range");
      }
      if (p < 0.0) throw ValidationError("negative transition probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw ValidationError("transition row does not sum to 1");
    }
  }
}

LabeledMdp LabeledMdp::load_layout(const std::string& text) {
  json doc = parse_json(text, "layout");
  if (!doc.is_object()) throw ParseError("layout document must be an object");

  int width, height;
  double discount;
  std::vector<std::string> propositions;
  try {
    width = doc.at("width").get<int>();
    height = doc.at("height").get<int>();
    discount = doc.at("discount").get<double>();
    propositions = doc.at("propositions").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("layout: ") + e.what());
  }
  if (width <= 0 || height <= 0) throw ParseError("layout: empty grid");
  if (!doc.contains("initial")) {
    throw ValidationError("layout: initial cell missing");
  }

  const int num_states = width * height;
  auto cell_index = [&](int row, int col) { return row * width + col; };

  int init_row, init_col;
  try {
    const auto& init = doc.at("initial");
    init_row = init.at(0).get<int>();
    init_col = init.at(1).get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("layout initial: ") + e.what());
  }
  if (init_row < 0 || init_row >= height || init_col < 0 || init_col >= width) {
    throw ValidationError("layout: initial cell missing from grid");
  }

  std::vector<Label> labels(num_states, 0);
  if (doc.contains("cells")) {
    std::vector<bool> seen(num_states, false);
    for (const auto& cell : doc.at("cells")) {
      int row, col;
      std::vector<std::string> names;
      try {
        row = cell.at(0).get<int>();
        col = cell.at(1).get<int>();
        names = cell.at(2).get<std::vector<std::string>>();
      } catch (const json::exception& e) {
        throw ParseError(std::string("layout cell: ") + e.what());
      }
      if (row < 0 || row >= height || col < 0 || col >= width) {
        throw ValidationError("layout cell out of bounds");
      }
      if (seen[cell_index(row, col)]) {
        throw ValidationError("duplicate layout cell entry");
      }
      seen[cell_index(row, col)] = true;
      labels[cell_index(row, col)] = label_from_names(names, propositions);
    }
  }

  double slip = 0.0;
  if (doc.contains("slip")) slip = doc.at("slip").get<double>();
  if (slip < 0.0 || slip > 1.0) {
    throw ValidationError("layout: slip must lie in [0, 1]");
  }

  // Clamped grid moves: up, down, left, right.
  auto move = [&](int s, int a) {
    int row = s / width, col = s % width;
    switch (a) {
      case kUp: row = std::max(row - 1, 0); break;
      case kDown: row = std::min(row + 1, height - 1); break;
      case kLeft: col = std::max(col - 1, 0); break;
      case kRight: col = std::min(col + 1, width - 1); break;
    }
    return cell_index(row, col);
  };
  // Residual slip probability goes to the two lateral moves.
  auto lateral = [](int a) {
    return a == kUp || a == kDown ? std::pair<int, int>{kLeft, kRight}
                                  : std::pair<int, int>{kUp, kDown};
  };

  std::vector<Successors> transitions;
  transitions.reserve(static_cast<std::size_t>(num_states) * 4);
  for (int s = 0; s < num_states; ++s) {
    for (int a = 0; a < 4; ++a) {
      std::map<int, double> mass;
      mass[move(s, a)] += 1.0 - slip;
      if (slip > 0.0) {
        auto [l1, l2] = lateral(a);
        mass[move(s, l1)] += slip / 2.0;
        mass[move(s, l2)] += slip / 2.0;
      }
      transitions.emplace_back(mass.begin(), mass.end());
    }
  }

  return LabeledMdp(num_states, cell_index(init_row, init_col), 4,
                    std::move(propositions), std::move(labels),
                    std::move(transitions), discount, width, height);
}

void LabeledMdp::check_state(int s) const {
  if (s < 0 || s >= num_states_) throw DomainError("unknown state");
}

Label LabeledMdp::ground_label(int s) const {
  check_state(s);
  return ground_labels_[s];
}

const LabeledMdp::Successors& LabeledMdp::successors(int s, int a) const {
  check_state(s);
  if (a < 0 || a >= num_actions_) throw DomainError("unknown action");
  return transitions_[static_cast<std::size_t>(s) * num_actions_ + a];
}

int LabeledMdp::step(int s, int a, Rng& rng) const {
  const Successors& row = successors(s, a);
  if (row.size() == 1) return row.front().first;
  double u = uniform01(rng);
  double acc = 0.0;
  for (const auto& [next, p] : row) {
    acc += p;
    if (u < acc) return next;
  }
  return row.back().first;
}

}  // namespace jirp
