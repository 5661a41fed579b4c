#include "jirp/sat.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace jirp::sat {

void CnfFormula::add_clause(std::vector<int> lits) {
  for (int l : lits) {
    if (l == 0 || std::abs(l) > variable_count) {
      throw ValidationError("literal outside the declared variable range");
    }
  }
  clauses.push_back(std::move(lits));
}

void CnfFormula::validate() const {
  if (variable_count < 0) throw ValidationError("negative variable count");
  for (const auto& c : clauses) {
    for (int l : c) {
      if (l == 0 || std::abs(l) > variable_count) {
        throw ValidationError("literal outside the declared variable range");
      }
    }
  }
}

namespace {

// Internal literal encoding: variable v (0-based) gives literals 2v (positive)
// and 2v+1 (negative).
using Lit = int;
inline Lit mk_lit(int var0, bool neg) { return 2 * var0 + (neg ? 1 : 0); }
inline Lit neg_lit(Lit l) { return l ^ 1; }
inline int lit_var(Lit l) { return l >> 1; }
inline bool lit_sign(Lit l) { return l & 1; }  // true = negated

enum : std::uint8_t { kUndef = 2, kTrue = 1, kFalse = 0 };

struct Clause {
  std::vector<Lit> lits;
};

// Max-heap over variable activities with index positions, for decision
// variable selection.
class VarHeap {
 public:
  explicit VarHeap(const std::vector<double>& act) : act_(act) {}

  bool empty() const { return heap_.empty(); }
  bool contains(int v) const {
    return v < static_cast<int>(pos_.size()) && pos_[v] >= 0;
  }

  void grow(int n) { pos_.resize(n, -1); }

  void insert(int v) {
    if (contains(v)) return;
    pos_[v] = static_cast<int>(heap_.size());
    heap_.push_back(v);
    sift_up(pos_[v]);
  }

  int pop() {
    int top = heap_[0];
    heap_[0] = heap_.back();
    pos_[heap_[0]] = 0;
    heap_.pop_back();
    pos_[top] = -1;
    if (!heap_.empty()) sift_down(0);
    return top;
  }

  void bumped(int v) {
    if (contains(v)) sift_up(pos_[v]);
  }

 private:
  bool better(int a, int b) const { return act_[a] > act_[b]; }

  void sift_up(int i) {
    int v = heap_[i];
    while (i > 0) {
      int parent = (i - 1) / 2;
      if (!better(v, heap_[parent])) break;
      heap_[i] = heap_[parent];
      pos_[heap_[i]] = i;
      i = parent;
    }
    heap_[i] = v;
    pos_[v] = i;
  }

  void sift_down(int i) {
    int v = heap_[i];
    const int n = static_cast<int>(heap_.size());
    while (true) {
      int child = 2 * i + 1;
      if (child >= n) break;
      if (child + 1 < n && better(heap_[child + 1], heap_[child])) ++child;
      if (!better(heap_[child], v)) break;
      heap_[i] = heap_[child];
      pos_[heap_[i]] = i;
      i = child;
    }
    heap_[i] = v;
    pos_[v] = i;
  }

  const std::vector<double>& act_;
  std::vector<int> heap_;
  std::vector<int> pos_;
};

// Luby restart sequence (unit 1, scaled by the caller).
double luby(int i) {
  int k = 1;
  while ((1 << k) - 1 < i + 1) ++k;
  while ((1 << k) - 1 != i + 1) {
    --k;
    i -= (1 << k) - 1;
  }
  return std::pow(2.0, k - 1);
}

class CdclImpl {
 public:
  explicit CdclImpl(const CnfFormula& f) : num_vars_(f.variable_count) {
    assigns_.assign(num_vars_, kUndef);
    polarity_.assign(num_vars_, true);  // saved phase; start negative
    activity_.assign(num_vars_, 0.0);
    level_.assign(num_vars_, 0);
    reason_.assign(num_vars_, -1);
    seen_.assign(num_vars_, 0);
    watches_.assign(2 * static_cast<std::size_t>(num_vars_), {});
    heap_ = std::make_unique<VarHeap>(activity_);
    heap_->grow(num_vars_);
    for (int v = 0; v < num_vars_; ++v) heap_->insert(v);

    ok_ = true;
    for (const auto& raw : f.clauses) {
      if (!add_problem_clause(raw)) {
        ok_ = false;
        break;
      }
    }
  }

  SatResult solve() {
    if (!ok_) return std::nullopt;
    if (propagate() != -1) return std::nullopt;

    int restarts = 0;
    long conflict_budget = static_cast<long>(luby(restarts) * 256);
    long conflicts_here = 0;

    while (true) {
      const int confl = propagate();
      if (confl != -1) {
        ++conflicts_here;
        if (decision_level() == 0) return std::nullopt;
        std::vector<Lit> learnt;
        int bt_level;
        analyze(confl, learnt, bt_level);
        cancel_until(bt_level);
        attach_learnt(std::move(learnt));
        decay_activities();
        if (conflicts_here >= conflict_budget) {
          conflicts_here = 0;
          conflict_budget = static_cast<long>(luby(++restarts) * 256);
          cancel_until(0);
        }
        continue;
      }
      if (static_cast<int>(trail_.size()) == num_vars_) {
        Model m;
        m.values.assign(num_vars_ + 1, 0);
        for (int v = 0; v < num_vars_; ++v) {
          m.values[v + 1] = assigns_[v] == kTrue;
        }
        return m;
      }
      // Decide: highest-activity unassigned variable, saved phase.
      int v = -1;
      while (!heap_->empty()) {
        int cand = heap_->pop();
        if (assigns_[cand] == kUndef) {
          v = cand;
          break;
        }
      }
      trail_lim_.push_back(static_cast<int>(trail_.size()));
      enqueue(mk_lit(v, polarity_[v]), -1);
    }
  }

 private:
  std::uint8_t value(Lit l) const {
    std::uint8_t a = assigns_[lit_var(l)];
    if (a == kUndef) return kUndef;
    return (a == kTrue) != lit_sign(l) ? kTrue : kFalse;
  }

  int decision_level() const { return static_cast<int>(trail_lim_.size()); }

  bool add_problem_clause(const std::vector<int>& raw) {
    std::vector<Lit> lits;
    lits.reserve(raw.size());
    for (int dl : raw) {
      lits.push_back(mk_lit(std::abs(dl) - 1, dl < 0));
    }
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    for (std::size_t i = 0; i + 1 < lits.size(); ++i) {
      if (lits[i + 1] == neg_lit(lits[i])) return true;  // tautology
    }
    std::erase_if(lits, [&](Lit l) { return value(l) == kFalse; });
    if (std::any_of(lits.begin(), lits.end(),
                    [&](Lit l) { return value(l) == kTrue; })) {
      return true;  // already satisfied at level 0
    }
    if (lits.empty()) return false;
    if (lits.size() == 1) return enqueue(lits[0], -1);
    attach(std::move(lits));
    return true;
  }

  int attach(std::vector<Lit> lits) {
    const int ci = static_cast<int>(clauses_.size());
    watches_[lits[0]].push_back(ci);
    watches_[lits[1]].push_back(ci);
    clauses_.push_back(Clause{std::move(lits)});
    return ci;
  }

  void attach_learnt(std::vector<Lit> learnt) {
    if (learnt.size() == 1) {
      enqueue(learnt[0], -1);
      return;
    }
    // Position 1 must hold the highest-level remaining literal so the watch
    // wakes up in time after backtracking.
    int best = 1;
    for (std::size_t i = 2; i < learnt.size(); ++i) {
      if (level_[lit_var(learnt[i])] > level_[lit_var(learnt[best])]) {
        best = static_cast<int>(i);
      }
    }
    std::swap(learnt[1], learnt[best]);
    const Lit asserting = learnt[0];
    const int ci = attach(std::move(learnt));
    enqueue(asserting, ci);
  }

  bool enqueue(Lit l, int reason) {
    if (value(l) != kUndef) return value(l) == kTrue;
    const int v = lit_var(l);
    assigns_[v] = lit_sign(l) ? kFalse : kTrue;
    polarity_[v] = lit_sign(l);
    level_[v] = decision_level();
    reason_[v] = reason;
    trail_.push_back(l);
    return true;
  }

  // Returns the index of a conflicting clause, or -1.
  int propagate() {
    while (qhead_ < trail_.size()) {
      const Lit p = trail_[qhead_++];
      const Lit false_lit = neg_lit(p);  // literals watching this are falsified
      auto& watch_list = watches_[false_lit];
      std::size_t keep = 0;
      for (std::size_t i = 0; i < watch_list.size(); ++i) {
        const int ci = watch_list[i];
        Clause& c = clauses_[ci];
        if (c.lits[0] == false_lit) std::swap(c.lits[0], c.lits[1]);
        if (value(c.lits[0]) == kTrue) {
          watch_list[keep++] = ci;
          continue;
        }
        bool moved = false;
        for (std::size_t j = 2; j < c.lits.size(); ++j) {
          if (value(c.lits[j]) != kFalse) {
            std::swap(c.lits[1], c.lits[j]);
            watches_[c.lits[1]].push_back(ci);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        // Unit or conflicting.
        watch_list[keep++] = ci;
        if (value(c.lits[0]) == kFalse) {
          for (std::size_t j = i + 1; j < watch_list.size(); ++j) {
            watch_list[keep++] = watch_list[j];
          }
          watch_list.resize(keep);
          qhead_ = trail_.size();
          return ci;
        }
        enqueue(c.lits[0], ci);
      }
      watch_list.resize(keep);
    }
    return -1;
  }

  void bump(int v) {
    activity_[v] += var_inc_;
    if (activity_[v] > 1e100) {
      for (auto& a : activity_) a *= 1e-100;
      var_inc_ *= 1e-100;
    }
    heap_->bumped(v);
  }

  void decay_activities() { var_inc_ /= 0.95; }

  // First-UIP conflict analysis.
  void analyze(int confl, std::vector<Lit>& learnt, int& bt_level) {
    learnt.clear();
    learnt.push_back(0);  // slot for the asserting literal
    int path_count = 0;
    Lit p = -1;
    int index = static_cast<int>(trail_.size()) - 1;

    do {
      const Clause& c = clauses_[confl];
      for (Lit q : c.lits) {
        if (p != -1 && q == p) continue;
        const int v = lit_var(q);
        if (!seen_[v] && level_[v] > 0) {
          seen_[v] = 1;
          bump(v);
          if (level_[v] >= decision_level()) {
            ++path_count;
          } else {
            learnt.push_back(q);
          }
        }
      }
      while (!seen_[lit_var(trail_[index])]) --index;
      p = trail_[index--];
      confl = reason_[lit_var(p)];
      seen_[lit_var(p)] = 0;
      --path_count;
    } while (path_count > 0);
    learnt[0] = neg_lit(p);

    bt_level = 0;
    for (std::size_t i = 1; i < learnt.size(); ++i) {
      bt_level = std::max(bt_level, level_[lit_var(learnt[i])]);
    }
    for (std::size_t i = 1; i < learnt.size(); ++i) {
      seen_[lit_var(learnt[i])] = 0;
    }
  }

  void cancel_until(int target_level) {
    if (decision_level() <= target_level) return;
    const int bound = trail_lim_[target_level];
    for (int i = static_cast<int>(trail_.size()) - 1; i >= bound; --i) {
      const int v = lit_var(trail_[i]);
      assigns_[v] = kUndef;
      reason_[v] = -1;
      heap_->insert(v);
    }
    trail_.resize(bound);
    qhead_ = bound;
    trail_lim_.resize(target_level);
  }

  int num_vars_;
  bool ok_ = true;
  std::vector<Clause> clauses_;
  std::vector<std::vector<int>> watches_;  // per literal
  std::vector<std::uint8_t> assigns_;
  std::vector<bool> polarity_;
  std::vector<double> activity_;
  std::vector<int> level_;
  std::vector<int> reason_;
  std::vector<std::uint8_t> seen_;
  std::vector<Lit> trail_;
  std::vector<int> trail_lim_;
  std::size_t qhead_ = 0;
  double var_inc_ = 1.0;
  std::unique_ptr<VarHeap> heap_;
};

}  // namespace

SatResult CdclSolver::solve(const CnfFormula& f) {
  f.validate();
  if (f.variable_count == 0) {
    if (!f.clauses.empty()) return std::nullopt;
    Model m;
    m.values.assign(1, 0);
    return m;
  }
  CdclImpl impl(f);
  return impl.solve();
}

SatResult sat_solve(const CnfFormula& f) {
  CdclSolver solver;
  return solver.solve(f);
}

std::string to_dimacs(const CnfFormula& f) {
  std::ostringstream out;
  out << "p cnf " << f.variable_count << ' ' << f.clauses.size() << '\n';
  for (const auto& c : f.clauses) {
    for (int l : c) out << l << ' ';
    out << "0\n";
  }
  return out.str();
}

CnfFormula from_dimacs(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  CnfFormula f;
  bool have_header = false;
  long declared_clauses = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == 'c') continue;
    if (line[0] == 'p') {
      std::istringstream header(line);
      std::string p, cnf;
      header >> p >> cnf >> f.variable_count >> declared_clauses;
      if (cnf != "cnf" || header.fail()) {
        throw ParseError("malformed DIMACS header");
      }
      have_header = true;
      continue;
    }
    if (!have_header) throw ParseError("DIMACS clause before header");
    std::istringstream body(line);
    int lit;
    std::vector<int> clause;
    while (body >> lit) {
      if (lit == 0) {
        f.add_clause(std::move(clause));
        clause = {};
      } else {
        clause.push_back(lit);
      }
    }
    if (!clause.empty()) throw ParseError("DIMACS clause missing terminator");
  }
  if (!have_header) throw ParseError("missing DIMACS header");
  if (static_cast<long>(f.clauses.size()) != declared_clauses) {
    throw ParseError("DIMACS clause count mismatch");
  }
  return f;
}

ExternalSolver::ExternalSolver(std::string command)
    : command_(std::move(command)) {}

SatResult ExternalSolver::solve(const CnfFormula& f) {
  namespace fs = std::filesystem;
  static std::atomic<unsigned> counter{0};
  const fs::path cnf_path =
      fs::temp_directory_path() /
      ("jirp_sat_" + std::to_string(::getpid()) + "_" +
       std::to_string(counter.fetch_add(1)) + ".cnf");
  {
    std::ofstream out(cnf_path);
    if (!out) throw BackendError("cannot write solver input file");
    out << to_dimacs(f);
  }
  const std::string cmd = command_ + " " + cnf_path.string() + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (!pipe) {
    fs::remove(cnf_path);
    throw BackendError("cannot launch external solver");
  }
  std::string output;
  char buf[4096];
  std::size_t got;
  while ((got = ::fread(buf, 1, sizeof(buf), pipe)) > 0) {
    output.append(buf, got);
  }
  ::pclose(pipe);
  fs::remove(cnf_path);

  // SAT-competition output: an "s" status line, then "v" value lines.
  std::istringstream in(output);
  std::string line;
  std::optional<bool> sat;
  std::vector<int> lits;
  while (std::getline(in, line)) {
    if (line.rfind("s ", 0) == 0) {
      if (line.find("UNSATISFIABLE") != std::string::npos) {
        sat = false;
      } else if (line.find("SATISFIABLE") != std::string::npos) {
        sat = true;
      }
    } else if (line.rfind("v", 0) == 0 && (line.size() == 1 || line[1] == ' ')) {
      std::istringstream vals(line.substr(1));
      int l;
      while (vals >> l) {
        if (l != 0) lits.push_back(l);
      }
    }
  }
  if (!sat) throw BackendError("external solver produced no verdict");
  if (!*sat) return std::nullopt;
  Model m;
  m.values.assign(f.variable_count + 1, 0);
  for (int l : lits) {
    const int v = std::abs(l);
    if (v <= f.variable_count) m.values[v] = l > 0;
  }
  return m;
}

}  // namespace jirp::sat
