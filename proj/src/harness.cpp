#include "jirp/harness.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "jirp/mdp.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace jirp::harness {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write file: " + path.string());
  out << content;
}

// Nearest-rank percentile of an ascending-sorted vector.
template <typename T>
T nearest_rank(const std::vector<T>& sorted, double pct) {
  const std::size_t n = sorted.size();
  std::size_t rank = static_cast<std::size_t>(std::ceil(pct / 100.0 * n));
  if (rank < 1) rank = 1;
  if (rank > n) rank = n;
  return sorted[rank - 1];
}

std::string run_stem(const std::string& layout_path) {
  return fs::path(layout_path).stem().string();
}

}  // namespace

ExperimentSpec ExperimentSpec::from_json_file(const std::string& path) {
  return from_json(read_file(path), fs::path(path).parent_path().string());
}

ExperimentSpec ExperimentSpec::from_json(const std::string& text,
                                         const std::string& base_dir) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ParseError("malformed experiment spec");
  ExperimentSpec spec;
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    if (path.is_relative() && !base_dir.empty()) path = fs::path(base_dir) / path;
    return path.string();
  };
  try {
    for (const auto& l : doc.at("layouts")) {
      spec.layout_paths.push_back(resolve(l.get<std::string>()));
    }
    spec.rm_path = resolve(doc.at("rm").get<std::string>());
    spec.seeds = doc.at("seeds").get<std::vector<std::uint64_t>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("experiment spec: ") + e.what());
  }
  if (doc.contains("train")) {
    spec.train = TrainConfig::from_json(doc.at("train").dump());
  }
  spec.output_dir = doc.value("output_dir", "out");
  if (fs::path(spec.output_dir).is_relative() && !base_dir.empty()) {
    spec.output_dir = (fs::path(base_dir) / spec.output_dir).string();
  }
  return spec;
}

void ExperimentSpec::validate() const {
  if (layout_paths.empty()) throw ValidationError("no layouts given");
  if (seeds.empty()) throw ValidationError("no seeds given");
  std::vector<std::uint64_t> sorted = seeds;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ValidationError("seeds must be distinct");
  }
  for (const auto& p : layout_paths) {
    if (!fs::exists(p)) throw ValidationError("layout does not exist: " + p);
  }
  if (!fs::exists(rm_path)) {
    throw ValidationError("machine document does not exist: " + rm_path);
  }
  train.validate();
}

BatchResult run_experiment(const ExperimentSpec& spec, int jobs) {
  spec.validate();
  if (jobs < 1) jobs = 1;

  fs::create_directories(spec.output_dir);
  const fs::path runs_dir = fs::path(spec.output_dir) / "runs";
  fs::create_directories(runs_dir);

  struct Task {
    std::string layout_path;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& layout : spec.layout_paths) {
    for (auto seed : spec.seeds) tasks.push_back({layout, seed});
  }

  BatchResult batch;
  batch.output_dir = spec.output_dir;
  batch.runs.resize(tasks.size());

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs) if (jobs > 1)
#endif
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(tasks.size());
       ++i) {
    const Task& task = tasks[i];
    RunRecord& record = batch.runs[i];
    record.layout_path = task.layout_path;
    record.seed = task.seed;
    record.run_id = run_stem(task.layout_path) + ":" + std::to_string(task.seed);
    try {
      const LabeledMdp mdp = LabeledMdp::load_layout(read_file(task.layout_path));
      const RewardMachine truth =
          parse_rm(read_file(spec.rm_path)).rebind(mdp.propositions());
      TrainConfig config = spec.train;
      config.seed = task.seed;
      record.result = train(config, mdp, truth);
      write_file(runs_dir / (run_stem(task.layout_path) + "_" +
                             std::to_string(task.seed) + ".json"),
                 record.result->to_json_string(mdp));
    } catch (const std::exception& e) {
      record.failed = true;
      record.error = e.what();
    }
  }

  write_file(fs::path(spec.output_dir) / "eval.csv", eval_csv(batch.runs));
  write_file(fs::path(spec.output_dir) / "belief.csv", belief_csv(batch.runs));

  std::vector<std::vector<std::pair<long, double>>> tables;
  for (const auto& r : batch.runs) {
    if (!r.failed && r.result) tables.push_back(r.result->eval_curve);
  }
  if (!tables.empty()) {
    write_file(fs::path(spec.output_dir) / "percentiles.csv",
               percentile_csv(percentile_curves(tables)));
  }
  write_file(fs::path(spec.output_dir) / "summary.csv",
             summary_csv(summarize(batch.runs, spec.train.total_steps)));

  // Timestamps live here and nowhere else, so result artifacts stay
  // byte-reproducible.
  const auto now = std::chrono::system_clock::now().time_since_epoch();
  json meta = {{"finished_unix_ms",
                std::chrono::duration_cast<std::chrono::milliseconds>(now)
                    .count()},
               {"jobs", jobs}};
  write_file(fs::path(spec.output_dir) / "metadata.json", meta.dump(2));
  return batch;
}

std::vector<PercentileRow> percentile_curves(
    const std::vector<std::vector<std::pair<long, double>>>& eval_tables) {
  if (eval_tables.empty()) throw ValidationError("no eval tables");
  const auto& grid = eval_tables.front();
  for (const auto& t : eval_tables) {
    if (t.size() != grid.size()) {
      throw ValidationError("eval tables use different grids");
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i].first != grid[i].first) {
        throw ValidationError("eval tables use different grids");
      }
    }
  }
  std::vector<PercentileRow> rows;
  rows.reserve(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> rewards;
    rewards.reserve(eval_tables.size());
    for (const auto& t : eval_tables) rewards.push_back(t[i].second);
    std::sort(rewards.begin(), rewards.end());
    rows.push_back({grid[i].first, nearest_rank(rewards, 10.0),
                    nearest_rank(rewards, 25.0), nearest_rank(rewards, 50.0),
                    nearest_rank(rewards, 75.0), nearest_rank(rewards, 90.0)});
  }
  return rows;
}

Summary summarize(const std::vector<RunRecord>& runs, long total_steps) {
  if (runs.empty()) throw ValidationError("no runs to summarize");
  Summary s;
  s.total_runs = static_cast<int>(runs.size());
  std::vector<long> convergence;
  long updates = 0;
  int update_runs = 0;
  for (const auto& r : runs) {
    if (r.failed || !r.result) {
      ++s.failed_runs;
      convergence.push_back(total_steps);
      continue;
    }
    convergence.push_back(r.result->converged_step.value_or(total_steps));
    const bool inferred = std::any_of(
        r.result->inference_log.begin(), r.result->inference_log.end(),
        [](const InferenceEvent& e) { return e.k.has_value(); });
    if (inferred) ++s.inferred_runs;
    updates += static_cast<long>(r.result->belief_update_log.size());
    ++update_runs;
  }
  std::sort(convergence.begin(), convergence.end());
  s.lp = nearest_rank(convergence, 25.0);
  s.mp = nearest_rank(convergence, 50.0);
  s.up = nearest_rank(convergence, 75.0);
  s.mean_belief_updates =
      update_runs == 0 ? 0.0 : static_cast<double>(updates) / update_runs;
  return s;
}

std::string eval_csv(const std::vector<RunRecord>& runs) {
  std::ostringstream out;
  out << "run_id,step,reward\n";
  for (const auto& r : runs) {
    if (r.failed || !r.result) continue;
    for (const auto& [step, reward] : r.result->eval_curve) {
      out << r.run_id << ',' << step << ',' << format_double(reward) << '\n';
    }
  }
  return out.str();
}

std::string belief_csv(const std::vector<RunRecord>& runs) {
  std::ostringstream out;
  out << "run_id,episode,step,jsd\n";
  for (const auto& r : runs) {
    if (r.failed || !r.result) continue;
    for (const auto& e : r.result->belief_update_log) {
      out << r.run_id << ',' << e.episode << ',' << e.global_step << ','
          << format_double(e.jsd_value) << '\n';
    }
  }
  return out.str();
}

std::string percentile_csv(const std::vector<PercentileRow>& rows) {
  std::ostringstream out;
  out << "step,p10,p25,p50,p75,p90\n";
  for (const auto& r : rows) {
    out << r.step << ',' << format_double(r.p10) << ',' << format_double(r.p25)
        << ',' << format_double(r.p50) << ',' << format_double(r.p75) << ','
        << format_double(r.p90) << '\n';
  }
  return out.str();
}

std::string summary_csv(const Summary& s) {
  std::ostringstream out;
  out << "lp,mp,up,rs,total_runs,failed_runs,bu\n";
  out << s.lp << ',' << s.mp << ',' << s.up << ',' << s.inferred_runs << '/'
      << s.total_runs << ',' << s.total_runs << ',' << s.failed_runs << ','
      << format_double(s.mean_belief_updates) << '\n';
  return out.str();
}

}  // namespace jirp::harness
