#pragma once

#include <optional>
#include <string>
#include <vector>

#include "jirp/runner.hpp"

namespace jirp::harness {

/// A batch of independent training runs: every layout is trained once per
/// seed. Runs are embarrassingly parallel; artifacts are partitioned per
/// run and aggregated afterwards, so the job count never changes results.
struct ExperimentSpec {
  std::vector<std::string> layout_paths;
  std::string rm_path;  // ground-truth machine
  TrainConfig train;    // per-run config; seed comes from `seeds`
  std::vector<std::uint64_t> seeds;
  std::string output_dir;

  static ExperimentSpec from_json_file(const std::string& path);
  static ExperimentSpec from_json(const std::string& text,
                                  const std::string& base_dir);
  void validate() const;
};

struct RunRecord {
  std::string run_id;  // "<layout-stem>:<seed>"
  std::string layout_path;
  std::uint64_t seed = 0;
  bool failed = false;
  std::string error;
  std::optional<TrainResult> result;
};

struct BatchResult {
  std::vector<RunRecord> runs;
  std::string output_dir;
};

/// Executes every (layout, seed) run, writes per-run result JSON, the
/// combined eval and belief CSVs, the percentile table and the summary.
/// A failing run is recorded and the batch continues.
BatchResult run_experiment(const ExperimentSpec& spec, int jobs = 1);

struct PercentileRow {
  long step;
  double p10, p25, p50, p75, p90;
};

/// Nearest-rank percentiles of the eval rewards across runs, per step.
/// All runs must share the same eval grid.
std::vector<PercentileRow> percentile_curves(
    const std::vector<std::vector<std::pair<long, double>>>& eval_tables);

struct Summary {
  long lp = 0, mp = 0, up = 0;  // 25th/50th/75th percentile convergence step
  int inferred_runs = 0;        // runs with at least one successful inference
  int total_runs = 0;
  int failed_runs = 0;
  double mean_belief_updates = 0.0;
};

/// Convergence-step percentiles (non-converged runs count as total_steps),
/// inference success ratio, and mean belief-update count.
Summary summarize(const std::vector<RunRecord>& runs, long total_steps);

std::string eval_csv(const std::vector<RunRecord>& runs);
std::string belief_csv(const std::vector<RunRecord>& runs);
std::string percentile_csv(const std::vector<PercentileRow>& rows);
std::string summary_csv(const Summary& s);

}  // namespace jirp::harness
