#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "modflow/core.hpp"
#include "modflow/predictor.hpp"

namespace modflow {

struct EvalCase {
  std::vector<State> observation;   // O_p states, oldest to newest
  std::vector<State> ground_truth;  // up to T_p future states
  double start_time = 0.0;          // epoch s of the last observed sample
};

struct MetricRow {
  double horizon = 0.0;  // s
  double ade_mean = 0.0, ade_std = 0.0;
  double fde_mean = 0.0, fde_std = 0.0;
  std::int64_t n_cases = 0;
};

/// Mean Euclidean position error over the first min(len) steps.
double ade(std::span<const State> pred, std::span<const State> gt);

/// Euclidean position error at the last compared step.
double fde(std::span<const State> pred, std::span<const State> gt);

enum class Selection { kMostLikely, kMeanOverK };

struct EvalOptions {
  Selection selection = Selection::kMostLikely;
  // Strict mode (default) ranks full trajectories; when true, fitness is
  // re-accumulated within each horizon before picking the most likely.
  bool per_horizon_rerank = false;
  int workers = 1;
  std::uint64_t seed = 0;
};

struct CaseRecord {
  std::int64_t case_index = 0;
  double horizon = 0.0;
  double ade = 0.0;
  double fde = 0.0;
  double runtime_ms = 0.0;  // rollout time for the case (all horizons share it)
};

struct EvalReport {
  std::vector<MetricRow> rows;
  std::vector<CaseRecord> per_case;
  std::int64_t skipped_cases = 0;
  double mean_runtime_ms = 0.0;  // per case
};

/// Runs ranked rollouts once per case at the maximum horizon and scores
/// every requested horizon from truncations of those rollouts.
EvalReport evaluate(std::span<const EvalCase> cases, const MoDSampler& sampler,
                    const PredictorParams& params,
                    std::span<const double> horizons,
                    const EvalOptions& options);

/// Splits 1 Hz-style trajectories into (first O_p samples observe, next up
/// to T_p samples ground truth) cases; trajectories too short to yield at
/// least one ground-truth step are dropped.
std::vector<EvalCase> make_cases(std::span<const Trajectory> trajs, int O_p,
                                 int T_p);

}  // namespace modflow
