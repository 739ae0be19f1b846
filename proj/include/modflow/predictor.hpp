#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "modflow/cliff_map.hpp"
#include "modflow/core.hpp"
#include "modflow/rng.hpp"
#include "modflow/stef_map.hpp"

namespace modflow {

enum class StopPolicy { kTruncate, kCvmContinue };

struct PredictorParams {
  double beta = 1.0;  // kernel width
  double r_s = 1.0;   // sampling radius, m
  double dt = 1.0;    // s
  int T_p = 60;       // prediction steps
  int k = 5;          // rollouts
  StopPolicy stop_policy = StopPolicy::kTruncate;
  double obs_sigma = 1.5;
  bool normalize_obs_weights = true;
  // When false (default), time-conditioned samplers see the rollout start
  // time at every step; when true the wall clock advances with the rollout.
  bool advance_time = false;
};

struct PredictionResult {
  std::vector<State> states;            // s_{t0+1}..., length <= T_p
  std::vector<double> step_log_fitness; // one entry per executed step
  double log_fitness = 0.0;
  bool stopped_early = false;
  int stop_step = 0;  // 1-based step at which no dynamics data was found
};

/// The only map-dependent piece of the rollout: returns a velocity sample
/// at (x, y, t) or nothing when no dynamics data is within reach.
using MoDSampler = std::function<std::optional<VelocitySample>(
    double x, double y, double t, double prev_speed, Rng& rng)>;

MoDSampler make_cliff_sampler(const CLiFFMap& map, double r_s);
MoDSampler make_tc_cliff_sampler(const TCCLiFFMap& map, double r_s);
MoDSampler make_stef_sampler(const STeFMap& map, double r_s);

/// Pulls the previous velocity toward the sampled one, scaled by a
/// Gaussian kernel of the (wrapped) deviation; speed clamped at 0.
Velocity bias_velocity(const Velocity& prev, const Velocity& sampled,
                       double beta);

/// One stochastic rollout: constant-velocity propagation biased each step
/// by a velocity sampled from the map, accumulating log fitness.
PredictionResult predict_one(std::span<const State> history,
                             const MoDSampler& sampler,
                             const PredictorParams& params, double start_time,
                             Rng& rng);

/// k independent rollouts sorted by log fitness (descending), with longer
/// rollouts preferred on ties, then rollout index.
std::vector<PredictionResult> predict_ranked(std::span<const State> history,
                                             const MoDSampler& sampler,
                                             const PredictorParams& params,
                                             double start_time, Rng& rng);

/// Constant velocity baseline: observed velocity propagated unchanged.
PredictionResult cvm_predict(std::span<const State> history, int T_p,
                             double dt, double obs_sigma = 1.5,
                             bool normalize_obs_weights = true);

}  // namespace modflow
