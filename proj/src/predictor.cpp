#include "modflow/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace modflow {

MoDSampler make_cliff_sampler(const CLiFFMap& map, double r_s) {
  return [&map, r_s](double x, double y, double /*t*/, double /*prev_speed*/,
                     Rng& rng) {
    return sample_velocity_from_cliff(x, y, map, r_s, rng);
  };
}

MoDSampler make_tc_cliff_sampler(const TCCLiFFMap& map, double r_s) {
  return [&map, r_s](double x, double y, double t, double /*prev_speed*/,
                     Rng& rng) -> std::optional<VelocitySample> {
    auto it = map.interval_maps.find(map.interval_of(t));
    if (it == map.interval_maps.end()) return std::nullopt;
    return sample_velocity_from_cliff(x, y, it->second, r_s, rng);
  };
}

MoDSampler make_stef_sampler(const STeFMap& map, double r_s) {
  return [&map, r_s](double x, double y, double t, double prev_speed,
                     Rng& rng) {
    return sample_velocity_from_stef(x, y, map, t, prev_speed, r_s, rng);
  };
}

Velocity bias_velocity(const Velocity& prev, const Velocity& sampled,
                       double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("bias_velocity: beta <= 0");
  const double d_rho = sampled.speed - prev.speed;
  const double d_theta = angle_diff(sampled.heading, prev.heading);
  const double rho =
      std::max(0.0, prev.speed + d_rho * std::exp(-beta * d_rho * d_rho));
  const double theta =
      wrap_angle(prev.heading + d_theta * std::exp(-beta * d_theta * d_theta));
  return {rho, theta};
}

PredictionResult predict_one(std::span<const State> history,
                             const MoDSampler& sampler,
                             const PredictorParams& params, double start_time,
                             Rng& rng) {
  if (history.empty()) throw std::invalid_argument("predict_one: empty history");
  const Velocity obs = estimate_observed_velocity(
      history, params.obs_sigma, params.normalize_obs_weights);
  State s{history.back().x, history.back().y, obs.speed, obs.heading};

  PredictionResult result;
  result.states.reserve(params.T_p);
  for (int step = 1; step <= params.T_p; ++step) {
    const auto [x, y] = propagate(s, params.dt);
    const double t =
        params.advance_time ? start_time + step * params.dt : start_time;
    const auto sample = sampler(x, y, t, s.speed, rng);
    if (!sample) {
      if (params.stop_policy == StopPolicy::kTruncate) {
        result.stopped_early = true;
        result.stop_step = step;
        break;
      }
      // Continue as an unbiased CVM step with zero log-fitness increment.
      s.x = x;
      s.y = y;
      result.states.push_back(s);
      result.step_log_fitness.push_back(0.0);
      continue;
    }
    const Velocity v =
        bias_velocity({s.speed, s.heading}, sample->velocity, params.beta);
    s = {x, y, v.speed, v.heading};
    result.states.push_back(s);
    result.step_log_fitness.push_back(
        std::log(std::max(sample->fitness, 1e-300)));
  }
  for (double lf : result.step_log_fitness) result.log_fitness += lf;
  return result;
}

std::vector<PredictionResult> predict_ranked(std::span<const State> history,
                                             const MoDSampler& sampler,
                                             const PredictorParams& params,
                                             double start_time, Rng& rng) {
  if (params.k < 1) throw std::invalid_argument("predict_ranked: k < 1");
  std::vector<std::uint64_t> seeds(params.k);
  for (auto& s : seeds) s = rng.next_seed();
  std::vector<PredictionResult> results;
  results.reserve(params.k);
  for (int i = 0; i < params.k; ++i) {
    Rng sub(seeds[i]);
    results.push_back(predict_one(history, sampler, params, start_time, sub));
  }
  std::stable_sort(results.begin(), results.end(),
                   [](const PredictionResult& a, const PredictionResult& b) {
                     if (a.log_fitness != b.log_fitness) {
                       return a.log_fitness > b.log_fitness;
                     }
                     return a.states.size() > b.states.size();
                   });
  return results;
}

PredictionResult cvm_predict(std::span<const State> history, int T_p,
                             double dt, double obs_sigma,
                             bool normalize_obs_weights) {
  if (history.empty()) throw std::invalid_argument("cvm_predict: empty history");
  const Velocity obs =
      estimate_observed_velocity(history, obs_sigma, normalize_obs_weights);
  State s{history.back().x, history.back().y, obs.speed, obs.heading};
  PredictionResult result;
  result.states.reserve(T_p);
  for (int step = 1; step <= T_p; ++step) {
    const auto [x, y] = propagate(s, dt);
    s.x = x;
    s.y = y;
    result.states.push_back(s);
    result.step_log_fitness.push_back(0.0);
  }
  return result;
}

}  // namespace modflow
