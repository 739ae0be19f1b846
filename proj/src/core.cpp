#include "modflow/core.hpp"

#include <cmath>
#include <stdexcept>

namespace modflow {

double wrap_angle(double a) {
  if (!std::isfinite(a)) {
    throw std::invalid_argument("wrap_angle: non-finite input");
  }
  double r = std::fmod(a + kPi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r - kPi;
}

double angle_diff(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw std::invalid_argument("angle_diff: non-finite input");
  }
  return wrap_angle(a - b);
}

double circular_weighted_mean(std::span<const double> angles,
                              std::span<const double> weights) {
  if (angles.size() != weights.size() || angles.empty()) {
    throw std::invalid_argument("circular_weighted_mean: size mismatch");
  }
  double sx = 0.0, sy = 0.0, wsum = 0.0;
  for (size_t i = 0; i < angles.size(); ++i) {
    if (weights[i] < 0.0) {
      throw std::invalid_argument("circular_weighted_mean: negative weight");
    }
    sx += weights[i] * std::cos(angles[i]);
    sy += weights[i] * std::sin(angles[i]);
    wsum += weights[i];
  }
  if (wsum <= 0.0) {
    throw std::domain_error("circular_weighted_mean: all-zero weights");
  }
  if (std::hypot(sx, sy) < 1e-12) {
    throw std::domain_error("circular_weighted_mean: degenerate mean");
  }
  return wrap_angle(std::atan2(sy, sx));
}

namespace {

double gaussian_weight(double t, double sigma) {
  return std::exp(-0.5 * (t / sigma) * (t / sigma)) /
         (sigma * std::sqrt(kTwoPi));
}

}  // namespace

Velocity estimate_observed_velocity(std::span<const State> history,
                                    double sigma, bool normalize) {
  if (history.empty()) {
    throw std::invalid_argument("estimate_observed_velocity: empty history");
  }
  if (sigma <= 0.0) {
    throw std::invalid_argument("estimate_observed_velocity: sigma <= 0");
  }
  const size_t n = history.size();
  std::vector<double> headings(n), weights(n);
  double speed_sum = 0.0, wsum = 0.0;
  // t = 1 is the most recent (last) sample.
  for (size_t i = 0; i < n; ++i) {
    const State& s = history[n - 1 - i];
    const double w = gaussian_weight(static_cast<double>(i + 1), sigma);
    headings[i] = s.heading;
    weights[i] = w;
    speed_sum += w * s.speed;
    wsum += w;
  }
  double speed = normalize ? speed_sum / wsum : speed_sum;
  double heading = circular_weighted_mean(headings, weights);
  return {speed, heading};
}

std::pair<double, double> propagate(const State& s, double dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("propagate: dt must be positive");
  }
  return {s.x + s.speed * std::cos(s.heading) * dt,
          s.y + s.speed * std::sin(s.heading) * dt};
}

}  // namespace modflow
