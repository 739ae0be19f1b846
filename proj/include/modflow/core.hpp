#pragma once

#include <span>
#include <string>
#include <vector>

namespace modflow {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr double kSecondsPerDay = 86400.0;

/// Velocity in polar form: speed (m/s, >= 0) and heading (rad, in [-pi, pi)).
struct Velocity {
  double speed = 0.0;
  double heading = 0.0;
};

/// Planar state of a person: position plus velocity.
struct State {
  double x = 0.0;
  double y = 0.0;
  double speed = 0.0;
  double heading = 0.0;

  Velocity velocity() const { return {speed, heading}; }
};

struct TimedState {
  double t = 0.0;  // epoch seconds
  State state;
};

/// Time-ordered samples for one person, nominally uniformly spaced.
struct Trajectory {
  std::string person_id;
  std::vector<TimedState> samples;
};

/// Wraps an angle into [-pi, pi). The seam maps to -pi.
double wrap_angle(double a);

/// Shortest signed arc from b to a, in [-pi, pi).
double angle_diff(double a, double b);

/// Resultant-vector weighted mean of angles. Weights must be non-negative
/// with at least one positive entry; throws if the resultant vector is
/// shorter than 1e-12 (degenerate mean).
double circular_weighted_mean(std::span<const double> angles,
                              std::span<const double> weights);

/// Estimates the current velocity from recent states (ordered oldest to
/// newest) with a zero-mean Gaussian weighting g(t), t = 1 for the most
/// recent sample. Weights are normalized to sum 1 unless normalize is
/// false (raw weighted sum for the speed).
Velocity estimate_observed_velocity(std::span<const State> history,
                                    double sigma, bool normalize = true);

/// Constant-velocity position update over dt seconds.
std::pair<double, double> propagate(const State& s, double dt);

}  // namespace modflow
