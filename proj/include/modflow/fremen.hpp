#pragma once

#include <span>
#include <vector>

namespace modflow {

/// Spectral model of a [0, 1]-valued signal over time: a mean plus the
/// most prominent cosine components.
struct FreMEnModel {
  struct Component {
    double freq = 0.0;       // rad/s
    double amplitude = 0.0;  // >= 0
    double phase = 0.0;      // rad
  };
  double mean = 0.0;
  std::vector<Component> components;  // sorted by descending amplitude
};

/// Projects (values - mean) onto each candidate frequency and keeps the m
/// largest-magnitude coefficients. With fewer than 2m + 1 samples the
/// model degenerates to the mean alone.
FreMEnModel fit_fremen(std::span<const double> values,
                       std::span<const double> times,
                       std::span<const double> candidate_freqs, int m);

/// Model value at time t, clipped to [0, 1].
double fremen_predict(const FreMEnModel& model, double t);

/// Daily harmonics 2*pi*i/86400 for i = 1..n.
std::vector<double> daily_harmonics(int n = 24);

}  // namespace modflow
