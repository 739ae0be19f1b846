#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "modflow/core.hpp"

namespace modflow {

enum class Scenario { kCorridor, kBend, kBimodal, kTimeVarying };

Scenario scenario_from_string(const std::string& s);
std::string scenario_to_string(Scenario s);

struct SyntheticParams {
  int n_trajectories = 100;
  double dt = 1.0;          // s between samples
  double speed = 1.0;       // m/s nominal walking speed
  double noise = 0.05;      // per-step position noise sigma, m
  double lateral_spread = 0.5;  // start offset across the flow, m

  // corridor / time_varying
  double corridor_length = 30.0;  // m

  // bend: straight leg, quarter arc, straight leg
  double leg_length = 10.0;  // m
  double bend_radius = 3.0;  // m

  // bimodal: two flows crossing the same square region
  double region_size = 20.0;          // m
  double bimodal_fraction = 0.8;      // share of flow A
  double bimodal_heading_a = 0.0;     // rad
  double bimodal_heading_b = kPi;     // rad

  // time_varying: flow direction flips every flip_period seconds; the two
  // phases move in opposite directions at different speeds
  double flip_period = 43200.0;  // s
  int n_days = 4;
  double speed_a = 1.5;  // m/s, even phase (eastbound)
  double speed_b = 0.5;  // m/s, odd phase (westbound)
  bool curved = false;   // route the flipping flow through the bend geometry

  double base_time = 0.0;    // epoch s of the first day
  double time_spread = 3600.0;  // start times spread over this window
};

/// Deterministic trajectory generator for desk-scale benchmarks.
std::vector<Trajectory> generate_synthetic(Scenario scenario,
                                           const SyntheticParams& params,
                                           std::uint64_t seed);

}  // namespace modflow
