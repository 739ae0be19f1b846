#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "modflow/cliff_map.hpp"
#include "modflow/core.hpp"
#include "modflow/fremen.hpp"
#include "modflow/rng.hpp"

namespace modflow {

/// One FreMEn model per discrete orientation bin (bin i covers heading
/// i * 2*pi / k).
struct STeFCell {
  std::vector<FreMEnModel> bin_models;
};

struct STeFMap {
  double resolution = 1.0;
  int k = 8;
  double t_interval = 600.0;  // s
  int m = 2;
  std::vector<double> candidate_freqs;
  double train_start = 0.0, train_end = 0.0;  // epoch seconds
  std::unordered_map<GridIndex, STeFCell, GridIndexHash> cells;

  GridIndex cell_of(double x, double y) const {
    return {static_cast<std::int64_t>(std::floor(x / resolution)),
            static_cast<std::int64_t>(std::floor(y / resolution))};
  }
  std::pair<double, double> center_of(GridIndex g) const {
    return {(g.ix + 0.5) * resolution, (g.iy + 0.5) * resolution};
  }
  /// Bin center as a wrapped heading.
  double bin_heading(int bin) const {
    return wrap_angle(bin * kTwoPi / k);
  }
};

/// Orientation bin for a heading: nearest bin center, midpoints rounding
/// toward the lower index.
int heading_to_bin(double heading, int k);

/// Per-cell time series of per-bin detection fractions. Intervals index a
/// global timeline of width t_interval; per (cell, interval) the bin
/// values sum to 1 when any detection occurred and stay all-zero
/// otherwise.
struct BinHistograms {
  std::int64_t first_interval = 0;
  std::int64_t n_intervals = 0;
  int k = 8;
  double t_interval = 600.0;
  // values[cell] is row-major [interval][bin], n_intervals * k long
  std::unordered_map<GridIndex, std::vector<double>, GridIndexHash> values;

  double interval_time(std::int64_t local_idx) const {
    return (first_interval + local_idx + 0.5) * t_interval;
  }
};

BinHistograms accumulate_bin_histograms(std::span<const Trajectory> trajs,
                                        double resolution, int k,
                                        double t_interval);

/// Raw per-bin likelihoods at time t (clipped to [0, 1], not normalized).
std::vector<double> predict_bin_probs(const STeFCell& cell, double t);

STeFMap build_stef_map(std::span<const Trajectory> trajs, double resolution,
                       int k, double t_interval, int m,
                       std::span<const double> candidate_freqs);

/// Picks the nearest cell within r_s, draws a bin proportionally to the
/// predicted probabilities at t, and returns (prev_speed, bin heading)
/// with the normalized bin probability as fitness.
std::optional<VelocitySample> sample_velocity_from_stef(double x, double y,
                                                        const STeFMap& map,
                                                        double t,
                                                        double prev_speed,
                                                        double r_s, Rng& rng);

// --- Serialization ---

std::string stef_map_to_string(const STeFMap& map);
STeFMap stef_map_from_string(const std::string& text);
void write_stef_map(const STeFMap& map, const std::filesystem::path& file);
STeFMap read_stef_map(const std::filesystem::path& file);

}  // namespace modflow
