#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <unordered_map>

#include "modflow/core.hpp"
#include "modflow/rng.hpp"
#include "modflow/swgmm.hpp"

namespace modflow {

struct GridIndex {
  std::int64_t ix = 0;
  std::int64_t iy = 0;
  bool operator==(const GridIndex&) const = default;
};

struct GridIndexHash {
  size_t operator()(const GridIndex& g) const {
    return static_cast<size_t>(
        mix_seed(static_cast<std::uint64_t>(g.ix),
                 static_cast<std::uint64_t>(g.iy)));
  }
};

struct Bounds {
  double min_x = 0.0, min_y = 0.0, max_x = 0.0, max_y = 0.0;
};

/// A sampled velocity with the likelihood the map assigns to it.
struct VelocitySample {
  Velocity velocity;
  double fitness = 0.0;  // density (CLiFF) or normalized bin weight (STeF)
};

/// Grid of semi-wrapped Gaussian mixtures over velocity.
struct CLiFFMap {
  double resolution = 1.0;
  Bounds bounds;
  std::uint64_t em_seed = 0;
  std::unordered_map<GridIndex, SWGMM, GridIndexHash> locations;

  GridIndex cell_of(double x, double y) const {
    return {static_cast<std::int64_t>(std::floor(x / resolution)),
            static_cast<std::int64_t>(std::floor(y / resolution))};
  }
  std::pair<double, double> center_of(GridIndex g) const {
    return {(g.ix + 0.5) * resolution, (g.iy + 0.5) * resolution};
  }
  bool empty() const { return locations.empty(); }
};

/// CLiFF-maps keyed by time-of-day interval index.
struct TCCLiFFMap {
  double interval_length = 3600.0;  // seconds
  double resolution = 1.0;
  std::uint64_t em_seed = 0;
  std::map<int, CLiFFMap> interval_maps;

  int interval_of(double epoch_s) const {
    double tod = std::fmod(epoch_s, kSecondsPerDay);
    if (tod < 0.0) tod += kSecondsPerDay;
    return static_cast<int>(tod / interval_length);
  }
};

/// Fits one SWGMM per grid cell with enough observations. Cells below
/// min_observations are omitted. Motion intensity is the fraction of
/// dt-sized time bins (over the training span) during which the cell saw
/// at least one observation.
CLiFFMap build_cliff_map(std::span<const Trajectory> trajectories,
                         double resolution, const EMConfig& config);

CLiFFMap build_cliff_map(std::span<const Trajectory> trajectories,
                         double resolution, const EMConfig& config,
                         int workers);

/// Partitions samples by time-of-day interval and builds one CLiFF-map per
/// nonempty interval.
TCCLiFFMap build_tc_cliff_map(std::span<const Trajectory> trajectories,
                              double resolution, double interval_length,
                              const EMConfig& config, int workers = 1);

/// Gathers SWGMMs within Euclidean distance r_s of (x, y), selects the one
/// with the highest motion intensity (ties: nearest center, then lowest
/// (x, y)), and draws a velocity from it. Empty optional means no dynamics
/// data within r_s.
std::optional<VelocitySample> sample_velocity_from_cliff(double x, double y,
                                                         const CLiFFMap& map,
                                                         double r_s, Rng& rng);

// --- Serialization ---

std::string cliff_map_to_string(const CLiFFMap& map);
CLiFFMap cliff_map_from_string(const std::string& text);
void write_cliff_map(const CLiFFMap& map, const std::filesystem::path& file);
CLiFFMap read_cliff_map(const std::filesystem::path& file);

/// Directory of per-interval map files plus a manifest.
void write_tc_cliff_map(const TCCLiFFMap& map,
                        const std::filesystem::path& dir);
TCCLiFFMap read_tc_cliff_map(const std::filesystem::path& dir);

}  // namespace modflow
