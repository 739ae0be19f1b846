#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "modflow/core.hpp"

namespace modflow {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DatasetFormat { kAtc, kEdinburgh, kGenericCsv };

DatasetFormat dataset_format_from_string(const std::string& s);

struct Polygon {
  std::vector<std::pair<double, double>> vertices;  // meters
  bool contains(double x, double y) const;
};

struct DatasetConfig {
  DatasetFormat format = DatasetFormat::kGenericCsv;
  double unit_scale = 1.0;   // meters per source unit
  double target_rate = 1.0;  // Hz
  int min_points = 30;
  std::map<std::string, Polygon> regions;  // "marginal", "lift"
};

struct ParseResult {
  std::vector<Trajectory> trajectories;
  std::int64_t skipped_rows = 0;
};

/// Reads a trajectory log, converts to meters/seconds, groups by person id
/// and orders by time. Malformed rows are counted and skipped; zero valid
/// rows is an error.
ParseResult parse(const std::filesystem::path& file,
                  const DatasetConfig& config);
ParseResult parse_text(const std::string& text, const DatasetConfig& config);

/// Recomputes speed/heading of every sample from consecutive positions and
/// timestamps (stationary steps carry the previous heading; the first
/// sample copies the second). Needed after reading position-only files.
void recompute_velocities(Trajectory& traj);

/// Resamples to uniform 1/target_rate spacing with linearly interpolated
/// positions; speed/heading recomputed from consecutive resampled
/// positions (stationary steps carry the previous heading). Returns
/// nothing when the trajectory is too short to resample.
std::optional<Trajectory> resample(const Trajectory& traj,
                                   double target_rate);

struct FilterResult {
  std::vector<Trajectory> kept;
  std::int64_t removed_outside_marginal = 0;
  std::int64_t removed_short = 0;
  std::int64_t removed_lift = 0;
};

/// Edinburgh preprocessing rules: drop trajectories that start or end
/// outside the marginal area, that are shorter than min_points, or that
/// both start and end in the lift area.
FilterResult filter_edinburgh(std::span<const Trajectory> trajs,
                              const DatasetConfig& config);

struct SplitResult {
  std::vector<Trajectory> train;
  std::vector<Trajectory> test;
  std::vector<Trajectory> unassigned;
  std::vector<std::string> warnings;
};

/// Calendar day (UTC) of a trajectory's first sample.
std::int64_t day_of(const Trajectory& traj);

/// Partitions by calendar day of the first sample. Days requested but
/// absent produce a warning.
SplitResult split_by_day(std::span<const Trajectory> trajs,
                         std::span<const std::int64_t> train_days,
                         std::span<const std::int64_t> test_days);

/// Sorted distinct days present in the data.
std::vector<std::int64_t> days_present(std::span<const Trajectory> trajs);

/// Convenience split: first n_train_days distinct days train, rest test.
SplitResult split_first_days(std::span<const Trajectory> trajs,
                             int n_train_days);

// Generic interchange format: text rows `timestamp_s,person_id,x_m,y_m`.
std::string write_generic(std::span<const Trajectory> trajs);
void write_generic_file(std::span<const Trajectory> trajs,
                        const std::filesystem::path& file);

/// Region polygons: lines `label: x1 y1 x2 y2 ...` in meters.
std::map<std::string, Polygon> read_regions(const std::filesystem::path& file);

}  // namespace modflow
