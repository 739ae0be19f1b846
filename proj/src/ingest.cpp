#include "modflow/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "modflow/text_io.hpp"

namespace modflow {

DatasetFormat dataset_format_from_string(const std::string& s) {
  if (s == "atc") return DatasetFormat::kAtc;
  if (s == "edinburgh") return DatasetFormat::kEdinburgh;
  if (s == "generic" || s == "generic_csv") return DatasetFormat::kGenericCsv;
  throw std::invalid_argument("unknown dataset format: " + s);
}

bool Polygon::contains(double x, double y) const {
  bool inside = false;
  const size_t n = vertices.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const auto& [xi, yi] = vertices[i];
    const auto& [xj, yj] = vertices[j];
    if ((yi > y) != (yj > y) &&
        x < (xj - xi) * (y - yi) / (yj - yi) + xi) {
      inside = !inside;
    }
  }
  return inside;
}

ParseResult parse_text(const std::string& text, const DatasetConfig& config) {
  ParseResult result;
  std::unordered_map<std::string, Trajectory> by_id;
  std::istringstream in(text);
  std::string line;
  bool first_line = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_fields(line);
    const size_t min_fields = config.format == DatasetFormat::kAtc ? 4 : 4;
    double t, x, y;
    if (fields.size() < min_fields || !parse_double(fields[0], t) ||
        !parse_double(fields[2], x) || !parse_double(fields[3], y) ||
        !std::isfinite(t) || !std::isfinite(x) || !std::isfinite(y)) {
      // Tolerate a single header row without counting it as malformed.
      if (first_line) {
        first_line = false;
        continue;
      }
      result.skipped_rows++;
      continue;
    }
    first_line = false;
    std::string id(fields[1]);
    Trajectory& traj = by_id[id];
    traj.person_id = id;
    traj.samples.push_back(
        {t, State{x * config.unit_scale, y * config.unit_scale, 0.0, 0.0}});
  }
  if (by_id.empty()) {
    throw ParseError("parse: no valid rows");
  }
  for (auto& [id, traj] : by_id) {
    std::stable_sort(traj.samples.begin(), traj.samples.end(),
                     [](const TimedState& a, const TimedState& b) {
                       return a.t < b.t;
                     });
    // Enforce strictly increasing timestamps; duplicates are dropped.
    std::vector<TimedState> unique;
    unique.reserve(traj.samples.size());
    for (const auto& s : traj.samples) {
      if (!unique.empty() && s.t <= unique.back().t) {
        result.skipped_rows++;
        continue;
      }
      unique.push_back(s);
    }
    traj.samples = std::move(unique);
    result.trajectories.push_back(std::move(traj));
  }
  std::sort(result.trajectories.begin(), result.trajectories.end(),
            [](const Trajectory& a, const Trajectory& b) {
              return a.person_id < b.person_id;
            });
  return result;
}

ParseResult parse(const std::filesystem::path& file,
                  const DatasetConfig& config) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), config);
}

void recompute_velocities(Trajectory& traj) {
  if (traj.samples.size() < 2) return;
  double heading = 0.0;
  for (size_t i = 1; i < traj.samples.size(); ++i) {
    const double dx = traj.samples[i].state.x - traj.samples[i - 1].state.x;
    const double dy = traj.samples[i].state.y - traj.samples[i - 1].state.y;
    const double dt = traj.samples[i].t - traj.samples[i - 1].t;
    const double dist = std::hypot(dx, dy);
    if (dist > 1e-9) heading = wrap_angle(std::atan2(dy, dx));
    traj.samples[i].state.speed = dt > 0.0 ? dist / dt : 0.0;
    traj.samples[i].state.heading = heading;
  }
  traj.samples[0].state.speed = traj.samples[1].state.speed;
  traj.samples[0].state.heading = traj.samples[1].state.heading;
}

std::optional<Trajectory> resample(const Trajectory& traj,
                                   double target_rate) {
  if (!(target_rate > 0.0)) {
    throw std::invalid_argument("resample: target_rate <= 0");
  }
  const double dt = 1.0 / target_rate;
  if (traj.samples.size() < 2 ||
      traj.samples.back().t - traj.samples.front().t < dt) {
    return std::nullopt;
  }
  Trajectory out;
  out.person_id = traj.person_id;
  const double t0 = traj.samples.front().t;
  const double t_end = traj.samples.back().t;
  size_t seg = 0;
  for (std::int64_t i = 0;; ++i) {
    const double t = t0 + i * dt;
    if (t > t_end + 1e-9) break;
    while (seg + 2 < traj.samples.size() && traj.samples[seg + 1].t < t) {
      seg++;
    }
    const auto& a = traj.samples[seg];
    const auto& b = traj.samples[seg + 1];
    const double u = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);
    const double x = a.state.x + u * (b.state.x - a.state.x);
    const double y = a.state.y + u * (b.state.y - a.state.y);
    out.samples.push_back({t, State{x, y, 0.0, 0.0}});
  }
  if (out.samples.size() < 2) return std::nullopt;
  // Velocity of sample i from positions i-1 -> i; stationary steps keep the
  // previous heading (0 if never moved); the first sample copies the second.
  double heading = 0.0;
  for (size_t i = 1; i < out.samples.size(); ++i) {
    const double dx = out.samples[i].state.x - out.samples[i - 1].state.x;
    const double dy = out.samples[i].state.y - out.samples[i - 1].state.y;
    const double dist = std::hypot(dx, dy);
    if (dist > 1e-9) heading = wrap_angle(std::atan2(dy, dx));
    out.samples[i].state.speed = dist / dt;
    out.samples[i].state.heading = heading;
  }
  out.samples[0].state.speed = out.samples[1].state.speed;
  out.samples[0].state.heading = out.samples[1].state.heading;
  return out;
}

FilterResult filter_edinburgh(std::span<const Trajectory> trajs,
                              const DatasetConfig& config) {
  const auto marginal_it = config.regions.find("marginal");
  const auto lift_it = config.regions.find("lift");
  if (marginal_it == config.regions.end() ||
      lift_it == config.regions.end()) {
    throw std::invalid_argument(
        "filter_edinburgh: missing 'marginal' or 'lift' region polygon");
  }
  const Polygon& marginal = marginal_it->second;
  const Polygon& lift = lift_it->second;
  FilterResult result;
  for (const auto& traj : trajs) {
    if (traj.samples.empty()) continue;
    const State& first = traj.samples.front().state;
    const State& last = traj.samples.back().state;
    if (!marginal.contains(first.x, first.y) ||
        !marginal.contains(last.x, last.y)) {
      result.removed_outside_marginal++;
      continue;
    }
    if (traj.samples.size() < static_cast<size_t>(config.min_points)) {
      result.removed_short++;
      continue;
    }
    if (lift.contains(first.x, first.y) && lift.contains(last.x, last.y)) {
      result.removed_lift++;
      continue;
    }
    result.kept.push_back(traj);
  }
  return result;
}

std::int64_t day_of(const Trajectory& traj) {
  if (traj.samples.empty()) {
    throw std::invalid_argument("day_of: empty trajectory");
  }
  return static_cast<std::int64_t>(
      std::floor(traj.samples.front().t / kSecondsPerDay));
}

std::vector<std::int64_t> days_present(std::span<const Trajectory> trajs) {
  std::set<std::int64_t> days;
  for (const auto& traj : trajs) {
    if (!traj.samples.empty()) days.insert(day_of(traj));
  }
  return {days.begin(), days.end()};
}

SplitResult split_by_day(std::span<const Trajectory> trajs,
                         std::span<const std::int64_t> train_days,
                         std::span<const std::int64_t> test_days) {
  const std::set<std::int64_t> train_set(train_days.begin(),
                                         train_days.end());
  const std::set<std::int64_t> test_set(test_days.begin(), test_days.end());
  SplitResult result;
  std::set<std::int64_t> seen;
  for (const auto& traj : trajs) {
    if (traj.samples.empty()) continue;
    const std::int64_t day = day_of(traj);
    seen.insert(day);
    if (train_set.contains(day)) {
      result.train.push_back(traj);
    } else if (test_set.contains(day)) {
      result.test.push_back(traj);
    } else {
      result.unassigned.push_back(traj);
    }
  }
  for (std::int64_t d : train_set) {
    if (!seen.contains(d)) {
      result.warnings.push_back("train day " + std::to_string(d) +
                                " absent from data");
    }
  }
  for (std::int64_t d : test_set) {
    if (!seen.contains(d)) {
      result.warnings.push_back("test day " + std::to_string(d) +
                                " absent from data");
    }
  }
  return result;
}

SplitResult split_first_days(std::span<const Trajectory> trajs,
                             int n_train_days) {
  const auto days = days_present(trajs);
  std::vector<std::int64_t> train_days, test_days;
  for (size_t i = 0; i < days.size(); ++i) {
    if (i < static_cast<size_t>(n_train_days)) {
      train_days.push_back(days[i]);
    } else {
      test_days.push_back(days[i]);
    }
  }
  return split_by_day(trajs, train_days, test_days);
}

std::string write_generic(std::span<const Trajectory> trajs) {
  std::vector<const Trajectory*> order;
  order.reserve(trajs.size());
  for (const auto& t : trajs) order.push_back(&t);
  std::sort(order.begin(), order.end(),
            [](const Trajectory* a, const Trajectory* b) {
              return a->person_id < b->person_id;
            });
  std::ostringstream out;
  out << "timestamp_s,person_id,x_m,y_m\n";
  for (const Trajectory* traj : order) {
    for (const auto& s : traj->samples) {
      out << fmt_double(s.t) << "," << traj->person_id << ","
          << fmt_double(s.state.x) << "," << fmt_double(s.state.y) << "\n";
    }
  }
  return out.str();
}

void write_generic_file(std::span<const Trajectory> trajs,
                        const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << write_generic(trajs);
}

std::map<std::string, Polygon> read_regions(
    const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot read " + file.string());
  std::map<std::string, Polygon> regions;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw ParseError("regions: malformed line: " + line);
    }
    const std::string label = line.substr(0, colon);
    std::istringstream coords(line.substr(colon + 1));
    Polygon poly;
    double x, y;
    while (coords >> x >> y) poly.vertices.push_back({x, y});
    if (poly.vertices.size() < 3) {
      throw ParseError("regions: polygon needs >= 3 vertices: " + line);
    }
    regions[label] = std::move(poly);
  }
  return regions;
}

}  // namespace modflow
