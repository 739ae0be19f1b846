#include "modflow/cliff_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "modflow/text_io.hpp"

namespace modflow {

namespace {

struct Obs {
  double t;
  double x, y;
  Velocity v;
};

std::vector<Obs> collect_observations(std::span<const Trajectory> trajs) {
  std::vector<Obs> out;
  for (const auto& traj : trajs) {
    for (const auto& ts : traj.samples) {
      out.push_back({ts.t, ts.state.x, ts.state.y,
                     {ts.state.speed, ts.state.heading}});
    }
  }
  return out;
}

double infer_dt(std::span<const Trajectory> trajs) {
  std::vector<double> diffs;
  for (const auto& traj : trajs) {
    for (size_t i = 1; i < traj.samples.size(); ++i) {
      diffs.push_back(traj.samples[i].t - traj.samples[i - 1].t);
    }
  }
  if (diffs.empty()) return 1.0;
  std::nth_element(diffs.begin(), diffs.begin() + diffs.size() / 2,
                   diffs.end());
  double dt = diffs[diffs.size() / 2];
  return dt > 0.0 ? dt : 1.0;
}

CLiFFMap build_from_observations(const std::vector<Obs>& obs, double dt,
                                 double resolution, const EMConfig& config,
                                 int workers) {
  CLiFFMap map;
  map.resolution = resolution;
  map.em_seed = config.seed;
  if (obs.empty()) return map;

  map.bounds = {obs[0].x, obs[0].y, obs[0].x, obs[0].y};
  std::unordered_map<GridIndex, std::vector<Velocity>, GridIndexHash> cells;
  std::unordered_map<GridIndex, std::set<std::int64_t>, GridIndexHash>
      cell_bins;
  std::int64_t min_bin = std::numeric_limits<std::int64_t>::max();
  std::int64_t max_bin = std::numeric_limits<std::int64_t>::min();
  for (const auto& o : obs) {
    map.bounds.min_x = std::min(map.bounds.min_x, o.x);
    map.bounds.min_y = std::min(map.bounds.min_y, o.y);
    map.bounds.max_x = std::max(map.bounds.max_x, o.x);
    map.bounds.max_y = std::max(map.bounds.max_y, o.y);
    const GridIndex g = map.cell_of(o.x, o.y);
    cells[g].push_back(o.v);
    const auto bin = static_cast<std::int64_t>(std::floor(o.t / dt));
    cell_bins[g].insert(bin);
    min_bin = std::min(min_bin, bin);
    max_bin = std::max(max_bin, bin);
  }
  const double total_bins = static_cast<double>(max_bin - min_bin + 1);

  std::vector<GridIndex> order;
  order.reserve(cells.size());
  for (const auto& [g, _] : cells) order.push_back(g);
  std::sort(order.begin(), order.end(), [](GridIndex a, GridIndex b) {
    return std::tie(a.ix, a.iy) < std::tie(b.ix, b.iy);
  });

  auto fit_cell = [&](const GridIndex& g) -> std::optional<SWGMM> {
    const auto& velocities = cells.at(g);
    EMConfig cell_cfg = config;
    cell_cfg.seed = mix_seed(config.seed,
                             GridIndexHash{}(g));
    try {
      SWGMM m = fit_swgmm(velocities, cell_cfg);
      m.motion_intensity =
          static_cast<double>(cell_bins.at(g).size()) / total_bins;
      return m;
    } catch (const InsufficientDataError&) {
      return std::nullopt;
    }
  };

  if (workers <= 1) {
    for (const auto& g : order) {
      if (auto m = fit_cell(g)) map.locations.emplace(g, std::move(*m));
    }
  } else {
    std::vector<std::optional<SWGMM>> fitted(order.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
      for (size_t i = next.fetch_add(1); i < order.size();
           i = next.fetch_add(1)) {
        fitted[i] = fit_cell(order[i]);
      }
    };
    std::vector<std::future<void>> futs;
    for (int w = 0; w < workers; ++w) {
      futs.push_back(std::async(std::launch::async, worker));
    }
    for (auto& f : futs) f.get();
    for (size_t i = 0; i < order.size(); ++i) {
      if (fitted[i]) map.locations.emplace(order[i], std::move(*fitted[i]));
    }
  }
  return map;
}

}  // namespace

CLiFFMap build_cliff_map(std::span<const Trajectory> trajectories,
                         double resolution, const EMConfig& config,
                         int workers) {
  return build_from_observations(collect_observations(trajectories),
                                 infer_dt(trajectories), resolution, config,
                                 workers);
}

CLiFFMap build_cliff_map(std::span<const Trajectory> trajectories,
                         double resolution, const EMConfig& config) {
  return build_cliff_map(trajectories, resolution, config, 1);
}

TCCLiFFMap build_tc_cliff_map(std::span<const Trajectory> trajectories,
                              double resolution, double interval_length,
                              const EMConfig& config, int workers) {
  TCCLiFFMap tc;
  tc.interval_length = interval_length;
  tc.resolution = resolution;
  tc.em_seed = config.seed;
  const double dt = infer_dt(trajectories);
  // Each sample contributes to its own time-of-day interval.
  std::map<int, std::vector<Obs>> by_interval;
  for (const auto& traj : trajectories) {
    for (const auto& ts : traj.samples) {
      by_interval[tc.interval_of(ts.t)].push_back(
          {ts.t, ts.state.x, ts.state.y, {ts.state.speed, ts.state.heading}});
    }
  }
  for (const auto& [idx, obs] : by_interval) {
    CLiFFMap m =
        build_from_observations(obs, dt, resolution, config, workers);
    if (!m.empty()) tc.interval_maps.emplace(idx, std::move(m));
  }
  return tc;
}

std::optional<VelocitySample> sample_velocity_from_cliff(double x, double y,
                                                         const CLiFFMap& map,
                                                         double r_s,
                                                         Rng& rng) {
  if (map.empty()) return std::nullopt;
  const double res = map.resolution;
  const auto lo_x = static_cast<std::int64_t>(std::floor((x - r_s) / res));
  const auto hi_x = static_cast<std::int64_t>(std::floor((x + r_s) / res));
  const auto lo_y = static_cast<std::int64_t>(std::floor((y - r_s) / res));
  const auto hi_y = static_cast<std::int64_t>(std::floor((y + r_s) / res));

  const SWGMM* best = nullptr;
  double best_intensity = -1.0;
  double best_dist = 0.0;
  GridIndex best_g{};
  for (std::int64_t ix = lo_x; ix <= hi_x; ++ix) {
    for (std::int64_t iy = lo_y; iy <= hi_y; ++iy) {
      const GridIndex g{ix, iy};
      auto it = map.locations.find(g);
      if (it == map.locations.end()) continue;
      const auto [cx, cy] = map.center_of(g);
      const double d = std::hypot(cx - x, cy - y);
      if (d > r_s) continue;
      const SWGMM& m = it->second;
      bool take = false;
      if (m.motion_intensity > best_intensity) {
        take = true;
      } else if (m.motion_intensity == best_intensity) {
        if (d < best_dist) {
          take = true;
        } else if (d == best_dist &&
                   std::tie(g.ix, g.iy) < std::tie(best_g.ix, best_g.iy)) {
          take = true;
        }
      }
      if (take) {
        best = &m;
        best_intensity = m.motion_intensity;
        best_dist = d;
        best_g = g;
      }
    }
  }
  if (!best) return std::nullopt;
  const Velocity v = sample_swgmm(*best, rng);
  return VelocitySample{v, swgmm_pdf(*best, v)};
}

// --- Serialization ---

std::string cliff_map_to_string(const CLiFFMap& map) {
  std::ostringstream out;
  out << "# cliff-map v1\n";
  out << "# resolution_m=" << fmt_double(map.resolution) << "\n";
  out << "# bounds_m=" << fmt_double(map.bounds.min_x) << ","
      << fmt_double(map.bounds.min_y) << "," << fmt_double(map.bounds.max_x)
      << "," << fmt_double(map.bounds.max_y) << "\n";
  out << "# em_seed=" << map.em_seed << "\n";
  out << "x_m,y_m,motion_intensity,component_weight,mean_theta_rad,"
         "mean_rho_mps,cov_tt_rad2,cov_tr_radmps,cov_rr_mps2\n";
  std::vector<GridIndex> order;
  order.reserve(map.locations.size());
  for (const auto& [g, _] : map.locations) order.push_back(g);
  std::sort(order.begin(), order.end(), [](GridIndex a, GridIndex b) {
    return std::tie(a.ix, a.iy) < std::tie(b.ix, b.iy);
  });
  for (const auto& g : order) {
    const auto [cx, cy] = map.center_of(g);
    const SWGMM& m = map.locations.at(g);
    for (const auto& c : m.components) {
      out << fmt_double(cx) << "," << fmt_double(cy) << ","
          << fmt_double(m.motion_intensity) << "," << fmt_double(c.weight)
          << "," << fmt_double(c.mean_heading) << ","
          << fmt_double(c.mean_speed) << "," << fmt_double(c.cov.tt) << ","
          << fmt_double(c.cov.tr) << "," << fmt_double(c.cov.rr) << "\n";
    }
  }
  return out.str();
}

CLiFFMap cliff_map_from_string(const std::string& text) {
  CLiFFMap map;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string val = line.substr(eq + 1);
      if (key == "resolution_m") {
        parse_double(val, map.resolution);
      } else if (key == "bounds_m") {
        auto f = split_fields(val);
        if (f.size() == 4) {
          parse_double(f[0], map.bounds.min_x);
          parse_double(f[1], map.bounds.min_y);
          parse_double(f[2], map.bounds.max_x);
          parse_double(f[3], map.bounds.max_y);
        }
      } else if (key == "em_seed") {
        map.em_seed = std::stoull(val);
      }
      continue;
    }
    if (line[0] == 'x') continue;  // header row
    auto f = split_fields(line);
    if (f.size() != 9) {
      throw std::runtime_error("cliff map: malformed row: " + line);
    }
    double vals[9];
    for (int i = 0; i < 9; ++i) {
      if (!parse_double(f[i], vals[i])) {
        throw std::runtime_error("cliff map: bad number in row: " + line);
      }
    }
    const GridIndex g{
        static_cast<std::int64_t>(std::llround(vals[0] / map.resolution - 0.5)),
        static_cast<std::int64_t>(std::llround(vals[1] / map.resolution - 0.5))};
    SWGMM& m = map.locations[g];
    m.motion_intensity = vals[2];
    SWGMMComponent c;
    c.weight = vals[3];
    c.mean_heading = vals[4];
    c.mean_speed = vals[5];
    c.cov = {vals[6], vals[7], vals[8]};
    m.components.push_back(c);
  }
  return map;
}

void write_cliff_map(const CLiFFMap& map, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << cliff_map_to_string(map);
}

CLiFFMap read_cliff_map(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return cliff_map_from_string(ss.str());
}

void write_tc_cliff_map(const TCCLiFFMap& map,
                        const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["interval_length_s"] = map.interval_length;
  manifest["resolution_m"] = map.resolution;
  manifest["em_seed"] = map.em_seed;
  std::vector<int> intervals;
  for (const auto& [idx, m] : map.interval_maps) {
    intervals.push_back(idx);
    write_cliff_map(m, dir / ("interval_" + std::to_string(idx) + ".cliff"));
  }
  manifest["intervals"] = intervals;
  std::ofstream out(dir / "manifest.json");
  out << manifest.dump(2) << "\n";
}

TCCLiFFMap read_tc_cliff_map(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) {
    throw std::runtime_error("cannot read " + (dir / "manifest.json").string());
  }
  nlohmann::json manifest = nlohmann::json::parse(in);
  TCCLiFFMap tc;
  tc.interval_length = manifest.at("interval_length_s").get<double>();
  tc.resolution = manifest.at("resolution_m").get<double>();
  tc.em_seed = manifest.at("em_seed").get<std::uint64_t>();
  for (int idx : manifest.at("intervals").get<std::vector<int>>()) {
    tc.interval_maps[idx] =
        read_cliff_map(dir / ("interval_" + std::to_string(idx) + ".cliff"));
  }
  return tc;
}

}  // namespace modflow
