#include "modflow/stef_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "modflow/text_io.hpp"

namespace modflow {

int heading_to_bin(double heading, int k) {
  double h = wrap_angle(heading);
  if (h < 0.0) h += kTwoPi;  // [0, 2*pi)
  const double width = kTwoPi / k;
  // Nearest center; exact midpoints round to the lower index.
  auto bin = static_cast<std::int64_t>(std::ceil(h / width - 0.5));
  return static_cast<int>(((bin % k) + k) % k);
}

BinHistograms accumulate_bin_histograms(std::span<const Trajectory> trajs,
                                        double resolution, int k,
                                        double t_interval) {
  if (k < 2) throw std::invalid_argument("accumulate_bin_histograms: k < 2");
  BinHistograms out;
  out.k = k;
  out.t_interval = t_interval;

  std::int64_t min_iv = std::numeric_limits<std::int64_t>::max();
  std::int64_t max_iv = std::numeric_limits<std::int64_t>::min();
  struct Det {
    GridIndex g;
    std::int64_t interval;
    int bin;
  };
  std::vector<Det> dets;
  for (const auto& traj : trajs) {
    for (const auto& ts : traj.samples) {
      const GridIndex g{
          static_cast<std::int64_t>(std::floor(ts.state.x / resolution)),
          static_cast<std::int64_t>(std::floor(ts.state.y / resolution))};
      const auto iv = static_cast<std::int64_t>(
          std::floor(ts.t / t_interval));
      dets.push_back({g, iv, heading_to_bin(ts.state.heading, k)});
      min_iv = std::min(min_iv, iv);
      max_iv = std::max(max_iv, iv);
    }
  }
  if (dets.empty()) return out;
  out.first_interval = min_iv;
  out.n_intervals = max_iv - min_iv + 1;
  for (const auto& d : dets) {
    auto& series = out.values[d.g];
    if (series.empty()) series.assign(out.n_intervals * k, 0.0);
    series[(d.interval - min_iv) * k + d.bin] += 1.0;
  }
  // Normalize per (cell, interval); all-zero intervals stay zero.
  for (auto& [g, series] : out.values) {
    for (std::int64_t iv = 0; iv < out.n_intervals; ++iv) {
      double total = 0.0;
      for (int b = 0; b < k; ++b) total += series[iv * k + b];
      if (total > 0.0) {
        for (int b = 0; b < k; ++b) series[iv * k + b] /= total;
      }
    }
  }
  return out;
}

std::vector<double> predict_bin_probs(const STeFCell& cell, double t) {
  std::vector<double> probs;
  probs.reserve(cell.bin_models.size());
  for (const auto& model : cell.bin_models) {
    probs.push_back(fremen_predict(model, t));
  }
  return probs;
}

STeFMap build_stef_map(std::span<const Trajectory> trajs, double resolution,
                       int k, double t_interval, int m,
                       std::span<const double> candidate_freqs) {
  STeFMap map;
  map.resolution = resolution;
  map.k = k;
  map.t_interval = t_interval;
  map.m = m;
  map.candidate_freqs.assign(candidate_freqs.begin(), candidate_freqs.end());

  const BinHistograms hist =
      accumulate_bin_histograms(trajs, resolution, k, t_interval);
  if (hist.values.empty()) return map;
  map.train_start = hist.first_interval * t_interval;
  map.train_end = (hist.first_interval + hist.n_intervals) * t_interval;

  std::vector<double> times(hist.n_intervals);
  for (std::int64_t i = 0; i < hist.n_intervals; ++i) {
    times[i] = hist.interval_time(i);
  }
  std::vector<double> series(hist.n_intervals);
  for (const auto& [g, values] : hist.values) {
    STeFCell cell;
    cell.bin_models.reserve(k);
    for (int b = 0; b < k; ++b) {
      for (std::int64_t i = 0; i < hist.n_intervals; ++i) {
        series[i] = values[i * k + b];
      }
      cell.bin_models.push_back(
          fit_fremen(series, times, candidate_freqs, m));
    }
    map.cells.emplace(g, std::move(cell));
  }
  return map;
}

std::optional<VelocitySample> sample_velocity_from_stef(double x, double y,
                                                        const STeFMap& map,
                                                        double t,
                                                        double prev_speed,
                                                        double r_s,
                                                        Rng& rng) {
  if (map.cells.empty()) return std::nullopt;
  const double res = map.resolution;
  const auto lo_x = static_cast<std::int64_t>(std::floor((x - r_s) / res));
  const auto hi_x = static_cast<std::int64_t>(std::floor((x + r_s) / res));
  const auto lo_y = static_cast<std::int64_t>(std::floor((y - r_s) / res));
  const auto hi_y = static_cast<std::int64_t>(std::floor((y + r_s) / res));
  const STeFCell* best = nullptr;
  double best_dist = std::numeric_limits<double>::max();
  GridIndex best_g{};
  for (std::int64_t ix = lo_x; ix <= hi_x; ++ix) {
    for (std::int64_t iy = lo_y; iy <= hi_y; ++iy) {
      const GridIndex g{ix, iy};
      auto it = map.cells.find(g);
      if (it == map.cells.end()) continue;
      const auto [cx, cy] = map.center_of(g);
      const double d = std::hypot(cx - x, cy - y);
      if (d > r_s) continue;
      if (d < best_dist ||
          (d == best_dist &&
           std::tie(g.ix, g.iy) < std::tie(best_g.ix, best_g.iy))) {
        best = &it->second;
        best_dist = d;
        best_g = g;
      }
    }
  }
  if (!best) return std::nullopt;
  const std::vector<double> probs = predict_bin_probs(*best, t);
  double total = 0.0;
  for (double p : probs) total += p;
  if (total <= 0.0) return std::nullopt;
  const double u = rng.uniform() * total;
  double cum = 0.0;
  int bin = static_cast<int>(probs.size()) - 1;
  for (size_t b = 0; b < probs.size(); ++b) {
    cum += probs[b];
    if (u < cum) {
      bin = static_cast<int>(b);
      break;
    }
  }
  return VelocitySample{{prev_speed, map.bin_heading(bin)},
                        probs[bin] / total};
}

// --- Serialization ---

std::string stef_map_to_string(const STeFMap& map) {
  std::ostringstream out;
  out << "# stef-map v1\n";
  out << "# resolution_m=" << fmt_double(map.resolution) << "\n";
  out << "# k=" << map.k << "\n";
  out << "# t_interval_s=" << fmt_double(map.t_interval) << "\n";
  out << "# m=" << map.m << "\n";
  out << "# candidate_freqs_rads=";
  for (size_t i = 0; i < map.candidate_freqs.size(); ++i) {
    if (i) out << ",";
    out << fmt_double(map.candidate_freqs[i]);
  }
  out << "\n";
  out << "# train_span_s=" << fmt_double(map.train_start) << ","
      << fmt_double(map.train_end) << "\n";
  out << "x_m,y_m,bin,comp_index,freq_rads,amplitude,phase_rad\n";
  std::vector<GridIndex> order;
  order.reserve(map.cells.size());
  for (const auto& [g, _] : map.cells) order.push_back(g);
  std::sort(order.begin(), order.end(), [](GridIndex a, GridIndex b) {
    return std::tie(a.ix, a.iy) < std::tie(b.ix, b.iy);
  });
  for (const auto& g : order) {
    const auto [cx, cy] = map.center_of(g);
    const STeFCell& cell = map.cells.at(g);
    for (int b = 0; b < static_cast<int>(cell.bin_models.size()); ++b) {
      const FreMEnModel& model = cell.bin_models[b];
      out << fmt_double(cx) << "," << fmt_double(cy) << "," << b << ",0,0,"
          << fmt_double(model.mean) << ",0\n";
      for (size_t ci = 0; ci < model.components.size(); ++ci) {
        const auto& c = model.components[ci];
        out << fmt_double(cx) << "," << fmt_double(cy) << "," << b << ","
            << (ci + 1) << "," << fmt_double(c.freq) << ","
            << fmt_double(c.amplitude) << "," << fmt_double(c.phase) << "\n";
      }
    }
  }
  return out.str();
}

STeFMap stef_map_from_string(const std::string& text) {
  STeFMap map;
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
      } else if (key == "k") {
        map.k = std::stoi(val);
      } else if (key == "t_interval_s") {
        parse_double(val, map.t_interval);
      } else if (key == "m") {
        map.m = std::stoi(val);
      } else if (key == "candidate_freqs_rads") {
        map.candidate_freqs.clear();
        for (auto f : split_fields(val)) {
          double v;
          if (parse_double(f, v)) map.candidate_freqs.push_back(v);
        }
      } else if (key == "train_span_s") {
        auto f = split_fields(val);
        if (f.size() == 2) {
          parse_double(f[0], map.train_start);
          parse_double(f[1], map.train_end);
        }
      }
      continue;
    }
    if (line[0] == 'x') continue;  // header row
    auto f = split_fields(line);
    if (f.size() != 7) {
      throw std::runtime_error("stef map: malformed row: " + line);
    }
    double vals[7];
    for (int i = 0; i < 7; ++i) {
      if (!parse_double(f[i], vals[i])) {
        throw std::runtime_error("stef map: bad number in row: " + line);
      }
    }
    const GridIndex g{
        static_cast<std::int64_t>(std::llround(vals[0] / map.resolution - 0.5)),
        static_cast<std::int64_t>(std::llround(vals[1] / map.resolution - 0.5))};
    STeFCell& cell = map.cells[g];
    if (cell.bin_models.empty()) cell.bin_models.resize(map.k);
    const int bin = static_cast<int>(vals[2]);
    const int comp = static_cast<int>(vals[3]);
    if (bin < 0 || bin >= map.k) {
      throw std::runtime_error("stef map: bin out of range: " + line);
    }
    if (comp == 0) {
      cell.bin_models[bin].mean = vals[5];
    } else {
      cell.bin_models[bin].components.push_back({vals[4], vals[5], vals[6]});
    }
  }
  return map;
}

void write_stef_map(const STeFMap& map, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << stef_map_to_string(map);
}

STeFMap read_stef_map(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return stef_map_from_string(ss.str());
}

}  // namespace modflow
