#include "modflow/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "modflow/rng.hpp"

namespace modflow {

Scenario scenario_from_string(const std::string& s) {
  if (s == "corridor") return Scenario::kCorridor;
  if (s == "bend") return Scenario::kBend;
  if (s == "bimodal") return Scenario::kBimodal;
  if (s == "time_varying") return Scenario::kTimeVarying;
  throw std::invalid_argument("unknown scenario: " + s);
}

std::string scenario_to_string(Scenario s) {
  switch (s) {
    case Scenario::kCorridor: return "corridor";
    case Scenario::kBend: return "bend";
    case Scenario::kBimodal: return "bimodal";
    case Scenario::kTimeVarying: return "time_varying";
  }
  return "?";
}

namespace {

struct PathPoint {
  double x, y, heading;
};

// Straight leg, quarter arc, straight leg; parameterized by arc length.
PathPoint bend_path(double s, double leg, double radius) {
  const double arc = kPi * radius / 2.0;
  if (s < leg) {
    return {-leg + s, 0.0, 0.0};
  }
  if (s < leg + arc) {
    const double phi = (s - leg) / radius;
    return {radius * std::sin(phi), radius * (1.0 - std::cos(phi)), phi};
  }
  const double rest = s - leg - arc;
  return {radius, radius + rest, kPi / 2.0};
}

PathPoint corridor_path(double s) { return {s, 0.0, 0.0}; }

Trajectory walk_path(const std::string& id, double start_time,
                     const SyntheticParams& p, double speed, double total_len,
                     bool reverse, double offset,
                     PathPoint (*path)(double, const SyntheticParams&),
                     Rng& rng) {
  Trajectory traj;
  traj.person_id = id;
  double s = reverse ? total_len : 0.0;
  int i = 0;
  while (reverse ? s >= 0.0 : s <= total_len) {
    PathPoint pt = path(s, p);
    double h = reverse ? wrap_angle(pt.heading + kPi) : pt.heading;
    auto [n1, n2] = rng.normal_pair();
    const double x =
        pt.x - offset * std::sin(pt.heading) + p.noise * n1;
    const double y =
        pt.y + offset * std::cos(pt.heading) + p.noise * n2;
    traj.samples.push_back({start_time + i * p.dt, State{x, y, speed, h}});
    s += (reverse ? -1.0 : 1.0) * speed * p.dt;
    i++;
  }
  // Recompute sample velocities from consecutive positions so generated
  // data matches what the resampling pipeline would produce.
  if (traj.samples.size() >= 2) {
    double heading = 0.0;
    for (size_t j = 1; j < traj.samples.size(); ++j) {
      const double dx = traj.samples[j].state.x - traj.samples[j - 1].state.x;
      const double dy = traj.samples[j].state.y - traj.samples[j - 1].state.y;
      const double dist = std::hypot(dx, dy);
      if (dist > 1e-9) heading = wrap_angle(std::atan2(dy, dx));
      traj.samples[j].state.speed = dist / p.dt;
      traj.samples[j].state.heading = heading;
    }
    traj.samples[0].state.speed = traj.samples[1].state.speed;
    traj.samples[0].state.heading = traj.samples[1].state.heading;
  }
  return traj;
}

PathPoint corridor_adapter(double s, const SyntheticParams&) {
  return corridor_path(s);
}

PathPoint bend_adapter(double s, const SyntheticParams& p) {
  return bend_path(s, p.leg_length, p.bend_radius);
}

}  // namespace

std::vector<Trajectory> generate_synthetic(Scenario scenario,
                                           const SyntheticParams& p,
                                           std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Trajectory> out;
  out.reserve(p.n_trajectories);
  for (int i = 0; i < p.n_trajectories; ++i) {
    const std::string id = scenario_to_string(scenario) + "_" +
                           std::to_string(i);
    const double offset = (rng.uniform() - 0.5) * 2.0 * p.lateral_spread;
    switch (scenario) {
      case Scenario::kCorridor: {
        const double ts = p.base_time + rng.uniform() * p.time_spread;
        out.push_back(walk_path(id, ts, p, p.speed, p.corridor_length, false,
                                offset, corridor_adapter, rng));
        break;
      }
      case Scenario::kBend: {
        const double ts = p.base_time + rng.uniform() * p.time_spread;
        const double total =
            2.0 * p.leg_length + kPi * p.bend_radius / 2.0;
        out.push_back(walk_path(id, ts, p, p.speed, total, false, offset,
                                bend_adapter, rng));
        break;
      }
      case Scenario::kBimodal: {
        const double ts = p.base_time + rng.uniform() * p.time_spread;
        const bool major = rng.uniform() < p.bimodal_fraction;
        const double h = major ? p.bimodal_heading_a : p.bimodal_heading_b;
        const double cx = p.region_size / 2.0, cy = p.region_size / 2.0;
        const double u = (rng.uniform() - 0.5) * p.region_size;
        // Straight line through the square region along heading h.
        const double sx = cx - std::sin(h) * u - std::cos(h) * cx;
        const double sy = cy + std::cos(h) * u - std::sin(h) * cy;
        Trajectory traj;
        traj.person_id = id;
        int step = 0;
        for (double s = 0.0; s <= p.region_size; s += p.speed * p.dt) {
          auto [n1, n2] = rng.normal_pair();
          traj.samples.push_back(
              {ts + step * p.dt,
               State{sx + s * std::cos(h) + p.noise * n1,
                     sy + s * std::sin(h) + p.noise * n2, p.speed, h}});
          step++;
        }
        if (traj.samples.size() >= 2) {
          double heading = 0.0;
          for (size_t j = 1; j < traj.samples.size(); ++j) {
            const double dx =
                traj.samples[j].state.x - traj.samples[j - 1].state.x;
            const double dy =
                traj.samples[j].state.y - traj.samples[j - 1].state.y;
            const double dist = std::hypot(dx, dy);
            if (dist > 1e-9) heading = wrap_angle(std::atan2(dy, dx));
            traj.samples[j].state.speed = dist / p.dt;
            traj.samples[j].state.heading = heading;
          }
          traj.samples[0].state.speed = traj.samples[1].state.speed;
          traj.samples[0].state.heading = traj.samples[1].state.heading;
        }
        out.push_back(std::move(traj));
        break;
      }
      case Scenario::kTimeVarying: {
        const double ts =
            p.base_time + rng.uniform() * (p.n_days * kSecondsPerDay);
        const auto phase = static_cast<std::int64_t>(
            std::floor((ts - p.base_time) / p.flip_period));
        const bool reverse = (phase % 2) != 0;
        const double speed = reverse ? p.speed_b : p.speed_a;
        const double total =
            p.curved ? 2.0 * p.leg_length + kPi * p.bend_radius / 2.0
                     : p.corridor_length;
        out.push_back(walk_path(id, ts, p, speed, total, reverse, offset,
                                p.curved ? bend_adapter : corridor_adapter,
                                rng));
        break;
      }
    }
  }
  return out;
}

}  // namespace modflow
