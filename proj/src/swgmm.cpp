#include "modflow/swgmm.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace modflow {

std::pair<double, double> mat2_eigenvalues(const Mat2& m) {
  const double mid = 0.5 * (m.tt + m.rr);
  const double disc = std::hypot(0.5 * (m.tt - m.rr), m.tr);
  return {mid - disc, mid + disc};
}

Mat2 mat2_floor_eigenvalues(const Mat2& m, double min_eig) {
  auto [l1, l2] = mat2_eigenvalues(m);
  if (l1 >= min_eig) return m;
  // Eigenvector basis of the symmetric matrix.
  double vx, vy;  // eigenvector for l2 (larger)
  if (std::abs(m.tr) > 1e-300) {
    vx = m.tr;
    vy = l2 - m.tt;
  } else if (m.tt >= m.rr) {
    vx = 1.0;
    vy = 0.0;
  } else {
    vx = 0.0;
    vy = 1.0;
  }
  const double norm = std::hypot(vx, vy);
  vx /= norm;
  vy /= norm;
  const double e1 = std::max(l1, min_eig);
  const double e2 = std::max(l2, min_eig);
  // M = e2 * v v^T + e1 * v_perp v_perp^T, with v_perp = (-vy, vx).
  Mat2 out;
  out.tt = e2 * vx * vx + e1 * vy * vy;
  out.tr = e2 * vx * vy - e1 * vx * vy;
  out.rr = e2 * vy * vy + e1 * vx * vx;
  return out;
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct GaussParams {
  double inv_tt, inv_tr, inv_rr;
  double log_norm;  // -log(2*pi) - 0.5*log(det)
};

GaussParams precompute(const Mat2& cov) {
  const double det = cov.det();
  if (!(det > 0.0)) {
    throw std::runtime_error("swgmm: singular covariance");
  }
  GaussParams g;
  g.inv_tt = cov.rr / det;
  g.inv_tr = -cov.tr / det;
  g.inv_rr = cov.tt / det;
  g.log_norm = -kLog2Pi - 0.5 * std::log(det);
  return g;
}

double log_gauss(const GaussParams& g, double dt, double dr) {
  const double q = g.inv_tt * dt * dt + 2.0 * g.inv_tr * dt * dr +
                   g.inv_rr * dr * dr;
  return g.log_norm - 0.5 * q;
}

}  // namespace

double swgmm_pdf(const SWGMM& model, const Velocity& v) {
  double density = 0.0;
  for (const auto& c : model.components) {
    const GaussParams g = precompute(c.cov);
    for (int k = -1; k <= 1; ++k) {
      const double dt = v.heading + kTwoPi * k - c.mean_heading;
      const double dr = v.speed - c.mean_speed;
      density += c.weight * std::exp(log_gauss(g, dt, dr));
    }
  }
  return density;
}

Velocity sample_swgmm(const SWGMM& model, Rng& rng) {
  const double u = rng.uniform();
  size_t idx = model.components.size() - 1;
  double cum = 0.0;
  for (size_t j = 0; j < model.components.size(); ++j) {
    cum += model.components[j].weight;
    if (u < cum) {
      idx = j;
      break;
    }
  }
  const auto& c = model.components[idx];
  auto [z1, z2] = rng.normal_pair();
  // Cholesky of the 2x2 covariance.
  const double l11 = std::sqrt(c.cov.tt);
  const double l21 = c.cov.tr / l11;
  const double l22 = std::sqrt(std::max(c.cov.rr - l21 * l21, 1e-300));
  const double heading = wrap_angle(c.mean_heading + l11 * z1);
  const double speed = std::max(0.0, c.mean_speed + l21 * z1 + l22 * z2);
  return {speed, heading};
}

namespace {

struct Embedded {
  double cx, cy, r;
};

double embed_dist2(const Embedded& a, const Embedded& b) {
  const double d1 = a.cx - b.cx, d2 = a.cy - b.cy, d3 = a.r - b.r;
  return d1 * d1 + d2 * d2 + d3 * d3;
}

// k-means++ seeding followed by Lloyd iterations on (cos t, sin t, r/scale).
std::vector<int> kmeans_labels(const std::vector<Embedded>& pts, int k,
                               Rng& rng) {
  const size_t n = pts.size();
  std::vector<Embedded> centers;
  centers.reserve(k);
  centers.push_back(pts[static_cast<size_t>(rng.uniform() * n) % n]);
  std::vector<double> d2(n);
  for (int c = 1; c < k; ++c) {
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::max();
      for (const auto& ctr : centers) best = std::min(best, embed_dist2(pts[i], ctr));
      d2[i] = best;
      total += best;
    }
    size_t pick = 0;
    if (total > 0.0) {
      double target = rng.uniform() * total;
      double cum = 0.0;
      for (size_t i = 0; i < n; ++i) {
        cum += d2[i];
        if (target < cum) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<size_t>(rng.uniform() * n) % n;
    }
    centers.push_back(pts[pick]);
  }

  std::vector<int> labels(n, 0);
  for (int iter = 0; iter < 20; ++iter) {
    bool changed = false;
    for (size_t i = 0; i < n; ++i) {
      int best = 0;
      double bd = std::numeric_limits<double>::max();
      for (int c = 0; c < k; ++c) {
        const double d = embed_dist2(pts[i], centers[c]);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (labels[i] != best) {
        labels[i] = best;
        changed = true;
      }
    }
    std::vector<Embedded> sums(k, {0, 0, 0});
    std::vector<int> counts(k, 0);
    for (size_t i = 0; i < n; ++i) {
      sums[labels[i]].cx += pts[i].cx;
      sums[labels[i]].cy += pts[i].cy;
      sums[labels[i]].r += pts[i].r;
      counts[labels[i]]++;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Re-seed an empty cluster at the point farthest from its center.
        size_t far = 0;
        double fd = -1.0;
        for (size_t i = 0; i < n; ++i) {
          const double d = embed_dist2(pts[i], centers[labels[i]]);
          if (d > fd) {
            fd = d;
            far = i;
          }
        }
        centers[c] = pts[far];
        labels[far] = c;
        changed = true;
      } else {
        centers[c] = {sums[c].cx / counts[c], sums[c].cy / counts[c],
                      sums[c].r / counts[c]};
      }
    }
    if (!changed) break;
  }
  return labels;
}

std::vector<SWGMMComponent> init_components(std::span<const Velocity> obs,
                                            int k, double rho_scale,
                                            double cov_floor, Rng& rng) {
  const size_t n = obs.size();
  std::vector<Embedded> pts(n);
  for (size_t i = 0; i < n; ++i) {
    pts[i] = {std::cos(obs[i].heading), std::sin(obs[i].heading),
              obs[i].speed / rho_scale};
  }
  const std::vector<int> labels =
      (k == 1) ? std::vector<int>(n, 0) : kmeans_labels(pts, k, rng);

  std::vector<SWGMMComponent> comps(k);
  for (int c = 0; c < k; ++c) {
    std::vector<double> angles, wts;
    double rho_sum = 0.0;
    int cnt = 0;
    for (size_t i = 0; i < n; ++i) {
      if (labels[i] != c) continue;
      angles.push_back(obs[i].heading);
      wts.push_back(1.0);
      rho_sum += obs[i].speed;
      cnt++;
    }
    if (cnt == 0) return {};  // k unsupportable (too few distinct points)
    SWGMMComponent comp;
    comp.weight = static_cast<double>(cnt) / n;
    comp.mean_speed = rho_sum / cnt;
    try {
      comp.mean_heading = circular_weighted_mean(angles, wts);
    } catch (const std::domain_error&) {
      comp.mean_heading = 0.0;
    }
    Mat2 cov;
    for (size_t i = 0; i < n; ++i) {
      if (labels[i] != c) continue;
      const double dt = angle_diff(obs[i].heading, comp.mean_heading);
      const double dr = obs[i].speed - comp.mean_speed;
      cov.tt += dt * dt;
      cov.tr += dt * dr;
      cov.rr += dr * dr;
    }
    cov.tt /= cnt;
    cov.tr /= cnt;
    cov.rr /= cnt;
    comp.cov = mat2_floor_eigenvalues(cov, cov_floor);
    comps[c] = comp;
  }
  return comps;
}

double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

struct EMResult {
  std::vector<SWGMMComponent> components;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  std::vector<double> trace;
  bool ok = false;
};

EMResult run_em(std::span<const Velocity> obs,
                std::vector<SWGMMComponent> comps, const EMConfig& cfg) {
  const size_t n = obs.size();
  const int k = static_cast<int>(comps.size());
  EMResult res;
  double prev_ll = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(3 * k);

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    std::vector<GaussParams> gp(k);
    for (int j = 0; j < k; ++j) gp[j] = precompute(comps[j].cov);

    std::vector<double> nj(k, 0.0), s_t(k, 0.0), s_r(k, 0.0);
    std::vector<double> s_tt(k, 0.0), s_tr(k, 0.0), s_rr(k, 0.0);
    double ll = 0.0;
    for (size_t i = 0; i < n; ++i) {
      for (int j = 0; j < k; ++j) {
        const double lw = std::log(std::max(comps[j].weight, 1e-300));
        for (int s = -1; s <= 1; ++s) {
          const double theta = obs[i].heading + kTwoPi * s;
          terms[(s + 1) * k + j] =
              lw + log_gauss(gp[j], theta - comps[j].mean_heading,
                             obs[i].speed - comps[j].mean_speed);
        }
      }
      const double lse = log_sum_exp(terms);
      if (!std::isfinite(lse)) return res;
      ll += lse;
      for (int j = 0; j < k; ++j) {
        for (int s = -1; s <= 1; ++s) {
          const double r = std::exp(terms[(s + 1) * k + j] - lse);
          if (r <= 0.0) continue;
          const double theta = obs[i].heading + kTwoPi * s;
          nj[j] += r;
          s_t[j] += r * theta;
          s_r[j] += r * obs[i].speed;
          s_tt[j] += r * theta * theta;
          s_tr[j] += r * theta * obs[i].speed;
          s_rr[j] += r * obs[i].speed * obs[i].speed;
        }
      }
    }
    res.trace.push_back(ll);

    for (int j = 0; j < k; ++j) {
      if (nj[j] < 1e-8) continue;  // keep a starved component frozen
      const double mt = s_t[j] / nj[j];
      const double mr = s_r[j] / nj[j];
      Mat2 cov;
      cov.tt = s_tt[j] / nj[j] - mt * mt;
      cov.tr = s_tr[j] / nj[j] - mt * mr;
      cov.rr = s_rr[j] / nj[j] - mr * mr;
      comps[j].weight = nj[j] / n;
      comps[j].mean_heading = wrap_angle(mt);
      comps[j].mean_speed = mr;
      comps[j].cov = mat2_floor_eigenvalues(cov, cfg.cov_floor);
    }
    // Renormalize weights against frozen components.
    double wsum = 0.0;
    for (const auto& c : comps) wsum += c.weight;
    for (auto& c : comps) c.weight /= wsum;

    if (std::isfinite(prev_ll) && std::abs(ll - prev_ll) < cfg.tolerance) {
      res.log_likelihood = ll;
      res.components = comps;
      res.ok = true;
      return res;
    }
    prev_ll = ll;
  }
  res.log_likelihood = prev_ll;
  res.components = comps;
  res.ok = std::isfinite(prev_ll);
  return res;
}

}  // namespace

SWGMM fit_swgmm(std::span<const Velocity> observations, const EMConfig& config,
                FitTrace* trace) {
  const size_t n = observations.size();
  if (n < static_cast<size_t>(config.min_observations)) {
    throw InsufficientDataError("fit_swgmm: too few observations");
  }
  double rho_mean = 0.0;
  for (const auto& v : observations) rho_mean += v.speed;
  rho_mean /= n;
  double rho_var = 0.0;
  for (const auto& v : observations) {
    rho_var += (v.speed - rho_mean) * (v.speed - rho_mean);
  }
  double rho_scale = std::sqrt(rho_var / n);
  if (rho_scale < 1e-6) rho_scale = 1.0;

  const int max_k =
      std::min<int>(config.max_components, static_cast<int>(n));
  EMResult best;
  double best_bic = std::numeric_limits<double>::max();
  int best_k = 1;
  for (int k = 1; k <= max_k; ++k) {
    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(k)));
    auto comps = init_components(observations, k, rho_scale,
                                 config.cov_floor, rng);
    if (comps.empty()) continue;
    EMResult r = run_em(observations, std::move(comps), config);
    if (!r.ok) continue;
    const double params = 6.0 * k - 1.0;
    const double bic =
        -2.0 * r.log_likelihood + params * std::log(static_cast<double>(n));
    if (bic < best_bic) {
      best_bic = bic;
      best = std::move(r);
      best_k = k;
    }
  }
  if (!best.ok) {
    throw std::runtime_error("fit_swgmm: EM failed for all component counts");
  }
  if (trace) {
    trace->log_likelihoods = best.trace;
    trace->selected_components = best_k;
  }
  SWGMM model;
  model.components = best.components;
  model.observation_count = static_cast<std::int64_t>(n);
  // Stable component order: descending weight, then heading.
  std::sort(model.components.begin(), model.components.end(),
            [](const SWGMMComponent& a, const SWGMMComponent& b) {
              if (a.weight != b.weight) return a.weight > b.weight;
              return a.mean_heading < b.mean_heading;
            });
  return model;
}

}  // namespace modflow
