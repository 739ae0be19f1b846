#include "modflow/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <future>
#include <stdexcept>

namespace modflow {

namespace {

// Compensated accumulator so aggregation is reproducible regardless of
// worker partitioning.
struct KahanSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double x) {
    const double y = x - c;
    const double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
};

double position_error(const State& a, const State& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace

double ade(std::span<const State> pred, std::span<const State> gt) {
  if (pred.empty() || gt.empty()) {
    throw std::invalid_argument("ade: empty sequence");
  }
  const size_t n = std::min(pred.size(), gt.size());
  KahanSum s;
  for (size_t i = 0; i < n; ++i) s.add(position_error(pred[i], gt[i]));
  return s.sum / static_cast<double>(n);
}

double fde(std::span<const State> pred, std::span<const State> gt) {
  if (pred.empty() || gt.empty()) {
    throw std::invalid_argument("fde: empty sequence");
  }
  const size_t n = std::min(pred.size(), gt.size());
  return position_error(pred[n - 1], gt[n - 1]);
}

namespace {

struct CaseResult {
  std::vector<PredictionResult> rollouts;
  double runtime_ms = 0.0;
};

double horizon_fitness(const PredictionResult& r, size_t n_steps) {
  const size_t n = std::min(n_steps, r.step_log_fitness.size());
  double f = 0.0;
  for (size_t i = 0; i < n; ++i) f += r.step_log_fitness[i];
  return f;
}

}  // namespace

EvalReport evaluate(std::span<const EvalCase> cases, const MoDSampler& sampler,
                    const PredictorParams& params,
                    std::span<const double> horizons,
                    const EvalOptions& options) {
  if (cases.empty()) throw std::invalid_argument("evaluate: no cases");
  for (double h : horizons) {
    if (h > params.T_p * params.dt + 1e-9) {
      throw std::invalid_argument("evaluate: horizon exceeds T_p * dt");
    }
  }

  std::vector<CaseResult> results(cases.size());
  auto run_case = [&](size_t i) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(mix_seed(options.seed, static_cast<std::uint64_t>(i)));
    CaseResult cr;
    if (sampler) {
      cr.rollouts = predict_ranked(cases[i].observation, sampler, params,
                                   cases[i].start_time, rng);
    } else {
      cr.rollouts.push_back(
          cvm_predict(cases[i].observation, params.T_p, params.dt,
                      params.obs_sigma, params.normalize_obs_weights));
    }
    const auto t1 = std::chrono::steady_clock::now();
    cr.runtime_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    results[i] = std::move(cr);
  };

  if (options.workers <= 1) {
    for (size_t i = 0; i < cases.size(); ++i) run_case(i);
  } else {
    std::atomic<size_t> next{0};
    auto worker = [&] {
      for (size_t i = next.fetch_add(1); i < cases.size();
           i = next.fetch_add(1)) {
        run_case(i);
      }
    };
    std::vector<std::future<void>> futs;
    for (int w = 0; w < options.workers; ++w) {
      futs.push_back(std::async(std::launch::async, worker));
    }
    for (auto& f : futs) f.get();
  }

  EvalReport report;
  KahanSum runtime;
  std::vector<bool> case_skipped(cases.size(), false);
  for (size_t i = 0; i < cases.size(); ++i) runtime.add(results[i].runtime_ms);
  report.mean_runtime_ms = runtime.sum / static_cast<double>(cases.size());

  for (double h : horizons) {
    const auto n_steps =
        static_cast<size_t>(std::llround(h / params.dt));
    KahanSum ade_sum, ade_sq, fde_sum, fde_sq;
    std::int64_t n_used = 0;
    for (size_t i = 0; i < cases.size(); ++i) {
      const auto& gt = cases[i].ground_truth;
      const auto& rollouts = results[i].rollouts;
      const size_t gt_n = std::min(n_steps, gt.size());
      if (gt_n == 0) continue;
      const std::span<const State> gt_span(gt.data(), gt_n);

      double case_ade = 0.0, case_fde = 0.0;
      bool has_metric = false;
      if (options.selection == Selection::kMeanOverK) {
        double a = 0.0, f = 0.0;
        int cnt = 0;
        for (const auto& r : rollouts) {
          if (r.states.empty()) continue;
          const size_t pn = std::min(n_steps, r.states.size());
          const std::span<const State> pred(r.states.data(), pn);
          a += ade(pred, gt_span);
          f += fde(pred, gt_span);
          cnt++;
        }
        if (cnt > 0) {
          case_ade = a / cnt;
          case_fde = f / cnt;
          has_metric = true;
        }
      } else {
        const PredictionResult* pick = nullptr;
        if (options.per_horizon_rerank) {
          double best = -std::numeric_limits<double>::infinity();
          size_t best_len = 0;
          for (const auto& r : rollouts) {
            if (r.states.empty()) continue;
            const double f = horizon_fitness(r, n_steps);
            const size_t len = std::min(n_steps, r.states.size());
            if (!pick || f > best || (f == best && len > best_len)) {
              pick = &r;
              best = f;
              best_len = len;
            }
          }
        } else {
          for (const auto& r : rollouts) {
            if (!r.states.empty()) {
              pick = &r;
              break;
            }
          }
        }
        if (pick) {
          const size_t pn = std::min(n_steps, pick->states.size());
          const std::span<const State> pred(pick->states.data(), pn);
          case_ade = ade(pred, gt_span);
          case_fde = fde(pred, gt_span);
          has_metric = true;
        }
      }
      if (!has_metric) {
        case_skipped[i] = true;
        continue;
      }
      ade_sum.add(case_ade);
      ade_sq.add(case_ade * case_ade);
      fde_sum.add(case_fde);
      fde_sq.add(case_fde * case_fde);
      n_used++;
      report.per_case.push_back({static_cast<std::int64_t>(i), h, case_ade,
                                 case_fde, results[i].runtime_ms});
    }
    if (n_used == 0) continue;
    MetricRow row;
    row.horizon = h;
    row.n_cases = n_used;
    const double n = static_cast<double>(n_used);
    row.ade_mean = ade_sum.sum / n;
    row.fde_mean = fde_sum.sum / n;
    if (n_used > 1) {
      row.ade_std = std::sqrt(
          std::max(0.0, (ade_sq.sum - n * row.ade_mean * row.ade_mean) /
                            (n - 1.0)));
      row.fde_std = std::sqrt(
          std::max(0.0, (fde_sq.sum - n * row.fde_mean * row.fde_mean) /
                            (n - 1.0)));
    }
    report.rows.push_back(row);
  }
  for (bool s : case_skipped) {
    if (s) report.skipped_cases++;
  }
  return report;
}

std::vector<EvalCase> make_cases(std::span<const Trajectory> trajs, int O_p,
                                 int T_p) {
  std::vector<EvalCase> cases;
  for (const auto& traj : trajs) {
    if (traj.samples.size() < static_cast<size_t>(O_p + 1)) continue;
    EvalCase c;
    for (int i = 0; i < O_p; ++i) {
      c.observation.push_back(traj.samples[i].state);
    }
    c.start_time = traj.samples[O_p - 1].t;
    const size_t end =
        std::min(traj.samples.size(), static_cast<size_t>(O_p + T_p));
    for (size_t i = O_p; i < end; ++i) {
      c.ground_truth.push_back(traj.samples[i].state);
    }
    cases.push_back(std::move(c));
  }
  return cases;
}

}  // namespace modflow
