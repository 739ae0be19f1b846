#include <doctest.h>


#include <stdexcept>
#include <cmath>
#include <vector>

#include "modflow/rng.hpp"
#include "modflow/swgmm.hpp"

using namespace modflow;

namespace {

// Wrapped draws from a single (heading, speed) Gaussian, test-side
// generator independent of the fitting code.
std::vector<Velocity> draw_gaussian(double mu_t, double mu_r, double sd_t,
                                    double sd_r, int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Velocity> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    auto [z1, z2] = rng.normal_pair();
    out.push_back({mu_r + sd_r * z2, wrap_angle(mu_t + sd_t * z1)});
  }
  return out;
}

SWGMM unimodal(double mu_t, double mu_r, double var_t, double var_r) {
  SWGMM m;
  m.components.push_back({1.0, mu_t, mu_r, {var_t, 0.0, var_r}});
  m.motion_intensity = 1.0;
  return m;
}

}  // namespace

TEST_CASE("swgmm_pdf at the mean matches direct summation") {
  const SWGMM m = unimodal(0.0, 1.0, 0.1, 0.1);
  // Direct evaluation: sum over wrap shifts of the bivariate normal.
  double expected = 0.0;
  for (int k = -1; k <= 1; ++k) {
    const double dt = kTwoPi * k;
    expected += std::exp(-0.5 * dt * dt / 0.1) / (kTwoPi * 0.1);
  }
  CHECK(swgmm_pdf(m, {1.0, 0.0}) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(swgmm_pdf(m, {1.0, 0.0}) ==
        doctest::Approx(1.0 / (kTwoPi * 0.1)).epsilon(1e-6));
}

TEST_CASE("swgmm_pdf wrap continuity at the seam") {
  const SWGMM m = unimodal(0.0, 1.0, 0.1, 0.1);
  const double a = swgmm_pdf(m, {1.0, wrap_angle(kPi)});
  const double b = swgmm_pdf(m, {1.0, -kPi + 1e-9});
  CHECK(a == doctest::Approx(b).epsilon(1e-6));
}

TEST_CASE("swgmm_pdf permutation symmetry") {
  SWGMM m;
  m.components.push_back({0.5, kPi / 2.0, 1.0, {0.2, 0.0, 0.05}});
  m.components.push_back({0.5, -kPi / 2.0, 1.0, {0.2, 0.0, 0.05}});
  SWGMM swapped = m;
  std::swap(swapped.components[0], swapped.components[1]);
  const Velocity q{1.0, 0.0};
  CHECK(swgmm_pdf(m, q) == doctest::Approx(swgmm_pdf(swapped, q)));
}

TEST_CASE("swgmm_pdf integrates to ~1") {
  const SWGMM m = unimodal(0.5, 1.3, 0.1, 0.04);  // speed 6.5 sd above zero
  // Midpoint rule over theta x rho.
  const int nt = 400, nr = 400;
  const double rho_max = 3.0;
  double integral = 0.0;
  for (int i = 0; i < nt; ++i) {
    const double theta = -kPi + (i + 0.5) * kTwoPi / nt;
    for (int j = 0; j < nr; ++j) {
      const double rho = (j + 0.5) * rho_max / nr;
      integral += swgmm_pdf(m, {rho, theta}) * (kTwoPi / nt) * (rho_max / nr);
    }
  }
  CHECK(integral == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("fit_swgmm rejects too few observations") {
  EMConfig cfg;
  const auto obs = draw_gaussian(0.0, 1.0, 0.2, 0.1, 5, 1);
  CHECK_THROWS_AS(fit_swgmm(obs, cfg), InsufficientDataError);
}

TEST_CASE("fit_swgmm recovers a single Gaussian") {
  const auto obs = draw_gaussian(0.5, 1.3, std::sqrt(0.05), std::sqrt(0.02),
                                 500, 42);
  EMConfig cfg;
  FitTrace trace;
  const SWGMM m = fit_swgmm(obs, cfg, &trace);
  CHECK(trace.selected_components == 1);
  REQUIRE(m.components.size() == 1);
  CHECK(m.components[0].mean_heading == doctest::Approx(0.5).epsilon(0.1));
  CHECK(std::abs(m.components[0].mean_heading - 0.5) < 0.05);
  CHECK(std::abs(m.components[0].mean_speed - 1.3) < 0.05);
  CHECK(m.components[0].cov.tt == doctest::Approx(0.05).epsilon(0.3));
  CHECK(m.components[0].cov.rr == doctest::Approx(0.02).epsilon(0.3));
  CHECK(m.observation_count == 500);
}

TEST_CASE("fit_swgmm separates two opposing modes") {
  auto obs = draw_gaussian(0.0, 1.0, 0.2, 0.1, 250, 7);
  const auto other = draw_gaussian(kPi - 1e-6, 1.0, 0.2, 0.1, 250, 8);
  obs.insert(obs.end(), other.begin(), other.end());
  EMConfig cfg;
  FitTrace trace;
  const SWGMM m = fit_swgmm(obs, cfg, &trace);
  REQUIRE(m.components.size() == 2);
  for (const auto& c : m.components) {
    CHECK(c.weight > 0.4);
    CHECK(c.weight < 0.6);
    const bool near_zero = std::abs(angle_diff(c.mean_heading, 0.0)) < 0.2;
    const bool near_pi = std::abs(angle_diff(c.mean_heading, kPi)) < 0.2;
    CHECK((near_zero || near_pi));
  }
  double wsum = 0.0;
  for (const auto& c : m.components) wsum += c.weight;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("EM log-likelihood is non-decreasing") {
  auto obs = draw_gaussian(1.0, 1.2, 0.3, 0.15, 300, 21);
  const auto other = draw_gaussian(-2.0, 0.8, 0.3, 0.15, 200, 22);
  obs.insert(obs.end(), other.begin(), other.end());
  EMConfig cfg;
  FitTrace trace;
  fit_swgmm(obs, cfg, &trace);
  REQUIRE(trace.log_likelihoods.size() >= 2);
  for (size_t i = 1; i < trace.log_likelihoods.size(); ++i) {
    CHECK(trace.log_likelihoods[i] >= trace.log_likelihoods[i - 1] - 1e-8);
  }
}

TEST_CASE("fit then pdf: held-out log-likelihood close to truth") {
  const double sd_t = std::sqrt(0.05), sd_r = std::sqrt(0.02);
  const auto train = draw_gaussian(0.3, 1.2, sd_t, sd_r, 500, 33);
  const auto held = draw_gaussian(0.3, 1.2, sd_t, sd_r, 500, 34);
  EMConfig cfg;
  const SWGMM fit = fit_swgmm(train, cfg);
  const SWGMM truth = unimodal(0.3, 1.2, 0.05, 0.02);
  double ll_fit = 0.0, ll_truth = 0.0;
  for (const auto& v : held) {
    ll_fit += std::log(swgmm_pdf(fit, v));
    ll_truth += std::log(swgmm_pdf(truth, v));
  }
  CHECK(std::abs(ll_fit / held.size() - ll_truth / held.size()) <
        0.05 * std::abs(ll_truth / held.size()));
}

TEST_CASE("fit_swgmm is deterministic given a seed") {
  const auto obs = draw_gaussian(0.5, 1.3, 0.2, 0.1, 200, 55);
  EMConfig cfg;
  const SWGMM a = fit_swgmm(obs, cfg);
  const SWGMM b = fit_swgmm(obs, cfg);
  REQUIRE(a.components.size() == b.components.size());
  for (size_t i = 0; i < a.components.size(); ++i) {
    CHECK(a.components[i].weight == b.components[i].weight);
    CHECK(a.components[i].mean_heading == b.components[i].mean_heading);
    CHECK(a.components[i].mean_speed == b.components[i].mean_speed);
  }
}

TEST_CASE("mat2_floor_eigenvalues") {
  const Mat2 m{1e-8, 0.0, 2.0};
  const Mat2 f = mat2_floor_eigenvalues(m, 1e-4);
  auto [l1, l2] = mat2_eigenvalues(f);
  CHECK(l1 >= 1e-4 - 1e-15);
  CHECK(l2 == doctest::Approx(2.0));
  // already-valid matrix untouched
  const Mat2 ok{0.5, 0.1, 0.4};
  const Mat2 same = mat2_floor_eigenvalues(ok, 1e-4);
  CHECK(same.tt == ok.tt);
  CHECK(same.tr == ok.tr);
  CHECK(same.rr == ok.rr);
}
