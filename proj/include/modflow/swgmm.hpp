#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "modflow/core.hpp"
#include "modflow/rng.hpp"

namespace modflow {

/// Symmetric 2x2 matrix over (heading, speed): [[tt, tr], [tr, rr]].
struct Mat2 {
  double tt = 0.0;
  double tr = 0.0;
  double rr = 0.0;

  double det() const { return tt * rr - tr * tr; }
};

/// Eigenvalues of a symmetric 2x2 matrix, ascending.
std::pair<double, double> mat2_eigenvalues(const Mat2& m);

/// Returns m with eigenvalues floored at min_eig (keeps eigenvectors).
Mat2 mat2_floor_eigenvalues(const Mat2& m, double min_eig);

struct SWGMMComponent {
  double weight = 1.0;
  double mean_heading = 0.0;  // rad, in [-pi, pi)
  double mean_speed = 0.0;    // m/s
  Mat2 cov;
};

/// Semi-wrapped Gaussian mixture over (heading, speed) at one location.
struct SWGMM {
  std::vector<SWGMMComponent> components;
  double motion_intensity = 0.0;  // in [0, 1]
  std::int64_t observation_count = 1;
};

struct EMConfig {
  int min_observations = 10;
  int max_components = 5;
  int max_iterations = 200;
  double tolerance = 1e-6;
  double cov_floor = 1e-4;
  std::uint64_t seed = 12345;
};

struct InsufficientDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mixture density at v, wrapping the heading dimension with shifts
/// k in {-1, 0, 1}.
double swgmm_pdf(const SWGMM& model, const Velocity& v);

/// Per-K fitting diagnostics, exposed for tests.
struct FitTrace {
  std::vector<double> log_likelihoods;  // per EM iteration of the selected K
  int selected_components = 0;
};

/// Fits a semi-wrapped GMM by EM with BIC model selection over
/// 1..max_components. Throws InsufficientDataError below min_observations.
SWGMM fit_swgmm(std::span<const Velocity> observations, const EMConfig& config,
                FitTrace* trace = nullptr);

/// One draw from the mixture: component by weight, then a 2D Gaussian
/// draw; heading wrapped, speed clamped at 0. Consumes exactly three
/// engine calls.
Velocity sample_swgmm(const SWGMM& model, Rng& rng);

}  // namespace modflow
