#include "modflow/fremen.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "modflow/core.hpp"

namespace modflow {

FreMEnModel fit_fremen(std::span<const double> values,
                       std::span<const double> times,
                       std::span<const double> candidate_freqs, int m) {
  if (values.size() != times.size()) {
    throw std::invalid_argument("fit_fremen: values/times size mismatch");
  }
  FreMEnModel model;
  const size_t n = values.size();
  if (n == 0) return model;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  model.mean = mean;
  if (n < static_cast<size_t>(2 * m + 1)) return model;  // mean-only model

  struct Coeff {
    double freq;
    std::complex<double> c;
  };
  std::vector<Coeff> coeffs;
  coeffs.reserve(candidate_freqs.size());
  for (double omega : candidate_freqs) {
    std::complex<double> c(0.0, 0.0);
    for (size_t i = 0; i < n; ++i) {
      c += (values[i] - mean) *
           std::exp(std::complex<double>(0.0, -omega * times[i]));
    }
    c /= static_cast<double>(n);
    coeffs.push_back({omega, c});
  }
  std::stable_sort(coeffs.begin(), coeffs.end(),
                   [](const Coeff& a, const Coeff& b) {
                     return std::abs(a.c) > std::abs(b.c);
                   });
  const int keep = std::min<int>(m, static_cast<int>(coeffs.size()));
  for (int i = 0; i < keep; ++i) {
    model.components.push_back(
        {coeffs[i].freq, 2.0 * std::abs(coeffs[i].c), -std::arg(coeffs[i].c)});
  }
  return model;
}

double fremen_predict(const FreMEnModel& model, double t) {
  double v = model.mean;
  for (const auto& c : model.components) {
    v += c.amplitude * std::cos(c.freq * t - c.phase);
  }
  return std::clamp(v, 0.0, 1.0);
}

std::vector<double> daily_harmonics(int n) {
  std::vector<double> out;
  out.reserve(n);
  for (int i = 1; i <= n; ++i) out.push_back(kTwoPi * i / kSecondsPerDay);
  return out;
}

}  // namespace modflow
