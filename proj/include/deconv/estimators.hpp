#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "deconv/grid.hpp"
#include "deconv/kernels.hpp"
#include "deconv/numeric.hpp"

namespace deconv {

struct EcfEstimate {
  SpectralFunction spectrum;
  std::size_t m = 0;
};

namespace detail {

// Accumulates sum_j exp(-i t_k x_j) for the nonnegative half of the grid,
// k = 0..k_max. Each sample contributes a phase walk w -> w * q with
// q = exp(-i dt x); the Newton step keeps |w| pinned to 1, so the walk does
// not drift over thousands of nodes. Four samples advance together to hide
// the multiplication latency of the recurrence.
inline void ecf_accumulate(const std::vector<double>& samples, double dt,
                           std::size_t k_max, std::vector<cplx>& acc) {
  const std::size_t m = samples.size();
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const cplx q0(std::cos(dt * samples[i]), -std::sin(dt * samples[i]));
    const cplx q1(std::cos(dt * samples[i + 1]), -std::sin(dt * samples[i + 1]));
    const cplx q2(std::cos(dt * samples[i + 2]), -std::sin(dt * samples[i + 2]));
    const cplx q3(std::cos(dt * samples[i + 3]), -std::sin(dt * samples[i + 3]));
    cplx w0(1.0, 0.0), w1(1.0, 0.0), w2(1.0, 0.0), w3(1.0, 0.0);
    acc[0] += 4.0;
    for (std::size_t k = 1; k <= k_max; ++k) {
      w0 *= q0;
      w1 *= q1;
      w2 *= q2;
      w3 *= q3;
      w0 *= 1.5 - 0.5 * std::norm(w0);
      w1 *= 1.5 - 0.5 * std::norm(w1);
      w2 *= 1.5 - 0.5 * std::norm(w2);
      w3 *= 1.5 - 0.5 * std::norm(w3);
      acc[k] += (w0 + w1) + (w2 + w3);
    }
  }
  for (; i < m; ++i) {
    const cplx q(std::cos(dt * samples[i]), -std::sin(dt * samples[i]));
    cplx w(1.0, 0.0);
    acc[0] += 1.0;
    for (std::size_t k = 1; k <= k_max; ++k) {
      w *= q;
      w *= 1.5 - 0.5 * std::norm(w);
      acc[k] += w;
    }
  }
}

// ECF restricted to |t| <= t_{k_max}; nodes beyond stay exactly zero. Used
// where a kernel transform multiplies them away regardless.
inline SpectralFunction ecf_spectrum(const std::vector<double>& samples,
                                     GridPtr grid, std::size_t k_max) {
  const FrequencyGrid& g = *grid;
  const std::size_t c = g.center();
  std::vector<cplx> acc(k_max + 1, cplx(0.0, 0.0));
  ecf_accumulate(samples, g.dt(), k_max, acc);
  const auto md = static_cast<double>(samples.size());
  std::vector<cplx> v(g.size(), cplx(0.0, 0.0));
  // acc[0] == m exactly, so the division pins the origin value
  v[c] = cplx((acc[0].real() / md) * kInvSqrt2Pi, 0.0);
  for (std::size_t k = 1; k <= k_max; ++k) {
    const cplx val = (acc[k] / md) * kInvSqrt2Pi;
    v[c + k] = val;
    v[c - k] = std::conj(val);
  }
  return SpectralFunction(std::move(grid), std::move(v), true);
}

}  // namespace detail

// Empirical characteristic transform of a sample, hermitian by construction
// (the negative half is the exact conjugate mirror of the positive half).
inline EcfEstimate ecf(const std::vector<double>& samples, GridPtr grid) {
  if (samples.empty()) throw DataError("ecf: empty sample");
  const std::size_t c = grid->center();
  return EcfEstimate{detail::ecf_spectrum(samples, std::move(grid), c),
                     samples.size()};
}

// Direct single-point evaluation, O(m); the grid-free cross-check of ecf.
inline cplx ecf_at(const std::vector<double>& samples, double t) {
  if (samples.empty()) throw DataError("ecf: empty sample");
  cplx acc(0.0, 0.0);
  for (const double x : samples)
    acc += cplx(std::cos(t * x), -std::sin(t * x));
  // Divide by the count first: at t = 0 the accumulator is exactly the
  // count, so the probe lands on kInvSqrt2Pi without rounding.
  return acc / static_cast<double>(samples.size()) * kInvSqrt2Pi;
}

// h = c * n^{-1/(2r+1)}.
inline double bandwidth_rule(std::size_t n, double r, double c) {
  if (n < 1) throw ConfigError("bandwidth_rule: n must be at least 1");
  if (!(r > 0.0))
    throw ConfigError("bandwidth_rule: kernel order r must be positive");
  if (!(c > 0.0)) throw ConfigError("bandwidth_rule: c must be positive");
  return c * std::pow(static_cast<double>(n), -1.0 / (2.0 * r + 1.0));
}

// Transform of the kernel density estimate, computed analytically as
// sqrt(2 pi) ft(h t) times the empirical transform of the sample. This is the
// exact transform of the smoothed estimator for a symmetric kernel; there is
// no spatial discretization step. Nodes where ft(h t) vanishes (or underflows)
// are zero by the product, so the empirical transform is only accumulated up
// to the last node where the kernel factor survives.
inline SpectralFunction kde_spectrum(const std::vector<double>& samples,
                                     const KernelSpec& kernel, double h,
                                     GridPtr grid) {
  if (!(h > 0.0)) throw ConfigError("kde_spectrum: bandwidth must be positive");
  if (samples.empty()) throw DataError("kde_spectrum: empty sample");
  const FrequencyGrid& g = *grid;
  const std::size_t c = g.center();
  std::size_t k_max = 0;
  for (std::size_t k = c; k >= 1; --k) {
    if (kernel.ft(h * g.node(c + k)) != 0.0) {
      k_max = k;
      break;
    }
  }
  SpectralFunction f = detail::ecf_spectrum(samples, std::move(grid), k_max);
  for (std::size_t k = 0; k <= k_max; ++k) {
    // sqrt(2 pi) ft written as ft / ft(0): a flat pass band damps by
    // exactly 1, so the sinc kernel is a pure truncation.
    const double factor = kernel.ft(h * g.node(c + k)) / kInvSqrt2Pi;
    f.values[c + k] *= factor;
    if (k > 0) f.values[c - k] *= factor;
  }
  return f;
}

enum class Provenance { known_eps, estimated_eps };

// A spectral cut-off estimate: the spectrum, the indicator set it was built
// with, and whether the error transform in the denominator was the true cf or
// an empirical one.
struct DeconvEstimate {
  SpectralFunction spectrum;
  double s = 0.0;
  double alpha = 0.0;
  std::vector<unsigned char> keep_mask;
  Provenance provenance = Provenance::known_eps;

  double mask_fraction() const {
    std::size_t kept = 0;
    for (const auto b : keep_mask) kept += b;
    return static_cast<double>(kept) / static_cast<double>(keep_mask.size());
  }

  // Largest |t| of a kept node; 0 when nothing is kept.
  double mask_edge() const {
    double edge = 0.0;
    for (std::size_t j = 0; j < keep_mask.size(); ++j)
      if (keep_mask[j])
        edge = std::max(edge, std::abs(spectrum.grid->node(j)));
    return edge;
  }
};

namespace detail {

enum class CutoffValue { pass_through, ratio };

// Shared core: build the indicator {|e / l_s|^2 >= alpha} (ties keep the
// node) and either pass the first argument through on the kept set
// (noiseless target) or divide out the error transform. On the kept set the
// denominator is at least alpha * l_s^2 > 0, so the mask is the only guard
// needed.
inline DeconvEstimate spectral_cutoff(const SpectralFunction& num,
                                      const SpectralFunction& e, double s,
                                      double alpha, Provenance prov,
                                      CutoffValue mode) {
  if (!(alpha > 0.0)) throw ConfigError("spectral cutoff: alpha must be positive");
  if (!num.grid || !e.grid || !same_geometry(*num.grid, *e.grid))
    throw ConfigError("spectral cutoff: inputs on different grids");
  const FrequencyGrid& g = *num.grid;
  std::vector<cplx> v(g.size(), cplx(0.0, 0.0));
  std::vector<unsigned char> mask(g.size(), 0);
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double t = g.node(j);
    const double l2 = (s == 0.0) ? 1.0 : std::pow(1.0 + t * t, s);
    const double e2 = std::norm(e.values[j]);
    if (e2 >= alpha * l2) {
      mask[j] = 1;
      v[j] = (mode == CutoffValue::pass_through)
                 ? num.values[j]
                 : num.values[j] * std::conj(e.values[j]) / (kSqrt2Pi * e2);
    }
  }
  DeconvEstimate out;
  out.spectrum = SpectralFunction(num.grid, std::move(v),
                                  num.hermitian && e.hermitian);
  out.s = s;
  out.alpha = alpha;
  out.keep_mask = std::move(mask);
  out.provenance = prov;
  return out;
}

}  // namespace detail

// The noiseless truncated target: x_cf on the kept set, zero elsewhere. What
// the cut-off estimators converge to at fixed alpha.
inline DeconvEstimate regularized_target(const SpectralFunction& x_cf,
                                         const SpectralFunction& eps_cf,
                                         double s, double alpha) {
  return detail::spectral_cutoff(x_cf, eps_cf, s, alpha,
                                 Provenance::known_eps,
                                 detail::CutoffValue::pass_through);
}

inline DeconvEstimate deconv_known(const SpectralFunction& y_spectrum,
                                   const SpectralFunction& eps_cf, double s,
                                   double alpha) {
  return detail::spectral_cutoff(y_spectrum, eps_cf, s, alpha,
                                 Provenance::known_eps,
                                 detail::CutoffValue::ratio);
}

inline DeconvEstimate deconv_unknown(const SpectralFunction& y_spectrum,
                                     const EcfEstimate& eps_ecf, double s,
                                     double alpha) {
  return detail::spectral_cutoff(y_spectrum, eps_ecf.spectrum, s, alpha,
                                 Provenance::estimated_eps,
                                 detail::CutoffValue::ratio);
}

// Nodewise multiplication by (-it)^k, the transform of the k-th derivative.
inline SpectralFunction derivative_spectrum(const DeconvEstimate& est, int k) {
  if (k < 0) throw ConfigError("derivative_spectrum: order must be >= 0");
  if (static_cast<double>(k) > est.s)
    throw ConfigError(
        "derivative_spectrum: order " + std::to_string(k) +
        " exceeds the estimate's Sobolev index; the risk guarantee does not "
        "cover it");
  static const cplx cycle[4] = {cplx(1, 0), cplx(0, -1), cplx(-1, 0),
                                cplx(0, 1)};
  const cplx rot = cycle[k % 4];
  const FrequencyGrid& g = *est.spectrum.grid;
  std::vector<cplx> v(g.size());
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double t = g.node(j);
    v[j] = est.spectrum.values[j] * rot *
           ((k == 0) ? 1.0 : std::pow(t, static_cast<double>(k)));
  }
  return SpectralFunction(est.spectrum.grid, std::move(v),
                          est.spectrum.hermitian);
}

}  // namespace deconv
