#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

#include "deconv/numeric.hpp"

namespace deconv {

using cplx = std::complex<double>;

// Symmetric frequency grid t_j = (j - c) * dt covering [-t_max, t_max].
// n is odd so t = 0 is an exact node at index c = (n - 1) / 2.
class FrequencyGrid {
 public:
  FrequencyGrid(double t_max, std::size_t n)
      : t_max_(t_max), n_(n), dt_(2.0 * t_max / static_cast<double>(n - 1)) {}

  double t_max() const { return t_max_; }
  std::size_t size() const { return n_; }
  std::size_t center() const { return (n_ - 1) / 2; }
  double dt() const { return dt_; }

  double node(std::size_t j) const {
    return (static_cast<double>(j) - static_cast<double>(center())) * dt_;
  }

  // Composite trapezoid weight.
  double qw(std::size_t j) const {
    return (j == 0 || j + 1 == n_) ? 0.5 * dt_ : dt_;
  }

 private:
  double t_max_;
  std::size_t n_;
  double dt_;
};

using GridPtr = std::shared_ptr<const FrequencyGrid>;

inline GridPtr make_grid(double t_max, std::size_t n) {
  if (!(t_max > 0.0)) throw ConfigError("grid: t_max must be positive");
  if (n < 3 || n % 2 == 0)
    throw ConfigError("grid: n_points must be odd and at least 3");
  return std::make_shared<const FrequencyGrid>(t_max, n);
}

inline bool same_geometry(const FrequencyGrid& a, const FrequencyGrid& b) {
  return a.size() == b.size() && a.t_max() == b.t_max();
}

// Weight l_s(t) = (1 + t^2)^{s/2}; s = 0 gives the plain L2 geometry.
struct SobolevWeight {
  double s = 0.0;
};

inline double sobolev_weight_eval(const SobolevWeight& w, double t) {
  if (w.s == 0.0) return 1.0;
  return std::pow(1.0 + t * t, 0.5 * w.s);
}

// A function of frequency sampled on a shared grid.
struct SpectralFunction {
  GridPtr grid;
  std::vector<cplx> values;
  bool hermitian = false;  // values(-t) == conj(values(t))

  SpectralFunction() = default;
  SpectralFunction(GridPtr g, std::vector<cplx> v, bool herm)
      : grid(std::move(g)), values(std::move(v)), hermitian(herm) {
    if (!grid || values.size() != grid->size())
      throw NumericError("spectral function: value count does not match grid");
  }
};

template <class F>
SpectralFunction tabulate(GridPtr g, F&& fn, bool hermitian) {
  std::vector<cplx> v(g->size());
  for (std::size_t j = 0; j < g->size(); ++j) v[j] = cplx(fn(g->node(j)));
  return SpectralFunction(std::move(g), std::move(v), hermitian);
}

// Squared norm with weight l_s^2 = (1 + t^2)^s under trapezoid quadrature.
inline double weighted_l2_norm_sq(const SpectralFunction& f,
                                  const SobolevWeight& w) {
  const FrequencyGrid& g = *f.grid;
  double acc = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const double t = g.node(j);
    const double lw = (w.s == 0.0) ? 1.0 : std::pow(1.0 + t * t, w.s);
    acc += g.qw(j) * lw * std::norm(f.values[j]);
  }
  return acc;
}

inline double weighted_l2_norm_sq(const SpectralFunction& f, double s) {
  return weighted_l2_norm_sq(f, SobolevWeight{s});
}

struct TailReport {
  bool ok = false;
  double fraction = 0.0;  // share of the weighted norm in the outer nodes
};

// Measures how much of the weighted norm sits in the outermost 10% of nodes
// (5% per side). A large fraction means the grid edge truncates the integrand
// and reported norms cannot be trusted.
inline TailReport tail_check(const SpectralFunction& f, const SobolevWeight& w,
                             double tol) {
  if (!(tol > 0.0)) throw ConfigError("tail_check: tol must be positive");
  const FrequencyGrid& g = *f.grid;
  const std::size_t n = g.size();
  const std::size_t q = std::max<std::size_t>(1, n / 20);
  double total = 0.0;
  double tail = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = g.node(j);
    const double lw = (w.s == 0.0) ? 1.0 : std::pow(1.0 + t * t, w.s);
    const double term = g.qw(j) * lw * std::norm(f.values[j]);
    total += term;
    if (j < q || j >= n - q) tail += term;
  }
  const double fraction = (total > 0.0) ? tail / total : 0.0;
  return TailReport{fraction < tol, fraction};
}

// Pointwise inverse transform g(x) = (2 pi)^{-1/2} Integral e^{itx} f(t) dt
// for hermitian spectra. The phase walks outward from t = 0 by a
// multiplicative recurrence; the Newton step 1.5 - 0.5 |w|^2 keeps the phase
// modulus at 1 to rounding, so long grids do not drift.
inline double inverse_transform_point(const SpectralFunction& f, double x) {
  const FrequencyGrid& g = *f.grid;
  const std::size_t c = g.center();
  const cplx q(std::cos(g.dt() * x), std::sin(g.dt() * x));
  cplx w(1.0, 0.0);
  cplx acc = g.qw(c) * f.values[c];
  for (std::size_t k = 1; k <= c; ++k) {
    w *= q;
    w *= 1.5 - 0.5 * std::norm(w);
    acc += g.qw(c + k) * f.values[c + k] * w;
    acc += g.qw(c - k) * f.values[c - k] * std::conj(w);
  }
  const double tol = 1e-9 * std::max(1.0, std::abs(acc.real()));
  if (std::abs(acc.imag()) > tol)
    throw NumericError("inverse transform: non-negligible imaginary residue");
  return kInvSqrt2Pi * acc.real();
}

inline std::vector<double> inverse_transform_at(const SpectralFunction& f,
                                                const std::vector<double>& xs) {
  if (!f.hermitian)
    throw NumericError("inverse transform: spectrum must be hermitian");
  std::vector<double> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    out[i] = inverse_transform_point(f, xs[i]);
  return out;
}

inline double inverse_transform_at(const SpectralFunction& f, double x) {
  if (!f.hermitian)
    throw NumericError("inverse transform: spectrum must be hermitian");
  return inverse_transform_point(f, x);
}

}  // namespace deconv
