#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "deconv/numeric.hpp"

namespace deconv {

enum class IndexKind { polynomial, logarithmic, sqrt_log_exp, custom };

// A calibration function kappa: (0, 1] -> R+, continuous, strictly
// increasing, vanishing at 0+. The polynomial kind is t^beta; the logarithmic
// kind is |log(c t)|^{-beta} with c = exp(-1-beta); the sqrt_log_exp kind is
// exp(-beta sqrt(|log(c t)|)) with c = exp(-max(beta^2, 2)). The offsets c
// make the latter two concave on their whole domain.
struct IndexFunction {
  IndexKind kind = IndexKind::polynomial;
  double beta = 1.0;
  double c = 1.0;
  bool concave = true;
  std::vector<std::pair<double, double>> table;  // custom kind only
};

inline IndexFunction make_index_polynomial(double beta) {
  if (!(beta > 0.0)) throw ConfigError("index function: beta must be positive");
  return IndexFunction{IndexKind::polynomial, beta, 1.0, beta <= 1.0, {}};
}

inline IndexFunction make_index_logarithmic(double beta) {
  if (!(beta > 0.0)) throw ConfigError("index function: beta must be positive");
  return IndexFunction{IndexKind::logarithmic, beta, std::exp(-1.0 - beta),
                       true, {}};
}

inline IndexFunction make_index_sqrt_log_exp(double beta) {
  if (!(beta > 0.0)) throw ConfigError("index function: beta must be positive");
  return IndexFunction{IndexKind::sqrt_log_exp, beta,
                       std::exp(-std::max(beta * beta, 2.0)), true, {}};
}

// Monotone table of (t, kappa) pairs, interpolated linearly. Concavity is
// whatever the caller declares it to be.
inline IndexFunction make_index_custom(
    std::vector<std::pair<double, double>> table, bool concave) {
  if (table.size() < 2)
    throw ConfigError("index function: custom table needs at least 2 points");
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (!(table[i].first > 0.0) || table[i].first > 1.0 ||
        !(table[i].second > 0.0))
      throw ConfigError("index function: custom table out of domain");
    if (i > 0 && (table[i].first <= table[i - 1].first ||
                  table[i].second <= table[i - 1].second))
      throw ConfigError("index function: custom table must increase strictly");
  }
  return IndexFunction{IndexKind::custom, 0.0, 1.0, concave, std::move(table)};
}

inline double index_eval(const IndexFunction& k, double t) {
  if (!(t > 0.0) || t > 1.0)
    throw ConfigError("index function: argument outside (0, 1]");
  switch (k.kind) {
    case IndexKind::polynomial:
      return std::pow(t, k.beta);
    case IndexKind::logarithmic:
      // c t <= c < 1, so log(c t) < 0 on the whole domain
      return std::pow(-std::log(k.c * t), -k.beta);
    case IndexKind::sqrt_log_exp:
      return std::exp(-k.beta * std::sqrt(-std::log(k.c * t)));
    case IndexKind::custom: {
      const auto& tab = k.table;
      if (t <= tab.front().first)
        return tab.front().second * (t / tab.front().first);
      auto it = std::lower_bound(
          tab.begin(), tab.end(), t,
          [](const std::pair<double, double>& p, double v) {
            return p.first < v;
          });
      if (it == tab.end()) return tab.back().second;
      if (it == tab.begin()) return it->second;
      const auto& [t1, v1] = *(it - 1);
      const auto& [t2, v2] = *it;
      return v1 + (v2 - v1) * (t - t1) / (t2 - t1);
    }
  }
  throw ConfigError("index function: unknown kind");
}

inline double index_domain_max_value(const IndexFunction& k) {
  return index_eval(k, 1.0);
}

// Inverse of index_eval: the Phi with kappa(Phi(v)) = v. Closed forms where
// the kind has one, bisection for custom tables.
inline double index_inverse(const IndexFunction& k, double v) {
  if (!(v > 0.0)) throw ConfigError("index inverse: value must be positive");
  const double top = index_domain_max_value(k);
  if (v > top * (1.0 + 1e-12))
    throw ConfigError("index inverse: value outside the function's range");
  if (v >= top) return 1.0;
  switch (k.kind) {
    case IndexKind::polynomial:
      return std::pow(v, 1.0 / k.beta);
    case IndexKind::logarithmic:
      return std::exp(-std::pow(v, -1.0 / k.beta)) / k.c;
    case IndexKind::sqrt_log_exp: {
      const double y = std::log(v) / k.beta;  // negative
      return std::exp(-y * y) / k.c;
    }
    case IndexKind::custom: {
      double lo = k.table.front().first * 1e-12;
      double hi = 1.0;
      for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
        const double mid = 0.5 * (lo + hi);
        (index_eval(k, mid) < v ? lo : hi) = mid;
      }
      return 0.5 * (lo + hi);
    }
  }
  throw ConfigError("index function: unknown kind");
}

namespace detail {

// omega^{-1}(t) = t Phi(t), strictly increasing on (0, 1].
inline double omega_inv(const IndexFunction& k, double t) {
  return t * index_inverse(k, t);
}

}  // namespace detail

// Solves omega(delta): the t with t * Phi(t) = delta. sqrt_log_exp has a
// closed form through the square-completion of its exponent; everything else
// is bisection on the increasing t Phi(t), bracketed inside kappa's range,
// with relative residual below 1e-12.
inline double omega_eval(const IndexFunction& k, double delta) {
  if (!(delta > 0.0)) throw ConfigError("omega: delta must be positive");
  const double top = index_domain_max_value(k);
  if (delta > detail::omega_inv(k, top) * (1.0 + 1e-12))
    throw ConfigError("omega: delta above the reachable range");
  if (k.kind == IndexKind::sqrt_log_exp) {
    // omega^{-1}(s) = exp(-h(-log s)) * cp with h(y) = (y/beta + beta/2)^2
    // and cp = exp(beta^2/4 + max(beta^2, 2)); invert h directly.
    const double cp =
        std::exp(0.25 * k.beta * k.beta + std::max(k.beta * k.beta, 2.0));
    const double z = std::log(cp / delta);
    if (z >= 0.25 * k.beta * k.beta) {
      const double y = k.beta * std::sqrt(z) - 0.5 * k.beta * k.beta;
      const double w = std::exp(-y);
      if (w > 0.0 && w <= top &&
          std::abs(detail::omega_inv(k, w) - delta) <= 1e-12 * delta)
        return w;
    }
  }
  double lo = 1e-300;
  double hi = top;
  if (detail::omega_inv(k, hi) < delta) return hi;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (detail::omega_inv(k, mid) < delta ? lo : hi) = mid;
  }
  const double res_lo = std::abs(detail::omega_inv(k, lo) - delta);
  const double res_hi = std::abs(detail::omega_inv(k, hi) - delta);
  const double w = (res_lo < res_hi) ? lo : hi;
  if (std::min(res_lo, res_hi) > 1e-12 * delta)
    throw NumericError("omega: bisection failed to meet the residual target");
  return w;
}

// Midpoint concavity on a geometric probe grid down to 1e-12; the property
// the general threshold rules rely on.
inline bool verify_concavity(const IndexFunction& k) {
  std::vector<double> probe;
  for (double t = 1.0; t >= 1e-12; t *= 0.5) probe.push_back(t);
  for (std::size_t i = 0; i < probe.size(); ++i)
    for (std::size_t j = i + 1; j < probe.size(); ++j) {
      const double u = probe[i], v = probe[j];
      const double mid = index_eval(k, 0.5 * (u + v));
      const double chord = 0.5 * (index_eval(k, u) + index_eval(k, v));
      if (mid < chord * (1.0 - 1e-12)) return false;
    }
  return true;
}

}  // namespace deconv
