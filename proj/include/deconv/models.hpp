#pragma once

#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "deconv/grid.hpp"
#include "deconv/numeric.hpp"
#include "deconv/rng.hpp"

namespace deconv {

enum class Smoothness { ordinary, super, unclassified };

// Decay classification of a characteristic function. "ordinary" means
// polynomial decay, d <= (1+t^2)^a |cf(t)|^2 <= 1/d; "super" means
// exponential decay, d <= (1+t^2)^a |log|cf(t)|^2|^{-1} <= 1/d away from
// t = 0. The exponent a is exact catalog metadata; d is always a
// grid-empirical constant, never an analytic claim.
struct SmoothnessTag {
  Smoothness kind = Smoothness::unclassified;
  double a = 0.0;
  double d = 0.0;
};

// A symmetric density with closed-form characteristic function and an exact
// sampler. Catalog cfs are real and even, so cf returns the real value and
// cf_at wraps it as a complex number with zero imaginary part. log_abs_cf is
// the exact log of |cf|; the source-condition quadratures need it because the
// cf itself underflows far out on wide probe grids.
struct DensityModel {
  std::string name;    // canonical spec string, e.g. "sym_chi2:k=3"
  std::string family;
  std::function<double(double)> pdf;
  std::function<double(double)> cf;
  std::function<double(double)> log_abs_cf;
  std::function<double(CounterRng&)> sampler;
  SmoothnessTag smoothness;

  cplx cf_at(double t) const { return cplx(cf(t), 0.0); }
};

inline std::vector<double> draw_iid(const DensityModel& m, CounterRng& rng,
                                    std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = m.sampler(rng);
  return out;
}

inline GridPtr default_grid() {
  static GridPtr g = make_grid(64.0, 8193);
  return g;
}

// Grid extremization of the smoothness bounds for the candidate (kind, a)
// carried in the model metadata. Returns the tightest empirical d; models
// without a candidate (cfs with zeros) stay unclassified. Nodes where |cf|^2
// underflows to exactly zero carry no bound information at double precision
// and are skipped.
inline SmoothnessTag classify_smoothness(const DensityModel& m,
                                         const FrequencyGrid& grid) {
  if (m.smoothness.kind == Smoothness::unclassified)
    return SmoothnessTag{Smoothness::unclassified, 0.0, 0.0};
  const Smoothness kind = m.smoothness.kind;
  const double a = m.smoothness.a;
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  bool any = false;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double t = grid.node(j);
    if (kind == Smoothness::super && std::abs(t) < 0.5) continue;
    const double c = m.cf(t);
    const double cf2 = c * c;
    if (cf2 <= 0.0) continue;
    const double la = std::pow(1.0 + t * t, a);
    const double g = (kind == Smoothness::ordinary)
                         ? la * cf2
                         : la / std::abs(std::log(cf2));
    lo = std::min(lo, g);
    hi = std::max(hi, g);
    any = true;
  }
  if (!any) return SmoothnessTag{Smoothness::unclassified, 0.0, 0.0};
  const double d = std::min({lo, 1.0 / hi, 1.0});
  if (!(d >= 1e-8)) return SmoothnessTag{Smoothness::unclassified, 0.0, 0.0};
  return SmoothnessTag{kind, a, d};
}

namespace detail {

inline DensityModel finish_model(DensityModel m) {
  m.smoothness = classify_smoothness(m, *default_grid());
  return m;
}

inline std::string fmt_param(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

// Difference of two independent chi-square(k) variables. Its density is a
// Bessel-K form; the k = 1 case has a logarithmic pole at the origin.
inline DensityModel sym_chi2(int k) {
  if (k < 1) throw ConfigError("sym_chi2: k must be a positive integer");
  DensityModel m;
  m.name = "sym_chi2:k=" + std::to_string(k);
  m.family = "sym_chi2";
  const double kk = static_cast<double>(k);
  const double nu = 0.5 * (kk - 1.0);
  const double scale =
      std::pow(4.0, -0.5 * kk) / (std::sqrt(kPi) * std::tgamma(0.5 * kk));
  m.pdf = [k, kk, nu, scale](double x) {
    const double ax = std::abs(x);
    if (ax == 0.0) {
      if (k == 1) return std::numeric_limits<double>::infinity();
      return std::tgamma(nu) / (4.0 * std::sqrt(kPi) * std::tgamma(0.5 * kk));
    }
    return scale * std::pow(ax, nu) * std::cyl_bessel_k(nu, 0.5 * ax);
  };
  m.cf = [kk](double t) {
    return kInvSqrt2Pi * std::pow(1.0 + 4.0 * t * t, -0.5 * kk);
  };
  m.log_abs_cf = [kk](double t) {
    return std::log(kInvSqrt2Pi) - 0.5 * kk * std::log1p(4.0 * t * t);
  };
  m.sampler = [kk](CounterRng& rng) { return rng.chi2(kk) - rng.chi2(kk); };
  m.smoothness = SmoothnessTag{Smoothness::ordinary, kk, 0.0};
  return detail::finish_model(std::move(m));
}

inline DensityModel cauchy(double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("cauchy: gamma must be positive");
  DensityModel m;
  m.name = "cauchy:gamma=" + detail::fmt_param(gamma);
  m.family = "cauchy";
  m.pdf = [gamma](double x) { return gamma / (kPi * (x * x + gamma * gamma)); };
  m.cf = [gamma](double t) {
    return kInvSqrt2Pi * std::exp(-gamma * std::abs(t));
  };
  m.log_abs_cf = [gamma](double t) {
    return std::log(kInvSqrt2Pi) - gamma * std::abs(t);
  };
  m.sampler = [gamma](CounterRng& rng) { return gamma * rng.cauchy_std(); };
  m.smoothness = SmoothnessTag{Smoothness::super, 0.5, 0.0};
  return detail::finish_model(std::move(m));
}

inline DensityModel gaussian(double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("gaussian: sigma must be positive");
  DensityModel m;
  m.name = "gaussian:sigma=" + detail::fmt_param(sigma);
  m.family = "gaussian";
  const double s2 = sigma * sigma;
  m.pdf = [sigma, s2](double x) {
    return std::exp(-0.5 * x * x / s2) / (sigma * kSqrt2Pi);
  };
  m.cf = [s2](double t) { return kInvSqrt2Pi * std::exp(-0.5 * s2 * t * t); };
  m.log_abs_cf = [s2](double t) {
    return std::log(kInvSqrt2Pi) - 0.5 * s2 * t * t;
  };
  m.sampler = [sigma](CounterRng& rng) { return sigma * rng.normal(); };
  m.smoothness = SmoothnessTag{Smoothness::super, 1.0, 0.0};
  return detail::finish_model(std::move(m));
}

// b times the difference of two unit exponentials. The cf closed form is kept
// under a regression test against direct quadrature of the density.
inline DensityModel laplace(double b) {
  if (!(b > 0.0)) throw ConfigError("laplace: b must be positive");
  DensityModel m;
  m.name = "laplace:b=" + detail::fmt_param(b);
  m.family = "laplace";
  m.pdf = [b](double x) { return 0.5 / b * std::exp(-std::abs(x) / b); };
  m.cf = [b](double t) { return kInvSqrt2Pi / (1.0 + b * b * t * t); };
  m.log_abs_cf = [b](double t) {
    return std::log(kInvSqrt2Pi) - std::log1p(b * b * t * t);
  };
  m.sampler = [b](CounterRng& rng) { return b * (rng.expo() - rng.expo()); };
  m.smoothness = SmoothnessTag{Smoothness::ordinary, 2.0, 0.0};
  return detail::finish_model(std::move(m));
}

// Uniform on [-w, w]. Its cf has zeros, so no smoothness candidate exists and
// the model stays unclassified; it is in the catalog to exercise exactly that
// branch.
inline DensityModel uniform(double w) {
  if (!(w > 0.0)) throw ConfigError("uniform: w must be positive");
  DensityModel m;
  m.name = "uniform:w=" + detail::fmt_param(w);
  m.family = "uniform";
  m.pdf = [w](double x) { return (std::abs(x) <= w) ? 0.5 / w : 0.0; };
  auto sinc = [w](double t) {
    const double u = w * t;
    if (std::abs(u) < 1e-8) return 1.0 - u * u / 6.0;
    return std::sin(u) / u;
  };
  m.cf = [sinc](double t) { return kInvSqrt2Pi * sinc(t); };
  m.log_abs_cf = [sinc](double t) {
    return std::log(kInvSqrt2Pi) + std::log(std::abs(sinc(t)));
  };
  m.sampler = [w](CounterRng& rng) {
    return w * (2.0 * rng.uniform01() - 1.0);
  };
  m.smoothness = SmoothnessTag{Smoothness::unclassified, 0.0, 0.0};
  return m;
}

struct ConvolutionPair {
  DensityModel x_model;
  DensityModel eps_model;

  // cf of the sum X + eps under the product identity; real because both
  // factors are.
  double y_cf(double t) const {
    return kSqrt2Pi * x_model.cf(t) * eps_model.cf(t);
  }
  cplx y_cf_at(double t) const { return cplx(y_cf(t), 0.0); }

  // One Y draw as its X and eps components.
  std::pair<double, double> sample_parts(CounterRng& rng) const {
    const double x = x_model.sampler(rng);
    const double e = eps_model.sampler(rng);
    return {x, e};
  }
  double sample_y(CounterRng& rng) const {
    const auto [x, e] = sample_parts(rng);
    return x + e;
  }

  std::vector<double> sample_y(CounterRng& rng, std::size_t n) const {
    std::vector<double> out(n);
    for (auto& v : out) v = sample_y(rng);
    return out;
  }
};

inline ConvolutionPair convolve(DensityModel x, DensityModel eps) {
  return ConvolutionPair{std::move(x), std::move(eps)};
}

struct MembershipReport {
  bool finite = false;
  double value = 0.0;  // the widest-probe partial integral when finite
};

// Weighted-norm membership by nested quadrature: partial integrals of
// (1+t^2)^p |cf|^2 on probe windows T in {64, 128, 256} at fixed dt; if the
// last doubling still grows the value by more than 1%, the integral is
// declared divergent. Catalog integrands are eventually monotone, so the
// geometric probe is reliable.
inline MembershipReport sobolev_membership(const DensityModel& m, double p) {
  if (!(p >= 0.0)) throw ConfigError("sobolev_membership: p must be >= 0");
  const double dt = 0.015625;
  double prev = 0.0;
  double cur = 0.0;
  for (int probe = 0; probe < 3; ++probe) {
    const double t_max = 64.0 * static_cast<double>(1 << probe);
    const auto n = static_cast<std::size_t>(std::lround(2.0 * t_max / dt)) + 1;
    GridPtr g = make_grid(t_max, n);
    double acc = 0.0;
    for (std::size_t j = 0; j < g->size(); ++j) {
      const double t = g->node(j);
      // exp of the log form: survives far-tail cf underflow
      const double term =
          std::exp(p * std::log1p(t * t) + 2.0 * m.log_abs_cf(t));
      acc += g->qw(j) * term;
    }
    prev = cur;
    cur = acc;
    if (!std::isfinite(cur)) return MembershipReport{false, 0.0};
  }
  if (cur > 1.01 * prev) return MembershipReport{false, 0.0};
  return MembershipReport{true, cur};
}

namespace detail {

inline double parse_real(const std::string& ctx, const std::string& key,
                         const std::string& val) {
  double v = 0.0;
  const char* first = val.data();
  const char* last = val.data() + val.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || val.empty())
    throw ConfigError(ctx + ": parameter '" + key +
                      "' has non-numeric value '" + val + "'");
  return v;
}

inline std::map<std::string, double> parse_params(const std::string& ctx,
                                                  const std::string& text) {
  std::map<std::string, double> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    const std::string item = text.substr(pos, end - pos);
    const std::size_t eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= item.size())
      throw ConfigError(ctx + ": malformed parameter '" + item +
                        "' (expected key=value)");
    const std::string key = item.substr(0, eq);
    const double v = parse_real(ctx, key, item.substr(eq + 1));
    if (!out.emplace(key, v).second)
      throw ConfigError(ctx + ": duplicate parameter '" + key + "'");
    pos = end + 1;
  }
  return out;
}

inline double take_param(std::map<std::string, double>& params,
                         const std::string& key, double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  const double v = it->second;
  params.erase(it);
  return v;
}

}  // namespace detail

// Grammar: name ':' comma-separated key=value pairs, decimal reals;
// e.g. "sym_chi2:k=2", "gaussian:sigma=1.5". Omitted parameters default to 1.
inline DensityModel parse_model(const std::string& spec) {
  const std::size_t colon = spec.find(':');
  const std::string family = spec.substr(0, colon);
  auto params = (colon == std::string::npos)
                    ? std::map<std::string, double>{}
                    : detail::parse_params("density '" + family + "'",
                                           spec.substr(colon + 1));
  DensityModel m;
  if (family == "sym_chi2") {
    const double kd = detail::take_param(params, "k", 1.0);
    const int k = static_cast<int>(std::lround(kd));
    if (static_cast<double>(k) != kd)
      throw ConfigError("sym_chi2: k must be an integer");
    m = sym_chi2(k);
  } else if (family == "cauchy") {
    m = cauchy(detail::take_param(params, "gamma", 1.0));
  } else if (family == "gaussian") {
    m = gaussian(detail::take_param(params, "sigma", 1.0));
  } else if (family == "laplace") {
    m = laplace(detail::take_param(params, "b", 1.0));
  } else if (family == "uniform") {
    m = uniform(detail::take_param(params, "w", 1.0));
  } else {
    throw ConfigError("unknown density family '" + family + "'");
  }
  if (!params.empty())
    throw ConfigError("density '" + family + "': unknown parameter '" +
                      params.begin()->first + "'");
  return m;
}

}  // namespace deconv
