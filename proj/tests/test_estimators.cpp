#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "deconv/estimators.hpp"
#include "deconv/kernels.hpp"
#include "deconv/models.hpp"
#include "deconv/rng.hpp"

using namespace deconv;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("empirical transform of a two-point sample is a cosine") {
  auto g = default_grid();
  auto est = ecf(std::vector<double>{1.0, -1.0}, g);
  REQUIRE(est.m == 2);
  REQUIRE(est.spectrum.hermitian);
  for (std::size_t j = 0; j < g->size(); ++j) {
    const double t = g->node(j);
    REQUIRE_THAT(est.spectrum.values[j].real(),
                 WithinAbs(kInvSqrt2Pi * std::cos(t), 1e-12));
    REQUIRE_THAT(est.spectrum.values[j].imag(), WithinAbs(0.0, 1e-12));
  }
}

TEST_CASE("empirical transform pins the origin and respects the modulus bound") {
  CounterRng rng(5, stream_of(123));
  auto g = default_grid();
  std::vector<double> xs(101);
  for (auto& x : xs) x = rng.cauchy_std();
  auto est = ecf(xs, g);

  REQUIRE(est.spectrum.values[g->center()] == cplx(kInvSqrt2Pi, 0.0));
  for (std::size_t j = 0; j < g->size(); ++j) {
    REQUIRE(std::abs(est.spectrum.values[j]) <= kInvSqrt2Pi + 1e-14);
    // exact conjugate mirror
    REQUIRE(est.spectrum.values[g->size() - 1 - j] ==
            std::conj(est.spectrum.values[j]));
  }

  // Grid evaluation agrees with the O(m) single-point form.
  for (std::size_t k : {7u, 640u, 4096u}) {
    const double t = g->node(g->center() + k);
    const cplx direct = ecf_at(xs, t);
    REQUIRE_THAT(std::abs(est.spectrum.values[g->center() + k] - direct),
                 WithinAbs(0.0, 1e-12));
  }

  REQUIRE_THROWS_AS(ecf(std::vector<double>{}, g), DataError);
  REQUIRE_THROWS_AS(ecf_at(std::vector<double>{}, 1.0), DataError);
}

TEST_CASE("phase recurrence does not drift across the whole grid") {
  auto g = default_grid();
  auto est = ecf(std::vector<double>{0.3}, g);
  // One sample: the transform is a pure phase of modulus (2 pi)^{-1/2}.
  const cplx far = est.spectrum.values[g->size() - 1];
  const cplx expect(kInvSqrt2Pi * std::cos(64.0 * 0.3),
                    -kInvSqrt2Pi * std::sin(64.0 * 0.3));
  REQUIRE_THAT(std::abs(far - expect), WithinAbs(0.0, 1e-12));
  REQUIRE_THAT(std::abs(far), WithinRel(kInvSqrt2Pi, 1e-13));
}

TEST_CASE("bandwidth rule follows the polynomial decay schedule") {
  REQUIRE_THAT(bandwidth_rule(128, 3.0, 1.0), WithinRel(0.5, 1e-14));
  REQUIRE_THAT(bandwidth_rule(1024, 2.0, 2.0), WithinRel(0.5, 1e-14));
  REQUIRE_THROWS_AS(bandwidth_rule(0, 2.0, 1.0), ConfigError);
  REQUIRE_THROWS_AS(bandwidth_rule(100, 0.0, 1.0), ConfigError);
  REQUIRE_THROWS_AS(bandwidth_rule(100, 2.0, 0.0), ConfigError);
}

TEST_CASE("smoothed spectrum is the kernel transform times the raw one") {
  CounterRng rng(9, stream_of(55));
  auto g = default_grid();
  std::vector<double> xs(64);
  for (auto& x : xs) x = rng.normal();
  auto raw = ecf(xs, g).spectrum;

  auto flat = kde_spectrum(xs, kernel_sinc(), 1.0, g);
  auto smooth = kde_spectrum(xs, kernel_gaussian(), 0.5, g);
  const std::size_t c = g->center();
  for (std::size_t j = 0; j < g->size(); ++j) {
    const double t = g->node(j);
    if (std::abs(t) <= 1.0) {
      REQUIRE(flat.values[j] == raw.values[j]);
    } else {
      REQUIRE(flat.values[j] == cplx(0.0, 0.0));
    }
    const cplx want = raw.values[j] * std::exp(-0.125 * t * t);
    REQUIRE_THAT(std::abs(smooth.values[j] - want), WithinAbs(0.0, 1e-13));
  }
  REQUIRE(flat.values[c] == cplx(kInvSqrt2Pi, 0.0));

  REQUIRE_THROWS_AS(kde_spectrum(xs, kernel_sinc(), 0.0, g), ConfigError);
  REQUIRE_THROWS_AS(kde_spectrum(std::vector<double>{}, kernel_sinc(), 1.0, g),
                    DataError);
}

TEST_CASE("cutoff with the exact product recovers the truncated target") {
  auto g = default_grid();
  auto x = sym_chi2(3);
  auto eps = laplace(1.0);
  auto pair = convolve(x, eps);
  auto y_exact = tabulate(
      g, [&pair](double t) { return pair.y_cf(t); }, true);
  auto eps_cf = tabulate(
      g, [&eps](double t) { return eps.cf(t); }, true);
  auto x_cf = tabulate(
      g, [&x](double t) { return x.cf(t); }, true);

  for (double alpha : {1e-2, 1e-4}) {
    auto est = deconv_known(y_exact, eps_cf, 0.0, alpha);
    auto target = regularized_target(x_cf, eps_cf, 0.0, alpha);
    REQUIRE(est.keep_mask == target.keep_mask);
    for (std::size_t j = 0; j < g->size(); ++j) {
      const cplx a = est.spectrum.values[j];
      const cplx b = target.spectrum.values[j];
      REQUIRE_THAT(std::abs(a - b),
                   WithinAbs(0.0, 1e-12 * std::max(1.0, std::abs(b))));
    }
  }
}

TEST_CASE("keep mask is the level set of the error transform") {
  auto g = default_grid();
  auto eps = laplace(1.0);
  auto eps_cf = tabulate(
      g, [&eps](double t) { return eps.cf(t); }, true);
  auto y = tabulate(
      g, [](double) { return 1.0; }, true);

  const double alpha = 0.01;
  auto est = deconv_known(y, eps_cf, 0.0, alpha);
  // |cf|^2 >= alpha iff t^2 <= (2 pi alpha)^{-1/2} - 1; the edge is the last
  // grid node inside.
  const double t_star = std::sqrt(1.0 / std::sqrt(kTwoPi * alpha) - 1.0);
  const double edge = g->dt() * std::floor(t_star / g->dt());
  REQUIRE(est.mask_edge() == edge);
  const double kept = 2.0 * std::floor(t_star / g->dt()) + 1.0;
  REQUIRE_THAT(est.mask_fraction(),
               WithinRel(kept / static_cast<double>(g->size()), 1e-15));

  REQUIRE_THROWS_AS(deconv_known(y, eps_cf, 0.0, 0.0), ConfigError);
  auto small = tabulate(
      make_grid(32.0, 4097), [&eps](double t) { return eps.cf(t); }, true);
  REQUIRE_THROWS_AS(deconv_known(y, small, 0.0, 0.01), ConfigError);
}

TEST_CASE("estimated error transform is flagged and consumed") {
  CounterRng rng(3, stream_of(2000, 0, 0, 2));
  auto g = default_grid();
  auto eps = laplace(1.0);
  auto e = ecf(draw_iid(eps, rng, 5000), g);
  auto y = tabulate(
      g, [](double) { return 0.1; }, true);
  auto est = deconv_unknown(y, e, 0.0, 0.05);
  REQUIRE(est.provenance == Provenance::estimated_eps);
  REQUIRE(est.mask_fraction() > 0.0);
  REQUIRE(est.mask_fraction() < 0.2);

  auto known = deconv_known(y, e.spectrum, 0.0, 0.05);
  REQUIRE(known.provenance == Provenance::known_eps);
  REQUIRE(known.keep_mask == est.keep_mask);
}

TEST_CASE("derivative transform multiplies by the derivative symbol") {
  auto g = default_grid();
  auto x = gaussian(1.0);
  auto x_cf = tabulate(
      g, [&x](double t) { return x.cf(t); }, true);
  auto eps_cf = x_cf;
  auto est = deconv_known(x_cf, eps_cf, 2.0, 1e-6);

  auto d0 = derivative_spectrum(est, 0);
  REQUIRE(d0.values == est.spectrum.values);
  auto d1 = derivative_spectrum(est, 1);
  auto d2 = derivative_spectrum(est, 2);
  for (std::size_t j = 0; j < g->size(); j += 509) {
    const double t = g->node(j);
    const cplx base = est.spectrum.values[j];
    REQUIRE_THAT(std::abs(d1.values[j] - base * cplx(0.0, -t)),
                 WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(std::abs(d2.values[j] + base * t * t),
                 WithinAbs(0.0, 1e-12));
  }
  REQUIRE_THROWS_AS(derivative_spectrum(est, 3), ConfigError);
  REQUIRE_THROWS_AS(derivative_spectrum(est, -1), ConfigError);
}

TEST_CASE("kernel transforms carry their order and constant") {
  auto s = kernel_sinc();
  auto g = kernel_gaussian();
  auto q = kernel_quartic();
  for (const auto& k : {s, g, q})
    REQUIRE_THAT(k.ft(0.0), WithinRel(kInvSqrt2Pi, 1e-15));

  REQUIRE(s.r == std::numeric_limits<double>::infinity());
  REQUIRE(kernel_class_ratio(s, 2.0, 0.5) == 0.0);
  REQUIRE(s.ft(1.0) == kInvSqrt2Pi);
  REQUIRE(s.ft(1.0000001) == 0.0);

  REQUIRE(g.r == 2.0);
  REQUIRE_THAT(kernel_class_ratio(g, 2.0, 1e-3), WithinAbs(0.5, 1e-6));

  REQUIRE(q.r == 4.0);
  for (double t : {1e-1, 5e-2, 1e-2})
    REQUIRE_THAT(kernel_class_ratio(q, 4.0, t), WithinAbs(0.25, 1e-5));

  REQUIRE(parse_kernel("sinc").name == "sinc");
  REQUIRE_THROWS_AS(parse_kernel("epanechnikov"), ConfigError);
}
