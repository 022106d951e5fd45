#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "deconv/numeric.hpp"

namespace deconv {

// A symmetric kernel described entirely by its Fourier transform ft (real,
// even, ft(0) = (2 pi)^{-1/2} so the kernel integrates to one). The order r
// and constant kappa_r describe how fast 1 - sqrt(2 pi) ft(t) vanishes at 0:
// the limit of |1 - sqrt(2 pi) ft(t)| / |t|^r is kappa_r.
struct KernelSpec {
  std::string name;
  std::function<double(double)> ft;
  double r = 0.0;
  double kappa_r = 0.0;
};

// The probe quantity behind the order/constant contract; tests drive it at a
// ladder of small t and watch the ratio stabilize. sqrt(2 pi) ft(t) is
// computed as ft(t) / ft(0); dividing by the constant the kernels scale by
// keeps a flat pass band at exactly 1.
inline double kernel_class_ratio(const KernelSpec& k, double r, double t) {
  return std::abs(1.0 - k.ft(t) / kInvSqrt2Pi) / std::pow(std::abs(t), r);
}

// Perfect low-pass: flat on [-1, 1], zero outside. Member of every order
// class with constant 0.
inline KernelSpec kernel_sinc() {
  KernelSpec k;
  k.name = "sinc";
  k.ft = [](double t) { return (std::abs(t) <= 1.0) ? kInvSqrt2Pi : 0.0; };
  k.r = std::numeric_limits<double>::infinity();
  k.kappa_r = 0.0;
  return k;
}

// Order 2, constant 1/2.
inline KernelSpec kernel_gaussian() {
  KernelSpec k;
  k.name = "gaussian";
  k.ft = [](double t) { return kInvSqrt2Pi * std::exp(-0.5 * t * t); };
  k.r = 2.0;
  k.kappa_r = 0.5;
  return k;
}

// Order 4, constant 1/4: transform exp(-t^4/4), flatter than the Gaussian
// near the origin.
inline KernelSpec kernel_quartic() {
  KernelSpec k;
  k.name = "quartic";
  k.ft = [](double t) {
    const double t2 = t * t;
    return kInvSqrt2Pi * std::exp(-0.25 * t2 * t2);
  };
  k.r = 4.0;
  k.kappa_r = 0.25;
  return k;
}

inline KernelSpec parse_kernel(const std::string& name) {
  if (name == "sinc") return kernel_sinc();
  if (name == "gaussian") return kernel_gaussian();
  if (name == "quartic") return kernel_quartic();
  throw ConfigError("unknown kernel '" + name + "'");
}

}  // namespace deconv
