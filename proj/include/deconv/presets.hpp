#pragma once

#include <map>
#include <string>
#include <vector>

#include "deconv/numeric.hpp"

namespace deconv {

// Ready-made experiment setups. Each is an ordinary config file; --preset
// just loads one of these instead of reading from disk.
inline const std::map<std::string, std::string>& preset_table() {
  static const std::map<std::string, std::string> table = {
      {"rate-kde-gauss", R"(# Smoothing error of the band-limited estimate of the observation density.
[model]
x = gaussian:sigma=1
eps = gaussian:sigma=1
[estimator]
kernel = sinc
bandwidth_c = 1
bandwidth_r = 2
[schedule]
n = 256,512,1024,2048,4096,8192,16384
replicates = 200
[grid]
t_max = 16
n_points = 1025
[report]
metric = mise_y
fit = power
[run]
seed = 20250819
)"},
      {"rate-ordinary-chisq-laplace", R"(# Deconvolution risk against design size for polynomially decaying error cf.
[model]
x = sym_chi2:k=3
eps = laplace:b=1
[estimator]
kernel = sinc
s = 0
bandwidth_c = 0.5
bandwidth_r = 4.5
[rule]
name = sobolev-ordinary
c = 0.1
a = 2
p = 2.45
[schedule]
n = 256,512,1024,2048,4096,8192,16384
replicates = 200
[grid]
t_max = 32
n_points = 2049
[report]
metric = hs_risk
fit = power
[run]
seed = 20250819
)"},
      {"rate-mterm-chisq", R"(# Isolates the error-sample cost: exact observation transform, estimated
# error transform from m draws, cut-off c/m.
[model]
x = sym_chi2:k=3
eps = sym_chi2:k=1
[estimator]
kernel = sinc
s = 0
[rule]
name = source-poly-m
c = 1
beta = 1
[schedule]
n = 1000
m = 100,316,1000,3162,10000,31623
replicates = 100
y_mode = oracle
[grid]
t_max = 64
n_points = 4097
[report]
metric = hs_risk
fit = power
[run]
seed = 20250819
)"},
      {"rate-super-laplace-gauss", R"(# Logarithmic-rate regime: gaussian error transform decays faster than any
# polynomial, so risk falls in powers of log n.
[model]
x = laplace:b=1
eps = gaussian:sigma=1
[estimator]
kernel = sinc
s = 0
bandwidth_c = 1
bandwidth_r = 2
[rule]
name = sobolev-super
c = 1
r = 2
[schedule]
n = 256,512,1024,2048,4096,8192,16384
replicates = 200
[grid]
t_max = 32
n_points = 2049
[report]
metric = hs_risk
fit = log_power
[run]
seed = 20250819
)"},
      {"audit-source-poly", R"(# Truncation bias against the polynomial source envelope, both chi-square.
[model]
x = sym_chi2:k=3
eps = sym_chi2:k=1
[estimator]
s = 0
[audit]
kind = bias
cond = poly
beta = 1
alpha_lo = 1e-4
alpha_hi = 1e-1
alpha_count = 12
[grid]
t_max = 64
n_points = 8193
[run]
seed = 20250819
)"},
      {"audit-source-poly-laplace", R"(# Same envelope audit with a laplace error density.
[model]
x = sym_chi2:k=3
eps = laplace:b=1
[estimator]
s = 0
[audit]
kind = bias
cond = poly
beta = 1
alpha_lo = 1e-4
alpha_hi = 1e-1
alpha_count = 12
[grid]
t_max = 64
n_points = 8193
[run]
seed = 20250819
)"},
      {"audit-moments-gauss", R"(# Scaling of centered empirical-transform moments in the error sample size.
[model]
eps = gaussian:sigma=1
[audit]
kind = moments
m = 100,1000,10000
replicates = 1000
[run]
seed = 20250819
)"},
      {"audit-stochastic-chisq", R"(# Monte Carlo truncation bias with an estimated error transform.
[model]
x = sym_chi2:k=3
eps = sym_chi2:k=1
[estimator]
s = 0
[audit]
kind = stochastic
cond = poly
beta = 1
alpha = 0.1,0.01,0.001
m = 100,316,1000
replicates = 100
[grid]
t_max = 32
n_points = 2049
[run]
seed = 20250819
)"},
      {"profile-floor-chisq2", R"(# Resolution profile: where an m-sample stops resolving the transform.
[model]
x = sym_chi2:k=2
[audit]
kind = profile
kappa = poly:beta=1
m = 100,10000
[grid]
t_max = 64
n_points = 8193
[run]
seed = 20250819
)"},
      {"frontier-chisq-laplace", R"(# Smallest error-sample size matching the known-error baseline risk.
[model]
x = sym_chi2:k=3
eps = laplace:b=1
[estimator]
kernel = sinc
s = 0
bandwidth_c = 0.5
bandwidth_r = 4.5
[rule]
name = sobolev-ordinary-m
c = 0.1
a = 2
p = 2.45
[schedule]
n = 2048
m = known,100,316,1000,3162,10000
replicates = 100
[grid]
t_max = 32
n_points = 2049
[report]
metric = hs_risk
fit = none
frontier = true
[run]
seed = 20250819
)"},
      {"smoke", R"(# Minute-scale end-to-end check used by the command-line tests.
[model]
x = gaussian:sigma=1
eps = gaussian:sigma=1
[estimator]
kernel = sinc
s = 0
bandwidth_c = 1
bandwidth_r = 2
[rule]
name = sobolev-super
c = 1
r = 2
[schedule]
n = 64,128,256,512
replicates = 8
pilot_replicates = 2
[grid]
t_max = 8
n_points = 257
[report]
metric = hs_risk
fit = power
[run]
seed = 7
)"},
  };
  return table;
}

inline std::string preset_text(const std::string& name) {
  const auto& table = preset_table();
  const auto it = table.find(name);
  if (it != table.end()) return it->second;
  std::string known;
  for (const auto& [k, v] : table) {
    (void)v;
    if (!known.empty()) known += ", ";
    known += k;
  }
  throw ConfigError("unknown preset '" + name + "' (available: " + known + ")");
}

inline std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : preset_table()) {
    (void)v;
    out.push_back(k);
  }
  return out;
}

}  // namespace deconv
