#pragma once

// Named coefficient presets used by the CLI and the test suites.

#include <cmath>
#include <stdexcept>
#include <string>

#include "diffcover/sde.hpp"

namespace diffcover::presets {

// Standard Brownian motion on R^n: X = I, A = 0.
inline SdeSystem brownian(int n) {
  SdeSystem sys;
  sys.dim_state = n;
  sys.dim_noise = n;
  sys.convention = Convention::kIto;
  sys.drift = [n](const Vec&) { return Vec::zero(n); };
  sys.diffusion = [n](const Vec&) { return Mat::identity(n); };
  return sys;
}

// Isotropic linear-growth coefficients: X(x) = kappa (1+|x|) I, A = 0.
inline SdeSystem linear_growth(int n = 2, double kappa = 1.0) {
  SdeSystem sys;
  sys.dim_state = n;
  sys.dim_noise = n;
  sys.convention = Convention::kIto;
  sys.drift = [n](const Vec&) { return Vec::zero(n); };
  sys.diffusion = [n, kappa](const Vec& x) {
    return Mat::scaled_identity(n, kappa * (1.0 + x.norm()));
  };
  return sys;
}

// Isotropic sublinear coefficients of power alpha < 1:
// X(x) = kappa (1+|x|^alpha) I, A = 0.
inline SdeSystem sublinear(double alpha, int n = 2, double kappa = 1.0) {
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::invalid_argument("sublinear preset: need 0 <= alpha < 1");
  SdeSystem sys;
  sys.dim_state = n;
  sys.dim_noise = n;
  sys.convention = Convention::kIto;
  sys.drift = [n](const Vec&) { return Vec::zero(n); };
  sys.diffusion = [n, alpha, kappa](const Vec& x) {
    return Mat::scaled_identity(n, kappa * (1.0 + std::pow(x.norm(), alpha)));
  };
  return sys;
}

// The complex-plane counterexample  dx = i x dB  (solution x e^{iB_t + t/2}).
// Written in Stratonovich form, which adds the conversion drift x/2; Heun then
// integrates it at strong order one.
inline SdeSystem example4() {
  SdeSystem sys;
  sys.dim_state = 2;
  sys.dim_noise = 1;
  sys.convention = Convention::kStratonovich;
  sys.drift = [](const Vec& x) { return Vec{0.5 * x[0], 0.5 * x[1]}; };
  sys.diffusion = [](const Vec& x) {
    Mat m = Mat::zero(2, 1);
    m(0, 0) = -x[1];  // i (x + i y) = -y + i x
    m(1, 0) = x[0];
    return m;
  };
  return sys;
}

// Deterministic system dx = a(x) dt (zero noise).
inline SdeSystem pure_drift(int n, std::function<Vec(const Vec&)> a) {
  SdeSystem sys;
  sys.dim_state = n;
  sys.dim_noise = n;
  sys.convention = Convention::kIto;
  sys.drift = std::move(a);
  sys.diffusion = [n](const Vec&) { return Mat::zero(n, n); };
  return sys;
}

}  // namespace diffcover::presets
