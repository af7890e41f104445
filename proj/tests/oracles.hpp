// Copyright 2026 The lossq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// Test-side reference computations, written from the formulas directly and
// sharing no code with the library.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

namespace oracle {

inline double h2(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1 - p) * std::log2(1 - p);
}

inline double poisson(double m, int n) {
  double v = std::exp(-m);
  for (int i = 1; i <= n; ++i) v *= m / i;
  return v;
}

// Bloch (z, x) of the real states in the flaw model.
struct Bloch {
  double z, x;
};

inline std::array<Bloch, 4> bloch_states(double d1, double d2, double d3) {
  return {{{1.0, 0.0},
           {-std::cos(2 * d2), std::sin(2 * d2)},
           {std::sin(2 * d1), std::cos(2 * d1)},
           {std::sin(2 * d3), -std::cos(2 * d3)}}};
}

// Root fidelity of two real qubit density matrices from their Bloch vectors:
// F^2 = (1 + r.s + sqrt((1-|r|^2)(1-|s|^2))) / 2.
inline double qubit_fidelity(Bloch r, Bloch s) {
  const double rr = r.z * r.z + r.x * r.x, ss = s.z * s.z + s.x * s.x;
  const double f2 = 0.5 * (1 + r.z * s.z + r.x * s.x + std::sqrt(std::max(0.0, (1 - rr) * (1 - ss))));
  return std::sqrt(f2);
}

inline double basis_fidelity(double d1, double d2, double d3) {
  const auto b = bloch_states(d1, d2, d3);
  const Bloch rz{(b[0].z + b[1].z) / 2, (b[0].x + b[1].x) / 2};
  const Bloch rx{(b[2].z + b[3].z) / 2, (b[2].x + b[3].x) / 2};
  return qubit_fidelity(rz, rx);
}

// Calibration bound re-derived from the interference counts.
inline double delta_bar(double theta, double d1, double d2, double ref1, double eta1, double eta2,
                        double eps) {
  auto dev = [&](double n) { return std::sqrt(n / 2 * std::log(1 / eps)); };
  const double num = (d1 + dev(d1) - (ref1 - dev(ref1))) / eta1;
  const double den = (d2 - dev(d2) - (ref1 + dev(ref1))) / eta2;
  const double phi = 2 * std::atan(std::sqrt(num / den));
  const double target = theta <= std::numbers::pi ? theta : 2 * std::numbers::pi - theta;
  return std::abs(target - phi);
}

// Decoy closed forms, conservative direction; n = {mu, nu, omega} counts.
struct Decoy {
  double mu, nu, om, pm, pn, po;
  double eps;  // per side, 0 for deviation-free

  double dev(double n) const { return eps > 0 ? std::sqrt(n / 2 * std::log(1 / eps)) : 0.0; }
  double lo(double n) const { return std::max(0.0, n - dev(n)); }
  double hi(double n) const { return n + dev(n); }
  double tau(int n) const {
    return pm * poisson(mu, n) + pn * poisson(nu, n) + po * poisson(om, n);
  }
  double s0(const std::array<double, 3>& n) const {
    const double v = tau(0) / (nu - om) *
                     (nu * std::exp(om) * lo(n[2]) / po - om * std::exp(nu) * hi(n[1]) / pn);
    return std::clamp(v, 0.0, n[0] + n[1] + n[2]);
  }
  double s1(const std::array<double, 3>& n) const {
    const double a = std::exp(nu) * lo(n[1]) / pn - std::exp(om) * hi(n[2]) / po;
    const double c = (nu * nu - om * om) / (mu * mu) * (s0(n) / tau(0) - std::exp(mu) * hi(n[0]) / pm);
    const double v = mu * tau(1) / (mu * (nu - om) - (nu * nu - om * om)) * (a + c);
    return std::clamp(v, 0.0, n[0] + n[1] + n[2]);
  }
  double s1_upper(const std::array<double, 3>& n) const {
    const double v = tau(1) * (std::exp(nu) * hi(n[1]) / pn - std::exp(om) * lo(n[2]) / po) / (nu - om);
    return std::clamp(v, 0.0, n[0] + n[1] + n[2]);
  }
};

// Determinant and inverse of a 3x3 by cofactors.
using M3 = std::array<std::array<double, 3>, 3>;

inline double det3(const M3& a) {
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
         a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

inline M3 inverse3(const M3& a) {
  const double d = det3(a);
  M3 inv{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int r0 = (j + 1) % 3, r1 = (j + 2) % 3, c0 = (i + 1) % 3, c1 = (i + 2) % 3;
      inv[i][j] = (a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]) / d;
    }
  }
  return inv;
}

inline double sellmeier(double l) {
  const double l2 = l * l;
  return std::sqrt(1 + 2.980 * l2 / (l2 - 0.020) + 0.598 * l2 / (l2 - 0.067) +
                   8.954 * l2 / (l2 - 416.08));
}

// Polarization leak fidelity in the rotated mode basis.
inline double polarization_fidelity(double alpha_sq, int j) {
  const double b2 = 1 - alpha_sq;
  const std::complex<double> v =
      0.5 * (1.0 + b2 + alpha_sq * std::polar(1.0, -j * std::numbers::pi / 3));
  return std::abs(v);
}

}  // namespace oracle
