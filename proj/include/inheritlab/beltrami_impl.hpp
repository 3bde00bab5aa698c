#pragma once

#include <cmath>
#include <cstdlib>

namespace inheritlab {

template <class T>
T bessel_j_over_power(int l, double k, const T& s) {
  const double k2 = k * k;
  const double zc = l + 2.0;
  if (k2 * value_of(s) < zc * zc) {
    // j_l(z)/z^l = Σ (−z²/2)^n / (n! (2l+2n+1)!!)
    double c = 1.0;
    for (int j = 1; j <= 2 * l + 1; j += 2) c /= j;
    T term(c);
    T sum = term;
    T q = (-0.5 * k2) * s;
    for (int n = 1; n <= 40; ++n) {
      term = term * q / static_cast<double>(n * (2 * l + 2 * n + 1));
      sum = sum + term;
    }
    return std::pow(k, l) * sum;
  }
  T r = sqrt(s);
  T z = k * r;
  T sz = sin(z), cz = cos(z);
  T j0 = sz / z;
  if (l == 0) return j0;
  T j1 = sz / (z * z) - cz / z;
  for (int n = 1; n < l; ++n) {
    T j2 = (2.0 * n + 1.0) * j1 / z - j0;
    j0 = j1;
    j1 = j2;
  }
  T rl(1.0);
  for (int n = 0; n < l; ++n) rl = rl * r;
  return j1 / rl;
}

template <class T>
T solid_harmonic(int l, int m, const Vec3<T>& x) {
  const int am = std::abs(m);
  T s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
  const T& z = x[2];
  double dfact = 1.0;
  for (int j = 1; j <= 2 * am - 1; j += 2) dfact *= j;
  T qm2(0.0);
  T qm1(dfact);
  T q = qm1;
  if (l > am) {
    q = (2.0 * am + 1.0) * z * qm1;
    qm2 = qm1;
    qm1 = q;
    for (int n = am + 2; n <= l; ++n) {
      q = ((2.0 * n - 1.0) * z * qm1 - static_cast<double>(n + am - 1) * s * qm2) / static_cast<double>(n - am);
      qm2 = qm1;
      qm1 = q;
    }
  }
  T c(1.0), sn(0.0);
  for (int j = 0; j < am; ++j) {
    T c2 = c * x[0] - sn * x[1];
    T s2 = sn * x[0] + c * x[1];
    c = c2;
    sn = s2;
  }
  return q * (m >= 0 ? c : sn);
}

}  // namespace inheritlab
