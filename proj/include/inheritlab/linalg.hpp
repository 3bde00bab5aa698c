#pragma once

// Small dense linear algebra that works for any scalar in the dual ladder.

#include <cmath>
#include <utility>

#include "inheritlab/errors.hpp"
#include "inheritlab/fields.hpp"

namespace inheritlab {

template <class S, int D>
struct Inverse {
  Mat<S, D> inv;
  S det;
};

// Gauss-Jordan with partial pivoting on the value part. Lorentzian metrics in
// null charts have zero diagonals, so pivoting is required.
template <class S, int D>
Inverse<S, D> invert(const Mat<S, D>& a) {
  Mat<S, D> m = a;
  Mat<S, D> inv = Mat<S, D>::Identity();
  S det(1.0);
  double scale = 0.0;
  for (int i = 0; i < D * D; ++i) scale = std::max(scale, std::abs(value_of(a(i))));
  for (int c = 0; c < D; ++c) {
    int piv = c;
    double best = std::abs(value_of(m(c, c)));
    for (int r = c + 1; r < D; ++r) {
      double v = std::abs(value_of(m(r, c)));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (!(best > 1e-14 * scale)) throw SingularMetric("matrix is singular to working precision");
    if (piv != c) {
      m.row(c).swap(m.row(piv));
      inv.row(c).swap(inv.row(piv));
      det = -det;
    }
    S p = m(c, c);
    det = det * p;
    S ip = S(1.0) / p;
    for (int k = 0; k < D; ++k) {
      m(c, k) = m(c, k) * ip;
      inv(c, k) = inv(c, k) * ip;
    }
    for (int r = 0; r < D; ++r) {
      if (r == c) continue;
      S f = m(r, c);
      if (value_of(f) == 0.0 && !is_dual<S>::value) continue;
      for (int k = 0; k < D; ++k) {
        m(r, k) = m(r, k) - f * m(c, k);
        inv(r, k) = inv(r, k) - f * inv(c, k);
      }
    }
  }
  return {inv, det};
}

template <class S, int D>
Vec<S, D> mat_vec(const Mat<S, D>& m, const Vec<S, D>& v) {
  Vec<S, D> out;
  for (int i = 0; i < D; ++i) {
    S s(0.0);
    for (int j = 0; j < D; ++j) s = s + m(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

template <class S, int D>
S dot(const Vec<S, D>& a, const Vec<S, D>& b) {
  S s(0.0);
  for (int i = 0; i < D; ++i) s = s + a[i] * b[i];
  return s;
}

template <class S, int D>
S quad_form(const Mat<S, D>& m, const Vec<S, D>& a, const Vec<S, D>& b) {
  return dot(a, mat_vec(m, b));
}

inline int levi3(int i, int j, int k) {
  return (i - j) * (j - k) * (k - i) / 2;
}

inline int levi4(int a, int b, int c, int d) {
  int p[4] = {a, b, c, d};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (p[i] == p[j]) return 0;
  int s = 1;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (p[i] > p[j]) s = -s;
  return s;
}

}  // namespace inheritlab
