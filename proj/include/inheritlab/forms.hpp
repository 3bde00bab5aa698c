#pragma once

// Exterior calculus on 3-manifolds in a fixed chart, plus the 4D dual and Lie
// derivative used by the inheritance checks.
//
// Orientation: ε_123 = +√det g (3D), ε_0123 = +√|det g| (4D, time first).
// Codifferential: δω = −(1/√g) ∂_i(√g g^{ij} ω_j), so Δ_H = δd + dδ ≥ 0.
// In 3D: curl ω = *dω, δ on 2-forms is *d*, and Δ_H ω = curl curl ω − ∇ div ω.

#include <complex>
#include <functional>
#include <vector>

#include "inheritlab/geometry.hpp"

namespace inheritlab {

// ---- pointwise operators ----------------------------------------------------

template <class S>
  requires WithinOrder<S, 1>
Vec3<S> gradient_at(const ScalarField3& f, const Vec3<S>& p) {
  Dual<S, 3> v = f(seed(p));
  Vec3<S> g;
  for (int i = 0; i < 3; ++i) g[i] = v.d[i];
  return g;
}

template <class S, int D>
  requires WithinOrder<S, 1>
Mat<S, D> exterior_derivative_at(const CovectorField<D>& w, const Vec<S, D>& p) {
  Vec<Dual<S, D>, D> v = w(seed(p));
  Mat<S, D> out;
  for (int i = 0; i < D; ++i) {
    out(i, i) = S(0.0);
    for (int j = i + 1; j < D; ++j) {
      out(i, j) = v[j].d[i] - v[i].d[j];
      out(j, i) = -out(i, j);
    }
  }
  return out;
}

// (*ω)_ij = ε_ijk ω^k
template <class S>
Mat3<S> star_one(const MetricAt<S, 3>& m, const Vec3<S>& w) {
  Vec3<S> up = mat_vec(m.ginv, w);
  Mat3<S> out;
  out(0, 0) = out(1, 1) = out(2, 2) = S(0.0);
  out(0, 1) = m.vol * up[2];
  out(1, 2) = m.vol * up[0];
  out(2, 0) = m.vol * up[1];
  out(1, 0) = -out(0, 1);
  out(2, 1) = -out(1, 2);
  out(0, 2) = -out(2, 0);
  return out;
}

// (*β)_i = ½ g_il ε^{ljk} β_jk, ε^{123} = 1/√g
template <class S>
Vec3<S> star_two(const MetricAt<S, 3>& m, const Mat3<S>& b) {
  Vec3<S> up;
  S iv = 1.0 / m.vol;
  up[0] = b(1, 2) * iv;
  up[1] = b(2, 0) * iv;
  up[2] = b(0, 1) * iv;
  return mat_vec(m.g, up);
}

// (a × b)_i = ε_ijk a^j b^k for covectors a, b
template <class S>
Vec3<S> cross_at(const MetricAt<S, 3>& m, const Vec3<S>& a, const Vec3<S>& b) {
  Vec3<S> au = mat_vec(m.ginv, a);
  Vec3<S> bu = mat_vec(m.ginv, b);
  Vec3<S> out;
  out[0] = m.vol * (au[1] * bu[2] - au[2] * bu[1]);
  out[1] = m.vol * (au[2] * bu[0] - au[0] * bu[2]);
  out[2] = m.vol * (au[0] * bu[1] - au[1] * bu[0]);
  return out;
}

template <class S>
S norm2_at(const MetricAt<S, 3>& m, const Vec3<S>& w) {
  return quad_form(m.ginv, w, w);
}

template <class S>
  requires WithinOrder<S, 1>
Vec3<S> curl_at(const Metric3& metric, const OneForm3& w, const Vec3<S>& p) {
  return star_two(metric_at<S, 3>(metric, p), exterior_derivative_at<S, 3>(w, p));
}

template <class S>
  requires WithinOrder<S, 1>
S codifferential_at(const Metric3& metric, const OneForm3& w, const Vec3<S>& p) {
  using T = Dual<S, 3>;
  Vec3<T> X = seed(p);
  MetricAt<T, 3> m = metric_at<T, 3>(metric, X);
  Vec3<T> u = mat_vec(m.ginv, Vec3<T>(w(X)));
  S div(0.0);
  for (int i = 0; i < 3; ++i) div = div + (m.vol * u[i]).d[i];
  return -div / m.vol.v;
}

// Divergence of a covector field: ∇^i w_i = −δw.
template <class S>
  requires WithinOrder<S, 1>
S divergence_at(const Metric3& metric, const OneForm3& w, const Vec3<S>& p) {
  return -codifferential_at<S>(metric, w, p);
}

// δβ for a 2-form field: (δβ)_j = −(1/√g) g_jk ∂_i(√g β^{ik})
template <class S>
  requires WithinOrder<S, 1>
Vec3<S> codifferential2_at(const Metric3& metric, const TwoForm3& b, const Vec3<S>& p) {
  using T = Dual<S, 3>;
  Vec3<T> X = seed(p);
  MetricAt<T, 3> m = metric_at<T, 3>(metric, X);
  Mat3<T> B = b(X);
  Vec3<S> up;
  for (int k = 0; k < 3; ++k) {
    S s(0.0);
    for (int i = 0; i < 3; ++i) {
      T bik(0.0);
      for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 3; ++c) bik = bik + m.ginv(i, a) * m.ginv(k, c) * B(a, c);
      s = s + (m.vol * bik).d[i];
    }
    up[k] = -s / m.vol.v;
  }
  return mat_vec(value_part(m.g), up);
}

template <class S>
  requires WithinOrder<S, 2>
Vec3<S> delta_d_at(const Metric3& metric, const OneForm3& w, const Vec3<S>& p) {
  using T = Dual<S, 3>;
  Vec3<T> X = seed(p);
  MetricAt<T, 3> m = metric_at<T, 3>(metric, X);
  Mat3<T> B = exterior_derivative_at<T, 3>(w, X);
  Vec3<S> up;
  for (int k = 0; k < 3; ++k) {
    S s(0.0);
    for (int i = 0; i < 3; ++i) {
      T bik(0.0);
      for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 3; ++c) bik = bik + m.ginv(i, a) * m.ginv(k, c) * B(a, c);
      s = s + (m.vol * bik).d[i];
    }
    up[k] = -s / m.vol.v;
  }
  return mat_vec(value_part(m.g), up);
}

template <class S>
  requires WithinOrder<S, 2>
Vec3<S> d_delta_at(const Metric3& metric, const OneForm3& w, const Vec3<S>& p) {
  Dual<S, 3> c = codifferential_at<Dual<S, 3>>(metric, w, seed(p));
  Vec3<S> out;
  for (int i = 0; i < 3; ++i) out[i] = c.d[i];
  return out;
}

template <class S>
  requires WithinOrder<S, 2>
Vec3<S> hodge_laplacian_at(const Metric3& metric, const OneForm3& w, const Vec3<S>& p) {
  return delta_d_at<S>(metric, w, p) + d_delta_at<S>(metric, w, p);
}

// Covariant derivative (∇_k ω_j) with its first derivatives available when S
// is one order below the caller.
template <class S>
  requires WithinOrder<S, 1>
Mat3<S> covariant_derivative_at(const Metric3& metric, const OneForm3& w, const Vec3<S>& p) {
  using T = Dual<S, 3>;
  Connection<S, 3> c = connection<S, 3>(metric, p);
  Vec3<T> W = w(seed(p));
  Mat3<S> N;
  for (int k = 0; k < 3; ++k) {
    for (int j = 0; j < 3; ++j) {
      S s = W[j].d[k];
      for (int m = 0; m < 3; ++m) s = s - c.gamma[m](k, j) * W[m].v;
      N(k, j) = s;
    }
  }
  return N;
}

// ∇^i∇_i ω_j computed from covariant derivatives.
template <class S>
  requires WithinOrder<S, 2>
Vec3<S> rough_laplacian_at(const Metric3& metric, const OneForm3& w, const Vec3<S>& p) {
  using T = Dual<S, 3>;
  Mat3<T> N = covariant_derivative_at<T>(metric, w, seed(p));
  Connection<S, 3> c = connection<S, 3>(metric, p);
  Vec3<S> out;
  for (int j = 0; j < 3; ++j) {
    S s(0.0);
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) {
        S nn = N(k, j).d[i];
        for (int m = 0; m < 3; ++m) nn = nn - c.gamma[m](i, k) * N(m, j).v - c.gamma[m](i, j) * N(k, m).v;
        s = s + c.ginv(i, k) * nn;
      }
    }
    out[j] = s;
  }
  return out;
}

template <class S>
  requires WithinOrder<S, 2>
Vec3<S> ricci_action_at(const Metric3& metric, const OneForm3& w, const Vec3<S>& p) {
  Curvature<S, 3> cv = curvature<S, 3>(metric, p);
  Vec3<S> up = mat_vec(cv.conn.ginv, Vec3<S>(w(p)));
  Vec3<S> out;
  for (int j = 0; j < 3; ++j) {
    S s(0.0);
    for (int i = 0; i < 3; ++i) s = s + cv.ricci(i, j) * up[i];
    out[j] = s;
  }
  return out;
}

// ∇^i∇_i ω + Δ_H ω − Ric(ω^♯), zero by the Weitzenböck formula.
template <class S>
  requires WithinOrder<S, 2>
Vec3<S> weitzenbock_residual_at(const Metric3& metric, const OneForm3& w, const Vec3<S>& p) {
  return rough_laplacian_at<S>(metric, w, p) + hodge_laplacian_at<S>(metric, w, p) - ricci_action_at<S>(metric, w, p);
}

// F*_ab = ½ ε_abcd F^cd
template <class S>
Mat4<S> dual4(const MetricAt<S, 4>& m, const Mat4<S>& F) {
  Mat4<S> up;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      S s(0.0);
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) s = s + m.ginv(a, c) * m.ginv(b, d) * F(c, d);
      up(a, b) = s;
    }
  Mat4<S> out;
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      S s(0.0);
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) {
          int e = levi4(a, b, c, d);
          if (e != 0) s = s + static_cast<double>(e) * up(c, d);
        }
      out(a, b) = 0.5 * m.vol * s;
    }
  }
  return out;
}

// (L_K F)_ij = K^k ∂_k F_ij + F_kj ∂_i K^k + F_ik ∂_j K^k
template <class S>
  requires WithinOrder<S, 1>
Mat4<S> lie_derivative_at(const TwoForm4& F, const VectorField<4>& K, const Vec4<S>& p) {
  using T = Dual<S, 4>;
  Vec4<T> X = seed(p);
  Mat4<T> f = F(X);
  Vec4<T> k = K(X);
  Mat4<S> out;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      S s(0.0);
      for (int c = 0; c < 4; ++c) {
        s = s + k[c].v * f(i, j).d[c] + f(c, j).v * k[c].d[i] + f(i, c).v * k[c].d[j];
      }
      out(i, j) = s;
    }
  }
  return out;
}

// Cyclic sums ∂_[a F_bc] for a, b, c distinct; max magnitude.
template <int D>
double closure_residual(const TwoFormField<D>& F, const Vec<double, D>& p) {
  Mat<Dual<double, D>, D> f = F(seed(p));
  double worst = 0.0;
  for (int a = 0; a < D; ++a)
    for (int b = a + 1; b < D; ++b)
      for (int c = b + 1; c < D; ++c) {
        double s = f(b, c).d[a] + f(c, a).d[b] + f(a, b).d[c];
        worst = std::max(worst, std::abs(s));
      }
  return worst;
}

// ---- field-level combinators ------------------------------------------------

ScalarField3 radial_function(std::function<double(double)> f);  // convenience for tests (double only)

OneForm3 gradient(const ScalarField3& f);
TwoForm3 exterior_derivative(const OneForm3& w);
TwoForm4 exterior_derivative(const OneForm4& A);
TwoForm3 hodge_star(const Metric3& metric, const OneForm3& w);
OneForm3 hodge_star(const Metric3& metric, const TwoForm3& b);
OneForm3 curl(const Metric3& metric, const OneForm3& w);
ScalarField3 codifferential(const Metric3& metric, const OneForm3& w);
OneForm3 hodge_laplacian(const Metric3& metric, const OneForm3& w);
OneForm3 rough_laplacian(const Metric3& metric, const OneForm3& w);
TwoForm4 dual_field(const Metric4& metric, const TwoForm4& F);
TwoForm4 lie_derivative_4d(const TwoForm4& F, const VectorField<4>& K);
// ω(−x); flips the sign of the curl eigenvalue in flat space.
OneForm3 mirrored(const OneForm3& w);

// ---- sphere quadrature ------------------------------------------------------

struct SphereQuadrature {
  double r = 1.0;
  int n_theta = 0;
  int n_phi = 0;
  int exactness = 0;  // polynomial degree integrated exactly on the flat sphere
  std::vector<Eigen::Vector3d> nodes;
  std::vector<Eigen::Vector3d> normals;
  std::vector<double> weights;  // flat measure; sums to 4πr²
};

SphereQuadrature make_sphere_quadrature(double r, int n_theta = 64, int n_phi = 128);

// dσ_g / dσ_flat on the coordinate sphere through p: √det g · |n|_{g^{-1}}.
double area_density_ratio(const Metric3& metric, const Eigen::Vector3d& p);

double sphere_integral(const std::function<double(const Eigen::Vector3d&)>& f, const Metric3& metric,
                       const SphereQuadrature& quad);
std::complex<double> sphere_integral_complex(const std::function<std::complex<double>(const Eigen::Vector3d&)>& f,
                                             const Metric3& metric, const SphereQuadrature& quad);

// Real orthonormal spherical harmonic Y_lm(θ, φ) on the unit sphere (m < 0: sine branch).
double real_spherical_harmonic(int l, int m, double theta, double phi);

}  // namespace inheritlab
