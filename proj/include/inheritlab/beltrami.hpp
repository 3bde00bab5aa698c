#pragma once

// Curl eigenfields and the residual operators of the static and stationary
// reductions.
//
// Sign conventions for complex fields: ζ = re + i·im, and the twisted
// residual is Res = *(dζ − iaθ∧ζ) + aV^{-1}ζ = curl ζ − ia θ×ζ + aV^{-1}ζ.

#include <complex>
#include <string>
#include <vector>

#include "inheritlab/forms.hpp"

namespace inheritlab {

// ---- exemplars --------------------------------------------------------------

// (A sin z + C cos y) dx + (B sin x + A cos z) dy + (C sin y + B cos x) dz, curl ω = ω.
OneForm3 make_abc_field(double A = 1.0, double B = 1.0, double C = 1.0);

// Regular spherical Bessel function j_l with a series branch near the origin.
template <class T>
T bessel_j_over_power(int l, double k, const T& s);  // j_l(k r)/r^l as a function of s = r²

// Solid harmonic r^l P_l^m(cos θ) (cos mφ | sin |m|φ) as a polynomial in x.
template <class T>
T solid_harmonic(int l, int m, const Vec3<T>& x);

struct CKField {
  double a = 1.0;
  int l = 1;
  int m = 0;

  template <class T>
  T potential(const Vec3<T>& x) const {
    T s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    return bessel_j_over_power(l, std::abs(a), s) * solid_harmonic(l, m, x);
  }

  // ω = ∇(ψ + x·∇ψ) + a²ψ x + a ∇ψ × x, so that *dω = aω.
  template <class T>
  Vec3<T> operator()(const Vec3<T>& x) const {
    using U = Dual<Dual<T, 3>, 3>;
    U psi = potential(seed(seed(x)));
    T v = psi.v.v;
    Vec3<T> g;
    Mat3<T> H;
    for (int i = 0; i < 3; ++i) {
      g[i] = psi.v.d[i];
      for (int j = 0; j < 3; ++j) H(i, j) = psi.d[i].d[j];
    }
    Vec3<T> w;
    T k2v = (a * a) * v;
    for (int i = 0; i < 3; ++i) {
      T s = 2.0 * g[i] + k2v * x[i];
      for (int j = 0; j < 3; ++j) s = s + x[j] * H(i, j);
      w[i] = s;
    }
    w[0] = w[0] + a * (g[1] * x[2] - g[2] * x[1]);
    w[1] = w[1] + a * (g[2] * x[0] - g[0] * x[2]);
    w[2] = w[2] + a * (g[0] * x[1] - g[1] * x[0]);
    return w;
  }
};

OneForm3 make_ck_field(double a, int l, int m);

// "abc", "abc:A=1,B=1,C=1", "ck:l=1,a=1.0,m=0", "ck:...,mirror=1", "zero", "dx", "xdx".
OneForm3 make_field(const std::string& spec);
// Eigenvalue carried by a registered field spec (0 when not an eigenfield).
double field_eigenvalue(const std::string& spec);

// Random smooth real test fields (trigonometric with Gaussian envelope).
OneForm3 random_smooth_form(std::uint64_t seed, double amplitude = 1.0, double envelope = 0.0);
ScalarField3 random_smooth_scalar(std::uint64_t seed, double amplitude = 1.0);
// 1 + amplitude·exp(−|x|²/width²) style lapse that stays positive.
ScalarField3 random_positive_lapse(std::uint64_t seed, double amplitude = 0.3);

// ---- residual reports -------------------------------------------------------

struct ResidualStats {
  std::vector<double> values;
  double max = 0.0;
  double mean = 0.0;
};

ResidualStats summarize(std::vector<double> values);

struct BeltramiProblem {
  Metric3 metric;
  double a = 1.0;
  OneForm3 omega;
};

struct BeltramiReport {
  ResidualStats curl;       // |*dω − aω|_g
  ResidualStats codiff;     // |δω|
  ResidualStats laplacian;  // |Δ_H ω − a²ω|_g
  bool trivial_field = false;
};

BeltramiReport beltrami_residual(const BeltramiProblem& prob, const std::vector<Eigen::Vector3d>& points);

struct StaticSystemReport {
  ResidualStats v1;             // |∇²V − ½|W|²V|   (paper: −ΔV = ½|W|²V, Δ = −∇²)
  ResidualStats w4;             // |ε_i^{jk}∇_j(VW_k) + aW_i|_g
  ResidualStats r1;             // |R_ij − ½Rg_ij − V^{-1}∇_i∇_jV + W_iW_j|_g
  ResidualStats trace;          // |R − |W|²|, the trace consequence of (v1) and (r1)
  ResidualStats trace_as_printed;  // |R − ½|W|²|
  ResidualStats trace_chain;    // |(R − |W|²) + 2(tr_g r1 + V^{-1} v1)|, exact identity
};

StaticSystemReport static_system_residual(const ScalarField3& V, const OneForm3& W, const Metric3& metric, double a,
                                          const std::vector<Eigen::Vector3d>& points);

struct RescalingReport {
  ResidualStats equivalence;   // |LHS_hat − V·LHS_w4|
  ResidualStats epsilon;       // |ε̂_123 − V^{-3}ε_123|
  ResidualStats lhs_w4;        // |LHS_w4|_g
  ResidualStats lhs_hat;       // |LHS_hat|_ĝ
};

RescalingReport rescaling_identity_check(const ScalarField3& V, const OneForm3& W, const Metric3& metric, double a,
                                         const std::vector<Eigen::Vector3d>& points);

// ---- twisted stationary system ---------------------------------------------

struct TwistedProblem {
  Metric3 metric;
  ScalarField3 V;
  OneForm3 theta;
  double a = 1.0;
  ComplexOneForm3 zeta;
};

template <class S>
struct CVec3 {
  Vec3<S> re;
  Vec3<S> im;
};

template <class S>
  requires WithinOrder<S, 1>
CVec3<S> twisted_residual_at(const TwistedProblem& pr, const Vec3<S>& p) {
  MetricAt<S, 3> m = metric_at<S, 3>(pr.metric, p);
  Vec3<S> cr = star_two(m, exterior_derivative_at<S, 3>(pr.zeta.re, p));
  Vec3<S> ci = star_two(m, exterior_derivative_at<S, 3>(pr.zeta.im, p));
  Vec3<S> th = pr.theta(p);
  Vec3<S> zr = pr.zeta.re(p);
  Vec3<S> zi = pr.zeta.im(p);
  S iv = pr.a / S(pr.V(p));
  Vec3<S> xr = cross_at(m, th, zr);
  Vec3<S> xi = cross_at(m, th, zi);
  CVec3<S> out;
  for (int i = 0; i < 3; ++i) {
    out.re[i] = cr[i] + pr.a * xi[i] + iv * zr[i];
    out.im[i] = ci[i] - pr.a * xr[i] + iv * zi[i];
  }
  return out;
}

double complex_norm(const Metric3& metric, const Eigen::Vector3d& p, const CVec3<double>& v);

std::vector<double> twisted_residual(const TwistedProblem& prob, const std::vector<Eigen::Vector3d>& points);

// (e^{iaχ}ζ, θ + dχ)
TwistedProblem gauge_transform(const TwistedProblem& prob, const ScalarField3& chi);

struct SecondOrderReport {
  ResidualStats divergence;   // |∇·ζ − (∇lnV + iV curlθ + iaθ)·ζ|
  ResidualStats second_order;  // |(−Δ_H + a²)ζ − RHS|_g
  ResidualStats first_order;   // |Res|_g
  ResidualStats jet_norm;      // |Res| + |∇Res| + |∇∇Res|, Euclidean components
  double implication_constant = 0.0;  // max second_order / jet_norm over points with nonzero jet
};

// Divergence relation defect (complex scalar).
std::complex<double> divergence_defect(const TwistedProblem& prob, const Eigen::Vector3d& p);
// Second-order equation defect (complex 1-form).
CVec3<double> second_order_defect(const TwistedProblem& prob, const Eigen::Vector3d& p);
// The same defects rebuilt from Res alone:
//   D12 = (V/a) div Res − iV θ·Res
//   D13 = aV^{-1}Res − curl Res + ∇((V/a) div Res)
std::complex<double> divergence_defect_from_residual(const TwistedProblem& prob, const Eigen::Vector3d& p);
CVec3<double> second_order_defect_from_residual(const TwistedProblem& prob, const Eigen::Vector3d& p);

SecondOrderReport stationary_second_order_residual(const TwistedProblem& prob,
                                                   const std::vector<Eigen::Vector3d>& points,
                                                   bool with_jet = false);

// ---- sample sets ------------------------------------------------------------

// Points with |x| uniform in [r_lo, r_hi] and isotropic directions.
std::vector<Eigen::Vector3d> random_shell_points(std::uint64_t seed, int n, double r_lo, double r_hi);
// Points uniform in the cube [-L, L]³.
std::vector<Eigen::Vector3d> random_box_points(std::uint64_t seed, int n, double L);

}  // namespace inheritlab

#include "inheritlab/beltrami_impl.hpp"
