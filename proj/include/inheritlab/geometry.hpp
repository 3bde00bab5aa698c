#pragma once

// Metrics, connection and curvature, asymptotic-flatness audits, distance to
// coordinate spheres, Hessian bands, and the weighted Poincare check.
//
// Conventions (used everywhere):
//   Gamma[k](i,j)  = Γ^k_ij
//   R^a_{bcd}      = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb}
//   R_bd           = R^a_{bad}
// so the round sphere has positive scalar curvature.

#include <array>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "inheritlab/errors.hpp"
#include "inheritlab/fields.hpp"
#include "inheritlab/linalg.hpp"

namespace inheritlab {

enum class Signature { Riemannian, Lorentzian };

struct AsymptoticParams {
  double c_star = 1.0;
  double delta = 1.0;
};

template <int Dim>
struct MetricField {
  std::string name;
  MatrixField<Dim> g;
  Signature signature = Signature::Riemannian;
  std::optional<AsymptoticParams> asymptotics;
  std::function<bool(const Vec<double, Dim>&)> domain;
  bool exactly_flat = false;

  template <class S>
  Mat<S, Dim> operator()(const Vec<S, Dim>& p) const {
    return g(p);
  }
  bool contains(const Vec<double, Dim>& p) const { return !domain || domain(p); }
};

using Metric3 = MetricField<3>;
using Metric4 = MetricField<4>;

template <class S, int D>
struct MetricAt {
  Mat<S, D> g;
  Mat<S, D> ginv;
  S det;
  S vol;  // sqrt|det g|
};

template <class S, int D>
MetricAt<S, D> metric_from(const Mat<S, D>& g) {
  MetricAt<S, D> out;
  out.g = g;
  auto inv = invert(out.g);
  out.ginv = inv.inv;
  out.det = inv.det;
  out.vol = sqrt(value_of(out.det) < 0.0 ? -out.det : out.det);
  return out;
}

template <class S, int D>
MetricAt<S, D> metric_at(const MetricField<D>& m, const Vec<S, D>& p) {
  return metric_from<S, D>(m.g(p));
}

template <class S, int D>
struct Connection {
  Mat<S, D> g;
  Mat<S, D> ginv;
  S det;
  S vol;
  std::array<Mat<S, D>, D> dg;     // dg[k](i,j) = ∂_k g_ij
  std::array<Mat<S, D>, D> gamma;  // gamma[k](i,j) = Γ^k_ij
};

template <class S, int D>
  requires WithinOrder<S, 1>
Connection<S, D> connection(const MetricField<D>& m, const Vec<S, D>& p) {
  Mat<Dual<S, D>, D> G = m.g(seed(p));
  Connection<S, D> c;
  c.g = value_part(G);
  for (int k = 0; k < D; ++k) c.dg[k] = derivative_part(G, k);
  auto inv = invert(c.g);
  c.ginv = inv.inv;
  c.det = inv.det;
  c.vol = sqrt(value_of(c.det) < 0.0 ? -c.det : c.det);
  for (int k = 0; k < D; ++k) {
    for (int i = 0; i < D; ++i) {
      for (int j = i; j < D; ++j) {
        S s(0.0);
        for (int l = 0; l < D; ++l) {
          s = s + c.ginv(k, l) * (c.dg[j](l, i) + c.dg[i](l, j) - c.dg[l](i, j));
        }
        c.gamma[k](i, j) = 0.5 * s;
        c.gamma[k](j, i) = c.gamma[k](i, j);
      }
    }
  }
  return c;
}

template <class S, int D>
struct Curvature {
  Connection<S, D> conn;
  std::array<S, D * D * D * D> riemann;
  Mat<S, D> ricci;
  S scalar;

  const S& R(int a, int b, int c, int d) const { return riemann[((a * D + b) * D + c) * D + d]; }
};

template <class S, int D>
  requires WithinOrder<S, 2>
Curvature<S, D> curvature(const MetricField<D>& m, const Vec<S, D>& p) {
  using T = Dual<S, D>;
  Connection<T, D> c1 = connection<T, D>(m, seed(p));
  Curvature<S, D> out;
  Connection<S, D>& c = out.conn;
  c.g = value_part(c1.g);
  c.ginv = value_part(c1.ginv);
  c.det = c1.det.v;
  c.vol = c1.vol.v;
  for (int k = 0; k < D; ++k) {
    c.dg[k] = value_part(c1.dg[k]);
    c.gamma[k] = value_part(c1.gamma[k]);
  }
  for (int a = 0; a < D; ++a) {
    for (int b = 0; b < D; ++b) {
      for (int cc = 0; cc < D; ++cc) {
        for (int d = 0; d < D; ++d) {
          S s = c1.gamma[a](d, b).d[cc] - c1.gamma[a](cc, b).d[d];
          for (int e = 0; e < D; ++e) {
            s = s + c.gamma[a](cc, e) * c.gamma[e](d, b) - c.gamma[a](d, e) * c.gamma[e](cc, b);
          }
          out.riemann[((a * D + b) * D + cc) * D + d] = s;
        }
      }
    }
  }
  for (int b = 0; b < D; ++b) {
    for (int d = 0; d < D; ++d) {
      S s(0.0);
      for (int a = 0; a < D; ++a) s = s + out.R(a, b, a, d);
      out.ricci(b, d) = s;
    }
  }
  S sc(0.0);
  for (int b = 0; b < D; ++b)
    for (int d = 0; d < D; ++d) sc = sc + c.ginv(b, d) * out.ricci(b, d);
  out.scalar = sc;
  return out;
}

// Validated evaluation at a double point: chart domain, symmetry, invertibility
// and signature are checked before curvature is returned.
template <int D>
Curvature<double, D> evaluate_metric(const MetricField<D>& m, const Vec<double, D>& p);

extern template Curvature<double, 3> evaluate_metric<3>(const MetricField<3>&, const Vec<double, 3>&);
extern template Curvature<double, 4> evaluate_metric<4>(const MetricField<4>&, const Vec<double, 4>&);

// ---- registry ---------------------------------------------------------------

Metric3 flat_metric3();
Metric3 conformal_power_metric(const ScalarField3& psi, double power, std::string name,
                               std::optional<AsymptoticParams> af = std::nullopt);
Metric3 schwarzschild_conformal_metric(double m = 1.0);
Metric3 power_conformal_metric();  // (1 + r^{-1/2}) δ
Metric3 log_conformal_metric();    // (1 + log r / r^{0.1}) δ
// x^{-4}dx² + x^{-2}(dθ² + sin²θ dφ²) in the chart (x, θ, φ); eps adds x·eps to the angular part.
Metric3 scattering_metric(double eps = 0.0);
// δ + eps·(smooth random symmetric perturbation decaying like |x|^{-1}).
Metric3 random_near_flat_metric(std::uint64_t seed, double eps);
// V^{-2} g
Metric3 rescaled_metric(const Metric3& g, const ScalarField3& V);

// Parses "flat", "conformal:m=1", "power", "log", "scattering", "near-flat:seed=3,eps=0.05".
Metric3 make_metric3(const std::string& spec);
std::vector<std::string> metric3_names();

// ---- asymptotic flatness ----------------------------------------------------

struct AsymptoticAudit {
  std::string metric;
  double delta = 0.0;
  double c_star = 0.0;
  double max_weighted_deviation = 0.0;
  double worst_radius = 0.0;
  bool pass = false;
};

AsymptoticAudit audit_asymptotic_flatness(const Metric3& metric, const std::vector<double>& radii,
                                          int directions_per_radius);

// Deterministic quasi-uniform directions on the unit sphere.
std::vector<Eigen::Vector3d> fibonacci_directions(int n);

// ---- distance to coordinate spheres ----------------------------------------

enum class DistanceMethod { GeodesicShooting, FastMarching };

struct DistanceConfig {
  double r0_threshold = 10.0;
  double step = 0.25;
  int max_newton = 40;
  double tolerance = 1e-12;
};

struct DistanceSample {
  double d = 0.0;
  Eigen::Vector3d gradient = Eigen::Vector3d::Zero();  // covector ∇d
  Eigen::Matrix3d hessian = Eigen::Matrix3d::Zero();   // covariant ∇∇d
  Eigen::Vector3d foot = Eigen::Vector3d::Zero();      // start point on the sphere
  double eikonal_residual = 0.0;
  double annihilation_residual = 0.0;
};

class DistanceField {
 public:
  DistanceField(Metric3 metric, double R, DistanceConfig cfg = {});

  double R() const { return R_; }
  DistanceMethod method() const { return DistanceMethod::GeodesicShooting; }
  const Metric3& metric() const { return metric_; }

  // d_R and its gradient only.
  DistanceSample distance(const Eigen::Vector3d& x) const;
  // d_R, gradient and covariant Hessian.
  DistanceSample operator()(const Eigen::Vector3d& x) const;

 private:
  struct Shot {
    Eigen::Vector3d end;
    Eigen::Vector3d velocity;
    Eigen::Vector3d foot;
  };
  Shot shoot(const Eigen::Vector3d& n0, double a, double b, double s) const;
  DistanceSample solve(const Eigen::Vector3d& x, Eigen::Vector3d* warm) const;

  Metric3 metric_;
  double R_;
  DistanceConfig cfg_;
};

// First-order fast marching for conformally flat metrics on a cube [-L,L]³.
class FastMarchingDistance {
 public:
  FastMarchingDistance(const Metric3& metric, double R, double half_width, int cells);
  double operator()(const Eigen::Vector3d& x) const;

 private:
  int n_;
  double h_;
  double L_;
  std::vector<double> d_;
};

struct HessianBandPoint {
  Eigen::Vector3d x;
  double d = 0.0;
  std::array<double, 2> eigenvalues{};
  double center = 0.0;
  double c_point = 0.0;
  bool inside = true;
};

struct HessianBandReport {
  std::vector<HessianBandPoint> points;
  double delta = 0.0;
  double c1 = 0.0;  // smallest constant putting every sample in the band
  bool pass = true;
};

// c1_limit < 0 means "report only".
HessianBandReport check_hessian_bands(const Metric3& metric, double R, const std::vector<Eigen::Vector3d>& points,
                                      double delta, double c1_limit = -1.0, DistanceConfig cfg = {});

// ---- weighted Poincaré ------------------------------------------------------

// pass tests the stated bound lhs ≤ rhs. Integrating by parts with only φ(ℓ) = 0
// leaves the boundary term φ(0)²/((1+δ)R^{1+δ}) and a factor R^{-δ}, giving
// lhs ≤ 4/((1+δ)²R^δ)∫(φ′)² + 2φ(0)²/((1+δ)R^{1+δ}), reported as corrected_rhs.
struct PoincareResult {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  double corrected_rhs = 0.0;
  bool corrected_pass = false;
};

struct SampledProfile {
  std::function<double(double)> phi;
  std::function<double(double)> dphi;
};

PoincareResult weighted_poincare_check(double R, double delta, double ell, const SampledProfile& phi,
                                       int nodes_per_unit = 32);

// φ(t) = c0 (ℓ − t) + Σ c_k sin(kπ(ℓ − t)/(2ℓ)), which vanishes at t = ℓ.
SampledProfile random_admissible_profile(std::mt19937_64& rng, double ell, int modes = 6);

// Composite Gauss-Legendre on [a,b] with `panels` panels of `order` nodes.
struct Quadrature1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Quadrature1D gauss_legendre(int n);
Quadrature1D composite_gauss_legendre(double a, double b, int panels, int order);

}  // namespace inheritlab
