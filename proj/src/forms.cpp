#include "inheritlab/forms.hpp"

#include <cmath>
#include <concepts>
#include <numbers>

namespace inheritlab {

namespace {

struct GradientFn {
  ScalarField3 f;
  template <class S>
    requires WithinOrder<S, 1>
  Vec3<S> operator()(const Vec3<S>& p) const {
    return gradient_at<S>(f, p);
  }
};

template <int D>
struct ExteriorFn {
  CovectorField<D> w;
  template <class S>
    requires WithinOrder<S, 1>
  Mat<S, D> operator()(const Vec<S, D>& p) const {
    return exterior_derivative_at<S, D>(w, p);
  }
};

struct CurlFn {
  Metric3 metric;
  OneForm3 w;
  template <class S>
    requires WithinOrder<S, 1>
  Vec3<S> operator()(const Vec3<S>& p) const {
    return curl_at<S>(metric, w, p);
  }
};

struct CodiffFn {
  Metric3 metric;
  OneForm3 w;
  template <class S>
    requires WithinOrder<S, 1>
  S operator()(const Vec3<S>& p) const {
    return codifferential_at<S>(metric, w, p);
  }
};

struct HodgeLaplacianFn {
  Metric3 metric;
  OneForm3 w;
  template <class S>
    requires WithinOrder<S, 2>
  Vec3<S> operator()(const Vec3<S>& p) const {
    return hodge_laplacian_at<S>(metric, w, p);
  }
};

struct RoughLaplacianFn {
  Metric3 metric;
  OneForm3 w;
  template <class S>
    requires WithinOrder<S, 2>
  Vec3<S> operator()(const Vec3<S>& p) const {
    return rough_laplacian_at<S>(metric, w, p);
  }
};

struct LieFn {
  TwoForm4 F;
  VectorField<4> K;
  template <class S>
    requires WithinOrder<S, 1>
  Mat4<S> operator()(const Vec4<S>& p) const {
    return lie_derivative_at<S>(F, K, p);
  }
};

struct RadialFn {
  std::function<double(double)> f;
  template <class S>
    requires std::same_as<S, double>
  double operator()(const Vec3<S>& p) const {
    return f(p.norm());
  }
};

}  // namespace

ScalarField3 radial_function(std::function<double(double)> f) { return ScalarField3(RadialFn{std::move(f)}); }

OneForm3 gradient(const ScalarField3& f) { return OneForm3(GradientFn{f}); }
TwoForm3 exterior_derivative(const OneForm3& w) { return TwoForm3(ExteriorFn<3>{w}); }
TwoForm4 exterior_derivative(const OneForm4& A) { return TwoForm4(ExteriorFn<4>{A}); }

TwoForm3 hodge_star(const Metric3& metric, const OneForm3& w) {
  return TwoForm3([metric, w](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    return star_one(metric_at<S, 3>(metric, p), Vec3<S>(w(p)));
  });
}

OneForm3 hodge_star(const Metric3& metric, const TwoForm3& b) {
  return OneForm3([metric, b](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    return star_two(metric_at<S, 3>(metric, p), Mat3<S>(b(p)));
  });
}

OneForm3 curl(const Metric3& metric, const OneForm3& w) { return OneForm3(CurlFn{metric, w}); }
ScalarField3 codifferential(const Metric3& metric, const OneForm3& w) { return ScalarField3(CodiffFn{metric, w}); }
OneForm3 hodge_laplacian(const Metric3& metric, const OneForm3& w) { return OneForm3(HodgeLaplacianFn{metric, w}); }
OneForm3 rough_laplacian(const Metric3& metric, const OneForm3& w) { return OneForm3(RoughLaplacianFn{metric, w}); }

TwoForm4 dual_field(const Metric4& metric, const TwoForm4& F) {
  return TwoForm4([metric, F](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    return dual4(metric_at<S, 4>(metric, p), Mat4<S>(F(p)));
  });
}

TwoForm4 lie_derivative_4d(const TwoForm4& F, const VectorField<4>& K) { return TwoForm4(LieFn{F, K}); }

OneForm3 mirrored(const OneForm3& w) {
  return OneForm3([w](const auto& p) {
    using V = std::decay_t<decltype(p)>;
    V q = -p;
    return w(q);
  });
}

// ---- sphere quadrature ------------------------------------------------------

SphereQuadrature make_sphere_quadrature(double r, int n_theta, int n_phi) {
  if (n_theta < 1 || n_phi < 1 || !(r > 0.0)) throw InvalidInput("empty sphere quadrature");
  SphereQuadrature q;
  q.r = r;
  q.n_theta = n_theta;
  q.n_phi = n_phi;
  q.exactness = std::min(2 * n_theta - 1, n_phi - 1);
  Quadrature1D gl = gauss_legendre(n_theta);
  const double dphi = 2.0 * std::numbers::pi / n_phi;
  q.nodes.reserve(static_cast<std::size_t>(n_theta) * n_phi);
  for (int i = 0; i < n_theta; ++i) {
    double ct = gl.nodes[i];
    double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int j = 0; j < n_phi; ++j) {
      double ph = j * dphi;
      Eigen::Vector3d n(st * std::cos(ph), st * std::sin(ph), ct);
      q.normals.push_back(n);
      q.nodes.push_back(r * n);
      q.weights.push_back(r * r * gl.weights[i] * dphi);
    }
  }
  return q;
}

double area_density_ratio(const Metric3& metric, const Eigen::Vector3d& p) {
  MetricAt<double, 3> m = metric_at<double, 3>(metric, Vec3<double>(p));
  Eigen::Vector3d n = p.normalized();
  return m.vol * std::sqrt(n.dot(m.ginv * n));
}

double sphere_integral(const std::function<double(const Eigen::Vector3d&)>& f, const Metric3& metric,
                       const SphereQuadrature& quad) {
  if (quad.nodes.empty()) throw InvalidInput("empty sphere quadrature");
  double s = 0.0;
  for (std::size_t k = 0; k < quad.nodes.size(); ++k) {
    const auto& p = quad.nodes[k];
    double a = metric.exactly_flat ? 1.0 : area_density_ratio(metric, p);
    s += quad.weights[k] * f(p) * a;
  }
  return s;
}

std::complex<double> sphere_integral_complex(const std::function<std::complex<double>(const Eigen::Vector3d&)>& f,
                                             const Metric3& metric, const SphereQuadrature& quad) {
  if (quad.nodes.empty()) throw InvalidInput("empty sphere quadrature");
  std::complex<double> s = 0.0;
  for (std::size_t k = 0; k < quad.nodes.size(); ++k) {
    const auto& p = quad.nodes[k];
    double a = metric.exactly_flat ? 1.0 : area_density_ratio(metric, p);
    s += quad.weights[k] * f(p) * a;
  }
  return s;
}

double real_spherical_harmonic(int l, int m, double theta, double phi) {
  if (l < 0 || std::abs(m) > l) throw InvalidInput("invalid spherical harmonic indices");
  unsigned ul = static_cast<unsigned>(l);
  unsigned um = static_cast<unsigned>(std::abs(m));
  double base = std::sph_legendre(ul, um, theta);
  if (m == 0) return base;
  if (m > 0) return std::numbers::sqrt2 * base * std::cos(m * phi);
  return std::numbers::sqrt2 * base * std::sin(-m * phi);
}

}  // namespace inheritlab
