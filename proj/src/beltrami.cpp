#include "inheritlab/beltrami.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "inheritlab/spec_parse.hpp"

namespace inheritlab {

OneForm3 make_abc_field(double A, double B, double C) {
  return OneForm3([A, B, C](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    Vec3<S> w;
    w[0] = A * sin(p[2]) + C * cos(p[1]);
    w[1] = B * sin(p[0]) + A * cos(p[2]);
    w[2] = C * sin(p[1]) + B * cos(p[0]);
    return w;
  });
}

OneForm3 make_ck_field(double a, int l, int m) {
  if (a == 0.0) throw InvalidInput("curl eigenvalue a must be nonzero");
  if (l < 1) throw InvalidInput("Chandrasekhar-Kendall degree l must be positive");
  if (std::abs(m) > l) throw InvalidInput("Chandrasekhar-Kendall order needs |m| <= l");
  return OneForm3(CKField{a, l, m});
}

OneForm3 make_field(const std::string& spec) {
  ParsedSpec ps = parse_spec(spec);
  OneForm3 w;
  if (ps.name == "abc") {
    w = make_abc_field(ps.number("A", 1.0), ps.number("B", 1.0), ps.number("C", 1.0));
  } else if (ps.name == "ck") {
    w = make_ck_field(ps.number("a", 1.0), static_cast<int>(ps.number("l", 1.0)), static_cast<int>(ps.number("m", 0.0)));
  } else if (ps.name == "zero") {
    w = zero_covector<3>();
  } else if (ps.name == "dx") {
    w = constant_covector<3>(Eigen::Vector3d::UnitX());
  } else if (ps.name == "xdx") {
    w = OneForm3([](const auto& p) {
      using S = typename std::decay_t<decltype(p)>::Scalar;
      Vec3<S> v;
      v[0] = p[0];
      v[1] = S(0.0);
      v[2] = S(0.0);
      return v;
    });
  } else {
    throw InvalidInput("unknown field '" + spec + "'");
  }
  double scale_by = ps.number("scale", 1.0);
  if (scale_by != 1.0) w = scale<3>(scale_by, w);
  if (ps.number("mirror", 0.0) != 0.0) w = mirrored(w);
  return w;
}

double field_eigenvalue(const std::string& spec) {
  ParsedSpec ps = parse_spec(spec);
  double sign = ps.number("mirror", 0.0) != 0.0 ? -1.0 : 1.0;
  if (ps.name == "abc") return sign * 1.0;
  if (ps.name == "ck") return sign * ps.number("a", 1.0);
  return 0.0;
}

namespace {

struct TrigMode {
  Eigen::Vector3d amp;
  Eigen::Vector3d k;
  double phase;
};

std::vector<TrigMode> draw_modes(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<TrigMode> modes(count);
  for (auto& md : modes) {
    for (int i = 0; i < 3; ++i) {
      md.amp[i] = u(rng);
      md.k[i] = u(rng);
    }
    md.phase = std::numbers::pi * u(rng);
  }
  return modes;
}

}  // namespace

OneForm3 random_smooth_form(std::uint64_t seed, double amplitude, double envelope) {
  auto modes = draw_modes(seed, 4);
  return OneForm3([modes, amplitude, envelope](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    Vec3<S> w = Vec3<S>::Constant(S(0.0));
    for (std::size_t n = 0; n < modes.size(); ++n) {
      const auto& md = modes[n];
      S arg = md.phase + md.k[0] * p[0] + md.k[1] * p[1] + md.k[2] * p[2];
      S f = (n % 2 == 0) ? sin(arg) : cos(arg);
      for (int i = 0; i < 3; ++i) w[i] = w[i] + (amplitude * md.amp[i]) * f;
    }
    if (envelope > 0.0) {
      S e = exp(-envelope * (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]));
      for (int i = 0; i < 3; ++i) w[i] = w[i] * e;
    }
    return w;
  });
}

ScalarField3 random_smooth_scalar(std::uint64_t seed, double amplitude) {
  auto modes = draw_modes(seed, 3);
  return ScalarField3([modes, amplitude](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    S s(0.0);
    for (const auto& md : modes) {
      S arg = md.phase + md.k[0] * p[0] + md.k[1] * p[1] + md.k[2] * p[2];
      s = s + (amplitude * md.amp[0]) * sin(arg);
    }
    return s;
  });
}

ScalarField3 random_positive_lapse(std::uint64_t seed, double amplitude) {
  auto modes = draw_modes(seed, 1);
  const auto md = modes[0];
  return ScalarField3([md, amplitude](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    S arg = md.phase + md.k[0] * p[0] + md.k[1] * p[1] + md.k[2] * p[2];
    S env = exp(-(p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) / 50.0);
    return 1.0 + amplitude * sin(arg) * env;
  });
}

ResidualStats summarize(std::vector<double> values) {
  ResidualStats s;
  s.values = std::move(values);
  double sum = 0.0;
  for (double v : s.values) {
    s.max = std::max(s.max, v);
    sum += v;
  }
  s.mean = s.values.empty() ? 0.0 : sum / static_cast<double>(s.values.size());
  return s;
}

namespace {

double gnorm(const MetricAt<double, 3>& m, const Eigen::Vector3d& v) {
  return std::sqrt(std::max(0.0, v.dot(m.ginv * v)));
}

double tensor_gnorm(const MetricAt<double, 3>& m, const Eigen::Matrix3d& t) {
  Eigen::Matrix3d up = m.ginv * t * m.ginv;
  return std::sqrt(std::max(0.0, (t.array() * up.array()).sum()));
}

double positive_lapse(const ScalarField3& V, const Eigen::Vector3d& p) {
  double v = V(Vec3<double>(p));
  if (!(v > 0.0)) throw InvalidInput("lapse V must be positive at every evaluation point");
  return v;
}

}  // namespace

BeltramiReport beltrami_residual(const BeltramiProblem& prob, const std::vector<Eigen::Vector3d>& points) {
  if (prob.a == 0.0) throw InvalidInput("curl eigenvalue a must be nonzero");
  std::vector<double> c, d, l;
  double amp = 0.0;
  for (const auto& x : points) {
    Vec3<double> p = x;
    MetricAt<double, 3> m = metric_at<double, 3>(prob.metric, p);
    Eigen::Vector3d w = prob.omega(p);
    amp = std::max(amp, w.cwiseAbs().maxCoeff());
    Eigen::Vector3d cw = curl_at<double>(prob.metric, prob.omega, p);
    c.push_back(gnorm(m, cw - prob.a * w));
    d.push_back(std::abs(codifferential_at<double>(prob.metric, prob.omega, p)));
    Eigen::Vector3d lw = hodge_laplacian_at<double>(prob.metric, prob.omega, p);
    l.push_back(gnorm(m, lw - prob.a * prob.a * w));
  }
  BeltramiReport rep;
  rep.curl = summarize(std::move(c));
  rep.codiff = summarize(std::move(d));
  rep.laplacian = summarize(std::move(l));
  rep.trivial_field = amp == 0.0;
  return rep;
}

StaticSystemReport static_system_residual(const ScalarField3& V, const OneForm3& W, const Metric3& metric, double a,
                                          const std::vector<Eigen::Vector3d>& points) {
  std::vector<double> v1, w4, r1, tr, trp, chain;
  OneForm3 omega = scale<3>(V, W);
  using D2 = DualN<3, 2>;
  for (const auto& x : points) {
    Vec3<double> p = x;
    double v = positive_lapse(V, x);
    Curvature<double, 3> cv = curvature<double, 3>(metric, p);
    const auto& c = cv.conn;
    MetricAt<double, 3> m{c.g, c.ginv, c.det, c.vol};
    D2 VV = V(seed(seed(p)));
    Eigen::Vector3d dV;
    Eigen::Matrix3d hess;
    for (int i = 0; i < 3; ++i) {
      dV[i] = VV.v.d[i];
      for (int j = 0; j < 3; ++j) hess(i, j) = VV.d[i].d[j];
    }
    for (int k = 0; k < 3; ++k) hess -= c.gamma[k] * dV[k];
    double lap = (c.ginv.array() * hess.array()).sum();
    Eigen::Vector3d w = W(p);
    double w2 = w.dot(c.ginv * w);
    double rho_v1 = lap - 0.5 * w2 * v;
    v1.push_back(std::abs(rho_v1));
    Eigen::Vector3d lhs = curl_at<double>(metric, omega, p) + a * w;
    w4.push_back(gnorm(m, lhs));
    Eigen::Matrix3d rho = cv.ricci - 0.5 * cv.scalar * c.g - hess / v + w * w.transpose();
    r1.push_back(tensor_gnorm(m, rho));
    double tr_rho = (c.ginv.array() * rho.array()).sum();
    tr.push_back(std::abs(cv.scalar - w2));
    trp.push_back(std::abs(cv.scalar - 0.5 * w2));
    chain.push_back(std::abs((cv.scalar - w2) + 2.0 * (tr_rho + rho_v1 / v)));
  }
  StaticSystemReport rep;
  rep.v1 = summarize(std::move(v1));
  rep.w4 = summarize(std::move(w4));
  rep.r1 = summarize(std::move(r1));
  rep.trace = summarize(std::move(tr));
  rep.trace_as_printed = summarize(std::move(trp));
  rep.trace_chain = summarize(std::move(chain));
  return rep;
}

RescalingReport rescaling_identity_check(const ScalarField3& V, const OneForm3& W, const Metric3& metric, double a,
                                         const std::vector<Eigen::Vector3d>& points) {
  OneForm3 omega = scale<3>(V, W);
  Metric3 ghat = rescaled_metric(metric, V);
  std::vector<double> eq, eps, l4, lh;
  for (const auto& x : points) {
    Vec3<double> p = x;
    double v = positive_lapse(V, x);
    MetricAt<double, 3> m = metric_at<double, 3>(metric, p);
    MetricAt<double, 3> mh = metric_at<double, 3>(ghat, p);
    Eigen::Vector3d w = W(p);
    Eigen::Vector3d lhs4 = curl_at<double>(metric, omega, p) + a * w;
    Eigen::Vector3d lhsh = curl_at<double>(ghat, omega, p) + a * Eigen::Vector3d(omega(p));
    eq.push_back((lhsh - v * lhs4).norm());
    eps.push_back(std::abs(mh.vol - m.vol / (v * v * v)));
    l4.push_back(gnorm(m, lhs4));
    lh.push_back(gnorm(mh, lhsh));
  }
  RescalingReport rep;
  rep.equivalence = summarize(std::move(eq));
  rep.epsilon = summarize(std::move(eps));
  rep.lhs_w4 = summarize(std::move(l4));
  rep.lhs_hat = summarize(std::move(lh));
  return rep;
}

// ---- twisted system ---------------------------------------------------------

double complex_norm(const Metric3& metric, const Eigen::Vector3d& p, const CVec3<double>& v) {
  MetricAt<double, 3> m = metric_at<double, 3>(metric, Vec3<double>(p));
  return std::sqrt(std::max(0.0, v.re.dot(m.ginv * v.re) + v.im.dot(m.ginv * v.im)));
}

std::vector<double> twisted_residual(const TwistedProblem& prob, const std::vector<Eigen::Vector3d>& points) {
  if (prob.a == 0.0) throw InvalidInput("curl eigenvalue a must be nonzero");
  std::vector<double> out;
  out.reserve(points.size());
  for (const auto& x : points) {
    positive_lapse(prob.V, x);
    out.push_back(complex_norm(prob.metric, x, twisted_residual_at<double>(prob, Vec3<double>(x))));
  }
  return out;
}

TwistedProblem gauge_transform(const TwistedProblem& prob, const ScalarField3& chi) {
  TwistedProblem out = prob;
  const double a = prob.a;
  OneForm3 re = prob.zeta.re, im = prob.zeta.im;
  out.zeta.re = OneForm3([re, im, chi, a](const auto& p) {
    auto c = chi(p);
    auto cs = cos(a * c), sn = sin(a * c);
    auto zr = re(p);
    auto zi = im(p);
    for (int i = 0; i < 3; ++i) zr[i] = cs * zr[i] - sn * zi[i];
    return zr;
  });
  out.zeta.im = OneForm3([re, im, chi, a](const auto& p) {
    auto c = chi(p);
    auto cs = cos(a * c), sn = sin(a * c);
    auto zr = re(p);
    auto zi = im(p);
    for (int i = 0; i < 3; ++i) zi[i] = sn * zr[i] + cs * zi[i];
    return zi;
  });
  out.theta = add<3>(prob.theta, gradient(chi));
  return out;
}

namespace {

struct CrossFn {
  Metric3 metric;
  OneForm3 a;
  OneForm3 b;
  template <class S>
  Vec3<S> operator()(const Vec3<S>& p) const {
    return cross_at(metric_at<S, 3>(metric, p), Vec3<S>(a(p)), Vec3<S>(b(p)));
  }
};

struct ResidualPart {
  std::shared_ptr<const TwistedProblem> prob;
  bool imag = false;
  template <class S>
    requires WithinOrder<S, 1>
  Vec3<S> operator()(const Vec3<S>& p) const {
    CVec3<S> r = twisted_residual_at<S>(*prob, p);
    return imag ? r.im : r.re;
  }
};

struct DivergenceScaled {
  Metric3 metric;
  OneForm3 w;
  ScalarField3 V;
  double factor;
  template <class S>
    requires WithinOrder<S, 1>
  S operator()(const Vec3<S>& p) const {
    return (factor * V(p)) * divergence_at<S>(metric, w, p);
  }
};

Eigen::Vector3d grad_of(const ScalarField3& f, const Eigen::Vector3d& p) {
  return gradient_at<double>(f, Vec3<double>(p));
}

}  // namespace

std::complex<double> divergence_defect(const TwistedProblem& pr, const Eigen::Vector3d& x) {
  Vec3<double> p = x;
  double v = positive_lapse(pr.V, x);
  MetricAt<double, 3> m = metric_at<double, 3>(pr.metric, p);
  double dr = divergence_at<double>(pr.metric, pr.zeta.re, p);
  double di = divergence_at<double>(pr.metric, pr.zeta.im, p);
  Eigen::Vector3d cr = grad_of(pr.V, x) / v;
  Eigen::Vector3d th = pr.theta(p);
  Eigen::Vector3d ci = v * curl_at<double>(pr.metric, pr.theta, p) + pr.a * th;
  Eigen::Vector3d zr = pr.zeta.re(p), zi = pr.zeta.im(p);
  double re = cr.dot(m.ginv * zr) - ci.dot(m.ginv * zi);
  double im = cr.dot(m.ginv * zi) + ci.dot(m.ginv * zr);
  return {dr - re, di - im};
}

CVec3<double> second_order_defect(const TwistedProblem& pr, const Eigen::Vector3d& x) {
  Vec3<double> p = x;
  const double a = pr.a;
  double v = positive_lapse(pr.V, x);
  MetricAt<double, 3> m = metric_at<double, 3>(pr.metric, p);
  Eigen::Vector3d zr = pr.zeta.re(p), zi = pr.zeta.im(p);
  CVec3<double> lhs;
  lhs.re = -hodge_laplacian_at<double>(pr.metric, pr.zeta.re, p) + a * a * zr;
  lhs.im = -hodge_laplacian_at<double>(pr.metric, pr.zeta.im, p) + a * a * zi;

  OneForm3 Xr(CrossFn{pr.metric, pr.theta, pr.zeta.re});
  OneForm3 Xi(CrossFn{pr.metric, pr.theta, pr.zeta.im});
  Eigen::Vector3d xr = Xr(p), xi = Xi(p);
  // −ia curl(θ×ζ)
  Eigen::Vector3d t1r = a * curl_at<double>(pr.metric, Xi, p);
  Eigen::Vector3d t1i = -a * curl_at<double>(pr.metric, Xr, p);
  // a ∇V^{-1} × ζ + i a² V^{-1} θ×ζ
  Eigen::Vector3d gvi = -grad_of(pr.V, x) / (v * v);
  Eigen::Vector3d t2r = a * cross_at(m, Vec3<double>(gvi), Vec3<double>(zr)) - a * a / v * xi;
  Eigen::Vector3d t2i = a * cross_at(m, Vec3<double>(gvi), Vec3<double>(zi)) + a * a / v * xr;
  // a²(1 − V^{-2}) ζ
  double f3 = a * a * (1.0 - 1.0 / (v * v));
  // ∇[V(i div(θ×ζ) − ζ·∇V^{-1})]
  using T = Dual<double, 3>;
  Vec3<T> X = seed(p);
  MetricAt<T, 3> mx = metric_at<T, 3>(pr.metric, X);
  T VX = pr.V(X);
  Vec3<T> gviX = gradient_at<T>(pr.V, X);
  for (int i = 0; i < 3; ++i) gviX[i] = -gviX[i] / (VX * VX);
  T divr = divergence_at<T>(pr.metric, Xr, X);
  T divi = divergence_at<T>(pr.metric, Xi, X);
  Vec3<T> zrX = pr.zeta.re(X), ziX = pr.zeta.im(X);
  T qr = VX * (-divi - quad_form(mx.ginv, zrX, gviX));
  T qi = VX * (divr - quad_form(mx.ginv, ziX, gviX));
  Eigen::Vector3d t4r, t4i;
  for (int i = 0; i < 3; ++i) {
    t4r[i] = qr.d[i];
    t4i[i] = qi.d[i];
  }
  CVec3<double> out;
  out.re = lhs.re - (t1r + t2r + f3 * zr + t4r);
  out.im = lhs.im - (t1i + t2i + f3 * zi + t4i);
  return out;
}

std::complex<double> divergence_defect_from_residual(const TwistedProblem& pr, const Eigen::Vector3d& x) {
  Vec3<double> p = x;
  double v = positive_lapse(pr.V, x);
  auto shared = std::make_shared<const TwistedProblem>(pr);
  OneForm3 Rr(ResidualPart{shared, false}), Ri(ResidualPart{shared, true});
  MetricAt<double, 3> m = metric_at<double, 3>(pr.metric, p);
  double dr = divergence_at<double>(pr.metric, Rr, p);
  double di = divergence_at<double>(pr.metric, Ri, p);
  CVec3<double> res = twisted_residual_at<double>(pr, p);
  Eigen::Vector3d th = pr.theta(p);
  double tr = th.dot(m.ginv * res.re), ti = th.dot(m.ginv * res.im);
  // (V/a) div Res − iV θ·Res
  return {v / pr.a * dr + v * ti, v / pr.a * di - v * tr};
}

CVec3<double> second_order_defect_from_residual(const TwistedProblem& pr, const Eigen::Vector3d& x) {
  Vec3<double> p = x;
  double v = positive_lapse(pr.V, x);
  auto shared = std::make_shared<const TwistedProblem>(pr);
  OneForm3 Rr(ResidualPart{shared, false}), Ri(ResidualPart{shared, true});
  CVec3<double> res = twisted_residual_at<double>(pr, p);
  Eigen::Vector3d cr = curl_at<double>(pr.metric, Rr, p);
  Eigen::Vector3d ci = curl_at<double>(pr.metric, Ri, p);
  ScalarField3 qr(DivergenceScaled{pr.metric, Rr, pr.V, 1.0 / pr.a});
  ScalarField3 qi(DivergenceScaled{pr.metric, Ri, pr.V, 1.0 / pr.a});
  CVec3<double> out;
  out.re = pr.a / v * res.re - cr + grad_of(qr, x);
  out.im = pr.a / v * res.im - ci + grad_of(qi, x);
  return out;
}

SecondOrderReport stationary_second_order_residual(const TwistedProblem& prob,
                                                   const std::vector<Eigen::Vector3d>& points, bool with_jet) {
  if (prob.a == 0.0) throw InvalidInput("curl eigenvalue a must be nonzero");
  std::vector<double> d12, d13, r0, jet;
  double c = 0.0;
  for (const auto& x : points) {
    std::complex<double> dd = divergence_defect(prob, x);
    d12.push_back(std::abs(dd));
    double s13 = complex_norm(prob.metric, x, second_order_defect(prob, x));
    d13.push_back(s13);
    r0.push_back(complex_norm(prob.metric, x, twisted_residual_at<double>(prob, Vec3<double>(x))));
    if (with_jet) {
      using D2 = DualN<3, 2>;
      CVec3<D2> r = twisted_residual_at<D2>(prob, seed(seed(Vec3<double>(x))));
      double n0 = 0.0, n1 = 0.0, n2 = 0.0;
      for (const Vec3<D2>* part : {&r.re, &r.im}) {
        for (int i = 0; i < 3; ++i) {
          const D2& e = (*part)[i];
          n0 += square(e.v.v);
          for (int k = 0; k < 3; ++k) {
            n1 += square(e.v.d[k]);
            for (int l = 0; l < 3; ++l) n2 += square(e.d[k].d[l]);
          }
        }
      }
      double j = std::sqrt(n0) + std::sqrt(n1) + std::sqrt(n2);
      jet.push_back(j);
      if (j > 0.0) c = std::max(c, s13 / j);
    }
  }
  SecondOrderReport rep;
  rep.divergence = summarize(std::move(d12));
  rep.second_order = summarize(std::move(d13));
  rep.first_order = summarize(std::move(r0));
  rep.jet_norm = summarize(std::move(jet));
  rep.implication_constant = c;
  return rep;
}

// ---- sample sets ------------------------------------------------------------

std::vector<Eigen::Vector3d> random_shell_points(std::uint64_t seed, int n, double r_lo, double r_hi) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> u(r_lo, r_hi);
  std::vector<Eigen::Vector3d> out;
  out.reserve(n);
  while (static_cast<int>(out.size()) < n) {
    Eigen::Vector3d d(nd(rng), nd(rng), nd(rng));
    double len = d.norm();
    if (len < 1e-8) continue;
    out.push_back(u(rng) * d / len);
  }
  return out;
}

std::vector<Eigen::Vector3d> random_box_points(std::uint64_t seed, int n, double L) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-L, L);
  std::vector<Eigen::Vector3d> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.emplace_back(u(rng), u(rng), u(rng));
  return out;
}

}  // namespace inheritlab
