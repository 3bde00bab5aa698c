#include "inheritlab/em_check.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "inheritlab/spec_parse.hpp"

namespace inheritlab {

std::string to_string(WaveProfile p) {
  switch (p) {
    case WaveProfile::Sine: return "sin";
    case WaveProfile::Quadratic: return "u2";
    case WaveProfile::Bump: return "bump";
  }
  return "sin";
}

WaveProfile parse_wave_profile(const std::string& s) {
  if (s == "sin") return WaveProfile::Sine;
  if (s == "u2" || s == "u^2" || s == "quadratic") return WaveProfile::Quadratic;
  if (s == "bump") return WaveProfile::Bump;
  throw InvalidInput("unknown plane-wave profile '" + s + "' (sin, u2, bump)");
}

double wave_profile_derivative(WaveProfile kind, double u) {
  Eigen::Matrix<double, 1, 1> x;
  x[0] = u;
  return wave_profile(kind, seed(x)[0]).d[0];
}

namespace {

std::vector<Eigen::Vector4d> box_sampler(std::uint64_t seed, int n, const Eigen::Vector4d& lo, const Eigen::Vector4d& hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Eigen::Vector4d> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) {
    Eigen::Vector4d p;
    for (int i = 0; i < 4; ++i) p[i] = lo[i] + (hi[i] - lo[i]) * u(rng);
    out.push_back(p);
  }
  return out;
}

VectorField<4> coordinate_vector(int i) { return constant_covector<4>(Eigen::Vector4d::Unit(i)); }

std::function<double(const Eigen::Vector4d&)> constant_a(double a) {
  return [a](const Eigen::Vector4d&) { return a; };
}

double max_abs(const Eigen::Matrix4d& m) { return m.cwiseAbs().maxCoeff(); }

// 3D field at the spatial part of a 4D point; the jets of x must not involve t.
template <template <class> class Out, class S>
Out<S> on_space(const AnyField<3, Out>& f, const Vec4<S>& p) {
  Vec<recast_t<3, S>, 3> x;
  for (int i = 0; i < 3; ++i) x[i] = recast<3>(p[i + 1], -1);
  return recast<4>(f(x), 1);
}

// 4D field on the slice {t = const}.
template <template <class> class Out, class S>
Out<S> on_slice(const AnyField<4, Out>& f, double t, const Vec3<S>& x) {
  using S4 = recast_t<4, S>;
  Vec<S4, 4> p;
  p[0] = S4(t);
  for (int i = 0; i < 3; ++i) p[i + 1] = recast<4>(x[i], 1);
  return recast<3>(f(p), -1);
}

}  // namespace

ExactSolution minkowski_solution() {
  ExactSolution s;
  s.name = "minkowski";
  s.coordinates = {"t", "x", "y", "z"};
  s.metric.name = "minkowski";
  s.metric.signature = Signature::Lorentzian;
  s.metric.g = MatrixField<4>([](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    Mat4<S> g = Mat4<S>::Constant(S(0.0));
    g(0, 0) = S(-1.0);
    for (int i = 1; i < 4; ++i) g(i, i) = S(1.0);
    return g;
  });
  s.F = TwoForm4([](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    return Mat4<S>(Mat4<S>::Constant(S(0.0)));
  });
  s.symmetries.push_back({"d_t", coordinate_vector(0), constant_a(0.0)});
  s.sampler = [](std::uint64_t seed, int n) {
    return box_sampler(seed, n, Eigen::Vector4d::Constant(-5.0), Eigen::Vector4d::Constant(5.0));
  };
  return s;
}

ExactSolution mc_solution(double b) {
  if (!(b > 0.0)) throw InvalidInput("mc solution needs b > 0");
  ExactSolution s;
  s.name = "mc";
  s.params["b"] = b;
  s.coordinates = {"t", "r", "z", "phi"};
  s.metric.name = "mc";
  s.metric.signature = Signature::Lorentzian;
  s.metric.domain = [](const Eigen::Vector4d& p) { return p[1] > 0.0; };
  s.metric.g = MatrixField<4>([b](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    const S& r = p[1];
    Vec4<S> w;
    w[0] = S(1.0);
    w[1] = S(0.0);
    w[2] = S(0.0);
    w[3] = -b * r * r;
    Mat4<S> g;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) g(i, j) = -(w[i] * w[j]);
    S e = exp(b * b * r * r);
    g(1, 1) = g(1, 1) + e;
    g(2, 2) = g(2, 2) + e;
    g(3, 3) = g(3, 3) + r * r;
    return g;
  });
  OneForm4 A([b](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    S c = cos(2.0 * b * p[2]);
    Vec4<S> a;
    a[0] = c;
    a[1] = S(0.0);
    a[2] = S(0.0);
    a[3] = -b * p[1] * p[1] * c;
    return a;
  });
  s.F = exterior_derivative(A);
  s.symmetries.push_back({"d_z", coordinate_vector(2), constant_a(-2.0 * b)});
  s.symmetries.push_back({"d_t", coordinate_vector(0), constant_a(0.0)});
  s.symmetries.push_back({"d_phi", coordinate_vector(3), constant_a(0.0)});
  s.sampler = [](std::uint64_t seed, int n) {
    return box_sampler(seed, n, Eigen::Vector4d(-5.0, 0.1, -5.0, 0.0),
                       Eigen::Vector4d(5.0, 2.0, 5.0, 2.0 * std::numbers::pi));
  };
  return s;
}

ExactSolution ppwave_solution(WaveProfile f, double b) {
  if (!(b > 0.0)) throw InvalidInput("plane wave needs b > 0");
  ExactSolution s;
  s.name = "ppwave";
  s.params["b"] = b;
  s.coordinates = {"u", "v", "y", "x"};
  s.metric.name = "ppwave:" + to_string(f);
  s.metric.signature = Signature::Lorentzian;
  s.metric.g = MatrixField<4>([b](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    Mat4<S> g = Mat4<S>::Constant(S(0.0));
    g(0, 1) = S(-1.0);
    g(1, 0) = S(-1.0);
    g(0, 0) = -(b * b) * (p[2] * p[2] + p[3] * p[3]);
    g(2, 2) = S(1.0);
    g(3, 3) = S(1.0);
    return g;
  });
  OneForm4 A([b, f](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    S ph = wave_profile(f, p[0]);
    Vec4<S> a = Vec4<S>::Constant(S(0.0));
    a[0] = (-std::numbers::sqrt2 * b) * (p[3] * cos(ph) - p[2] * sin(ph));
    return a;
  });
  s.F = exterior_derivative(A);
  s.symmetries.push_back(
      {"d_u", coordinate_vector(0), [f](const Eigen::Vector4d& p) { return wave_profile_derivative(f, p[0]); }});
  s.symmetries.push_back({"d_v", coordinate_vector(1), constant_a(0.0)});
  s.sampler = [](std::uint64_t seed, int n) {
    return box_sampler(seed, n, Eigen::Vector4d::Constant(-2.0), Eigen::Vector4d::Constant(2.0));
  };
  return s;
}

ExactSolution make_solution(const std::string& spec) {
  ParsedSpec ps = parse_spec(spec);
  if (ps.name == "minkowski") return minkowski_solution();
  if (ps.name == "mc") return mc_solution(ps.number("b", 0.3));
  if (ps.name == "ppwave") return ppwave_solution(parse_wave_profile(ps.text("f", "sin")), ps.number("b", 1.0));
  throw InvalidInput("unknown solution '" + spec + "'");
}

std::vector<std::string> solution_names() { return {"minkowski", "mc", "ppwave"}; }

// ---- audits -----------------------------------------------------------------

MaxwellReport maxwell_residual(const ExactSolution& sol, const std::vector<Eigen::Vector4d>& points) {
  TwoForm4 dual = dual_field(sol.metric, sol.F);
  std::vector<double> c, cc;
  for (const auto& p : points) {
    evaluate_metric<4>(sol.metric, p);
    c.push_back(closure_residual<4>(sol.F, p));
    cc.push_back(closure_residual<4>(dual, p));
  }
  return {summarize(std::move(c)), summarize(std::move(cc))};
}

StressAudit einstein_proportionality(const ExactSolution& sol, const std::vector<Eigen::Vector4d>& points,
                                     double floor_fraction) {
  if (points.size() < 10) throw InvalidInput("Einstein proportionality needs at least 10 points");
  StressAudit a;
  a.points = points;
  double gt = 0.0, tt = 0.0, gmax = 0.0, tmax = 0.0;
  for (const auto& p : points) {
    Curvature<double, 4> cv = evaluate_metric<4>(sol.metric, p);
    MetricAt<double, 4> m{cv.conn.g, cv.conn.ginv, cv.conn.det, cv.conn.vol};
    Eigen::Matrix4d G = cv.ricci - 0.5 * cv.scalar * m.g;
    Eigen::Matrix4d T = stress_tensor<double>(m, sol.F(Vec4<double>(p)));
    a.G.push_back(G);
    a.T.push_back(T);
    gt += (G.array() * T.array()).sum();
    tt += T.squaredNorm();
    gmax = std::max(gmax, max_abs(G));
    tmax = std::max(tmax, max_abs(T));
    a.max_trace = std::max(a.max_trace, std::abs((m.ginv.array() * T.array()).sum()));
    a.max_asymmetry = std::max(a.max_asymmetry, max_abs(T - T.transpose()));
  }
  if (tmax == 0.0) {
    if (gmax > 1e-12) throw InvalidInput("stress tensor vanishes while the Einstein tensor does not");
    a.vacuum = true;
    return a;
  }
  a.kappa = gt / tt;
  const double floor = floor_fraction * std::max(gmax, tmax);
  a.floor = floor;
  for (std::size_t k = 0; k < points.size(); ++k) {
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double r = std::abs(a.G[k](i, j) - a.kappa * a.T[k](i, j));
        a.max_abs_residual = std::max(a.max_abs_residual, r);
        a.max_relative_residual =
            std::max(a.max_relative_residual, r / (std::abs(a.G[k](i, j)) + std::abs(a.T[k](i, j)) + floor));
      }
  }
  return a;
}

InheritanceReport inheritance_defect(const Metric4& metric, const TwoForm4& F, const VectorField<4>& K,
                                     const std::function<double(const Eigen::Vector4d&)>& a,
                                     const std::vector<Eigen::Vector4d>& points) {
  TwoForm4 dual = dual_field(metric, F);
  std::vector<double> d1, d2;
  for (const auto& x : points) {
    Vec4<double> p = x;
    double av = a(x);
    Eigen::Matrix4d f = F(p), fs = dual(p);
    Eigen::Matrix4d lf = lie_derivative_at<double>(F, K, p);
    Eigen::Matrix4d lfs = lie_derivative_at<double>(dual, K, p);
    d1.push_back(max_abs(lf + av * fs));
    d2.push_back(max_abs(lfs - av * f));
  }
  return {summarize(std::move(d1)), summarize(std::move(d2))};
}

InheritanceReport inheritance_defect(const ExactSolution& sol, const std::vector<Eigen::Vector4d>& points,
                                     std::size_t symmetry) {
  if (symmetry >= sol.symmetries.size()) throw InvalidInput("symmetry index out of range");
  const Symmetry& s = sol.symmetries[symmetry];
  return inheritance_defect(sol.metric, sol.F, s.K, s.a, points);
}

ResidualStats killing_audit(const Metric4& metric, const VectorField<4>& K, const std::vector<Eigen::Vector4d>& points) {
  using T = Dual<double, 4>;
  std::vector<double> out;
  for (const auto& x : points) {
    Vec4<T> X = seed(Vec4<double>(x));
    Mat4<T> g = metric.g(X);
    Vec4<T> k = K(X);
    double worst = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double s = 0.0;
        for (int c = 0; c < 4; ++c)
          s += k[c].v * g(i, j).d[c] + g(c, j).v * k[c].d[i] + g(i, c).v * k[c].d[j];
        worst = std::max(worst, std::abs(0.5 * s));
      }
    out.push_back(worst);
  }
  return summarize(std::move(out));
}

ResidualStats duality_invariance(const ExactSolution& sol, const std::vector<Eigen::Vector4d>& points,
                                 std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  std::vector<double> out;
  for (const auto& x : points) {
    Vec4<double> p = x;
    MetricAt<double, 4> m = metric_at<double, 4>(sol.metric, p);
    Eigen::Matrix4d F = sol.F(p);
    Eigen::Matrix4d Fs = dual4(m, F);
    double phi = u(rng);
    Eigen::Matrix4d R = std::cos(phi) * F + std::sin(phi) * Fs;
    out.push_back(max_abs(stress_tensor<double>(m, R) - stress_tensor<double>(m, F)));
  }
  return summarize(std::move(out));
}

NonNullReport static_nonnull_check(const Metric4& metric, const TwoForm4& F, const VectorField<4>& K,
                                   const std::vector<Eigen::Vector4d>& points) {
  NonNullReport rep;
  rep.f_min = std::numeric_limits<double>::infinity();
  rep.f_max = -std::numeric_limits<double>::infinity();
  std::vector<double> res;
  for (const auto& x : points) {
    Vec4<double> p = x;
    MetricAt<double, 4> m = metric_at<double, 4>(metric, p);
    Eigen::Matrix4d T = stress_tensor<double>(m, F(p));
    Eigen::Vector4d k = K(p);
    Eigen::Vector4d kl = m.g * k;
    double kk = k.dot(kl);
    if (kk == 0.0) throw InvalidInput("Killing vector is null at a sample point");
    Eigen::Vector4d tk = T * k;
    double f = k.dot(tk) / kk;
    rep.f_min = std::min(rep.f_min, f);
    rep.f_max = std::max(rep.f_max, f);
    res.push_back((tk - f * kl).cwiseAbs().maxCoeff());
  }
  rep.proportionality = summarize(std::move(res));
  return rep;
}

// ---- time shift -------------------------------------------------------------

namespace {

template <class S>
  requires WithinOrder<S, 1>
std::pair<Vec4<S>, Mat4<S>> shift_map(const ScalarField3& chi, const OneForm3& dchi, const Vec4<S>& p) {
  Vec4<S> q = p;
  q[0] = p[0] + on_space(chi, p);
  Vec3<S> dc = on_space(dchi, p);
  Mat4<S> J = Mat4<S>::Identity();
  for (int i = 0; i < 3; ++i) J(0, i + 1) = dc[i];
  return {q, J};
}

struct ShiftMetricFn {
  Metric4 g;
  ScalarField3 chi;
  OneForm3 dchi;
  template <class S>
    requires WithinOrder<S, 1>
  Mat4<S> operator()(const Vec4<S>& p) const {
    auto [q, J] = shift_map<S>(chi, dchi, p);
    Mat4<S> m = g.g(q);
    return (J.transpose() * m * J).eval();
  }
};

struct ShiftFieldFn {
  TwoForm4 F;
  ScalarField3 chi;
  OneForm3 dchi;
  template <class S>
    requires WithinOrder<S, 1>
  Mat4<S> operator()(const Vec4<S>& p) const {
    auto [q, J] = shift_map<S>(chi, dchi, p);
    Mat4<S> f = F(q);
    return (J.transpose() * f * J).eval();
  }
};

template <class S>
Vec4<S> embed(const S& t, const Vec3<S>& x) {
  Vec4<S> p;
  p[0] = t;
  for (int i = 0; i < 3; ++i) p[i + 1] = x[i];
  return p;
}

}  // namespace

Metric4 time_shift_metric(const Metric4& g, const ScalarField3& chi) {
  Metric4 out = g;
  out.name = g.name + ":time-shifted";
  out.g = MatrixField<4>(ShiftMetricFn{g, chi, gradient(chi)});
  out.domain = nullptr;
  out.exactly_flat = false;
  return out;
}

TwoForm4 time_shift_field(const TwoForm4& F, const ScalarField3& chi) { return TwoForm4(ShiftFieldFn{F, chi, gradient(chi)}); }

// ---- static reduction -------------------------------------------------------

namespace {

StaticConstruction build_static(const ScalarField3& V, const OneForm3& W, const Metric3& g3, double a4, double bsign) {
  StaticConstruction out;
  out.metric.name = "static:" + g3.name;
  out.metric.signature = Signature::Lorentzian;
  out.metric.g = MatrixField<4>([V, g3](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    S v = on_space(V, p);
    Mat3<S> h = on_space(g3.g, p);
    Mat4<S> g = Mat4<S>::Constant(S(0.0));
    g(0, 0) = -(v * v);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g(i + 1, j + 1) = h(i, j);
    return g;
  });
  out.F = TwoForm4([V, W, g3, a4, bsign](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    S v = on_space(V, p);
    Vec3<S> w = on_space(W, p);
    S s = sin(a4 * p[0]), c = cos(a4 * p[0]);
    Vec3<S> B;
    for (int i = 0; i < 3; ++i) B[i] = -bsign * w[i] * c;
    Mat3<S> beta = star_one(metric_from<S, 3>(on_space(g3.g, p)), B);
    Mat4<S> F = Mat4<S>::Constant(S(0.0));
    for (int i = 0; i < 3; ++i) {
      F(0, i + 1) = v * w[i] * s;
      F(i + 1, 0) = -F(0, i + 1);
      for (int j = 0; j < 3; ++j) F(i + 1, j + 1) = beta(i, j);
    }
    return F;
  });
  return out;
}

// E_i = V^{-1}F_0i and B_i = V^{-1}F*_0i at (t, x).
template <class S>
std::pair<Vec3<S>, Vec3<S>> electric_magnetic(const Metric4& g4, const TwoForm4& F, double t, const Vec3<S>& x) {
  MetricAt<S, 4> m = metric_from<S, 4>(on_slice(g4.g, t, x));
  Mat4<S> f = on_slice(F, t, x);
  Mat4<S> fs = dual4(m, f);
  S v = sqrt(-m.g(0, 0));
  Vec3<S> E, B;
  for (int i = 0; i < 3; ++i) {
    E[i] = f(0, i + 1) / v;
    B[i] = fs(0, i + 1) / v;
  }
  return {E, B};
}

void check_slice(const Metric4& g4, const std::vector<Eigen::Vector3d>& points, double t1, double t2, bool need_static) {
  for (const auto& x : points) {
    Eigen::Matrix4d a = g4.g(Vec4<double>(embed(t1, Vec3<double>(x))));
    Eigen::Matrix4d b = g4.g(Vec4<double>(embed(t2, Vec3<double>(x))));
    double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if ((a - b).cwiseAbs().maxCoeff() > 1e-12 * scale) throw InvalidInput("metric depends on t: not stationary");
    if (!(-a(0, 0) > 0.0)) throw InvalidInput("lapse V must be positive on the slice");
    if (need_static && a.block<1, 3>(0, 1).cwiseAbs().maxCoeff() > 1e-12 * scale)
      throw InvalidInput("metric has dt dx cross terms: not static");
  }
}

}  // namespace

StaticConstruction static_reduction_construct(const ScalarField3& V, const OneForm3& W, const Metric3& g3, double a4) {
  return build_static(V, W, g3, a4, 1.0);
}

StaticConstruction static_reduction_construct_mismatched(const ScalarField3& V, const OneForm3& W, const Metric3& g3,
                                                         double a4) {
  return build_static(V, W, g3, a4, -1.0);
}

StaticExtraction static_reduction_extract(const Metric4& g4, const TwoForm4& F, double a4,
                                          const std::vector<Eigen::Vector3d>& points, double t1, double t2,
                                          double tol) {
  check_slice(g4, points, t1, t2, true);
  StaticExtraction out;
  out.a4 = a4;
  out.a3 = -a4;
  out.V = ScalarField3([g4, t1](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::Scalar;
    Mat4<S> g = on_slice(g4.g, t1, Vec3<S>(x));
    return S(sqrt(-g(0, 0)));
  });
  out.g3.name = g4.name + ":slice";
  out.g3.g = MatrixField<3>([g4, t1](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::Scalar;
    Mat4<S> g = on_slice(g4.g, t1, Vec3<S>(x));
    return Mat3<S>(g.template block<3, 3>(1, 1));
  });
  out.W = OneForm3([g4, F, t1, a4](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::Scalar;
    auto [E, B] = electric_magnetic<S>(g4, F, t1, Vec3<S>(x));
    double s = std::sin(a4 * t1), c = std::cos(a4 * t1);
    Vec3<S> w;
    for (int i = 0; i < 3; ++i) w[i] = s * E[i] - c * B[i];
    return w;
  });
  const double s2 = std::sin(a4 * t2), c2 = std::cos(a4 * t2);
  for (const auto& x : points) {
    Vec3<double> p = x;
    Eigen::Vector3d w = out.W(p);
    auto [E1, B1] = electric_magnetic<double>(g4, F, t1, p);
    auto [E2, B2] = electric_magnetic<double>(g4, F, t2, p);
    const double s1 = std::sin(a4 * t1), c1 = std::cos(a4 * t1);
    double scale = std::max({1.0, w.cwiseAbs().maxCoeff()});
    double mis = std::max({(E1 - s1 * w).cwiseAbs().maxCoeff(), (B1 + c1 * w).cwiseAbs().maxCoeff(),
                           (E2 - s2 * w).cwiseAbs().maxCoeff(), (B2 + c2 * w).cwiseAbs().maxCoeff()}) /
                 scale;
    out.consistency = std::max(out.consistency, mis);
    if (mis > tol) {
      throw AnsatzInconsistency("static ansatz E = W sin(at), B = -W cos(at) fails at x = (" + std::to_string(x[0]) +
                                ", " + std::to_string(x[1]) + ", " + std::to_string(x[2]) +
                                "), mismatch " + std::to_string(mis));
    }
  }
  return out;
}

// ---- stationary reduction ---------------------------------------------------

StationaryConstruction stationary_reduction_construct(const TwistedProblem& d) {
  const double a4 = -d.a;
  StationaryConstruction out;
  out.metric.name = "stationary:" + d.metric.name;
  out.metric.signature = Signature::Lorentzian;
  Metric3 g3 = d.metric;
  ScalarField3 V = d.V;
  OneForm3 theta = d.theta;
  out.metric.g = MatrixField<4>([g3, V, theta](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    S v2 = on_space(V, p);
    v2 = v2 * v2;
    Vec3<S> th = on_space(theta, p);
    Mat3<S> h = on_space(g3.g, p);
    Mat4<S> g;
    g(0, 0) = -v2;
    for (int i = 0; i < 3; ++i) {
      g(0, i + 1) = -v2 * th[i];
      g(i + 1, 0) = g(0, i + 1);
      for (int j = 0; j < 3; ++j) g(i + 1, j + 1) = h(i, j) - v2 * th[i] * th[j];
    }
    return g;
  });
  Metric4 g4 = out.metric;
  ComplexOneForm3 zeta = d.zeta;
  out.F = TwoForm4([g4, V, zeta, a4](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    MetricAt<S, 4> m = metric_at<S, 4>(g4, p);
    S v = on_space(V, p);
    Vec3<S> zr = on_space(zeta.re, p), zi = on_space(zeta.im, p);
    S c = cos(a4 * p[0]), s = sin(a4 * p[0]);
    // E − iB = V^{-1} ζ e^{−i a4 t}
    Vec3<S> E, B;
    for (int i = 0; i < 3; ++i) {
      E[i] = (zr[i] * c + zi[i] * s) / v;
      B[i] = -(zi[i] * c - zr[i] * s) / v;
    }
    Mat4<S> F = Mat4<S>::Constant(S(0.0));
    for (int i = 0; i < 3; ++i) {
      F(0, i + 1) = v * E[i];
      F(i + 1, 0) = -F(0, i + 1);
    }
    Mat4<S> d0 = dual4(m, F);
    Mat3<S> M;
    std::array<Mat4<S>, 3> basis;
    for (int k = 0; k < 3; ++k) {
      int i = (k + 1) % 3 + 1, j = (k + 2) % 3 + 1;
      basis[k] = Mat4<S>::Constant(S(0.0));
      basis[k](i, j) = S(1.0);
      basis[k](j, i) = S(-1.0);
      Mat4<S> dk = dual4(m, basis[k]);
      for (int r = 0; r < 3; ++r) M(r, k) = dk(0, r + 1);
    }
    Vec3<S> rhs;
    for (int r = 0; r < 3; ++r) rhs[r] = v * B[r] - d0(0, r + 1);
    Vec3<S> beta = mat_vec<S, 3>(invert<S, 3>(M).inv, rhs);
    for (int k = 0; k < 3; ++k)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) F(i, j) = F(i, j) + beta[k] * basis[k](i, j);
    return F;
  });
  return out;
}

StationaryExtraction stationary_reduction_extract(const Metric4& g4, const TwoForm4& F, double a4,
                                                  const std::vector<Eigen::Vector3d>& points, double t1, double t2,
                                                  double tol) {
  check_slice(g4, points, t1, t2, false);
  StationaryExtraction out;
  out.a4 = a4;
  TwistedProblem& pr = out.problem;
  pr.a = -a4;
  pr.V = ScalarField3([g4, t1](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::Scalar;
    Mat4<S> g = on_slice(g4.g, t1, Vec3<S>(x));
    return S(sqrt(-g(0, 0)));
  });
  pr.theta = OneForm3([g4, t1](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::Scalar;
    Mat4<S> g = on_slice(g4.g, t1, Vec3<S>(x));
    Vec3<S> th;
    for (int i = 0; i < 3; ++i) th[i] = g(0, i + 1) / g(0, 0);
    return th;
  });
  pr.metric.name = g4.name + ":quotient";
  pr.metric.g = MatrixField<3>([g4, t1](const auto& x) {
    using S = typename std::decay_t<decltype(x)>::Scalar;
    Mat4<S> g = on_slice(g4.g, t1, Vec3<S>(x));
    Mat3<S> h;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) h(i, j) = g(i + 1, j + 1) - g(0, i + 1) * g(0, j + 1) / g(0, 0);
    return h;
  });
  auto zeta_at = [g4, F, a4](double t, bool imag) {
    return OneForm3([g4, F, a4, t, imag](const auto& x) {
      using S = typename std::decay_t<decltype(x)>::Scalar;
      auto [E, B] = electric_magnetic<S>(g4, F, t, Vec3<S>(x));
      Mat4<S> g = on_slice(g4.g, t, Vec3<S>(x));
      S v = sqrt(-g(0, 0));
      double c = std::cos(a4 * t), s = std::sin(a4 * t);
      // ζ = V (E − iB) e^{i a4 t}
      Vec3<S> z;
      for (int i = 0; i < 3; ++i) z[i] = imag ? v * (E[i] * s - B[i] * c) : v * (E[i] * c + B[i] * s);
      return z;
    });
  };
  pr.zeta.re = zeta_at(t1, false);
  pr.zeta.im = zeta_at(t1, true);
  OneForm3 re2 = zeta_at(t2, false), im2 = zeta_at(t2, true);
  for (const auto& x : points) {
    Vec3<double> p = x;
    Eigen::Vector3d r1 = pr.zeta.re(p), i1 = pr.zeta.im(p);
    Eigen::Vector3d r2 = re2(p), i2 = im2(p);
    double scale = std::max({1.0, r1.cwiseAbs().maxCoeff(), i1.cwiseAbs().maxCoeff()});
    double mis = std::max((r1 - r2).cwiseAbs().maxCoeff(), (i1 - i2).cwiseAbs().maxCoeff()) / scale;
    out.consistency = std::max(out.consistency, mis);
    if (mis > tol)
      throw AnsatzInconsistency("phase inconsistency: ζ differs between t1 and t2 at x = (" + std::to_string(x[0]) +
                                ", " + std::to_string(x[1]) + ", " + std::to_string(x[2]) + "), mismatch " +
                                std::to_string(mis));
  }
  return out;
}

TwistedExemplar twisted_abc_exemplar(const ScalarField3& chi) {
  StaticConstruction st = static_reduction_construct(constant_scalar<3>(1.0), make_abc_field(), flat_metric3(), 1.0);
  TwistedExemplar ex;
  ex.metric = time_shift_metric(st.metric, chi);
  ex.metric.name = "abc-time-shifted";
  ex.F = time_shift_field(st.F, chi);
  ex.chi = chi;
  ex.a4 = 1.0;
  return ex;
}

}  // namespace inheritlab
