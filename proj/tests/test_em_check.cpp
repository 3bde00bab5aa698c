#include <cmath>

#include "doctest.h"
#include "inheritlab/em_check.hpp"

using namespace inheritlab;

namespace {

std::vector<Eigen::Vector4d> slice_points(const std::vector<Eigen::Vector3d>& pts, double t) {
  std::vector<Eigen::Vector4d> out;
  for (const auto& x : pts) out.emplace_back(t, x[0], x[1], x[2]);
  return out;
}

double max_diff(const OneForm3& a, const OneForm3& b, const std::vector<Eigen::Vector3d>& pts) {
  double m = 0.0;
  for (const auto& x : pts) m = std::max(m, (Eigen::Vector3d(a(Vec3<double>(x))) - Eigen::Vector3d(b(Vec3<double>(x)))).cwiseAbs().maxCoeff());
  return m;
}

}  // namespace

TEST_CASE("Minkowski vacuum") {
  ExactSolution s = minkowski_solution();
  auto pts = s.sampler(1, 20);
  auto mx = maxwell_residual(s, pts);
  CHECK(mx.closure.max == 0.0);
  CHECK(mx.coclosure.max == 0.0);
  auto st = einstein_proportionality(s, pts);
  CHECK(st.vacuum);
  CHECK(st.max_abs_residual == 0.0);
}

TEST_CASE("mc solution") {
  for (double b : {0.1, 0.3, 1.0}) {
    ExactSolution s = mc_solution(b);
    auto pts = s.sampler(7, 100);
    auto mx = maxwell_residual(s, pts);
    CHECK(mx.closure.max <= 1e-9);
    CHECK(mx.coclosure.max <= 1e-9);

    auto st = einstein_proportionality(s, pts);
    CHECK_FALSE(st.vacuum);
    // Sympy: G = κT with κ = 1 in these units.
    CHECK(st.kappa == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(st.max_relative_residual <= 1e-8);
    CHECK(st.max_trace <= 1e-10);
    CHECK(st.max_asymmetry <= 1e-12);

    REQUIRE(s.symmetries[0].name == "d_z");
    CHECK(s.symmetries[0].a(pts[0]) == doctest::Approx(-2.0 * b));
    auto inh = inheritance_defect(s, pts, 0);
    CHECK(inh.first.max <= 1e-10);
    CHECK(inh.second.max <= 1e-10);
    // ∂_t is inherited.
    auto t = inheritance_defect(s, pts, 1);
    CHECK(t.first.max == doctest::Approx(0.0));
    for (std::size_t k = 0; k < s.symmetries.size(); ++k) CHECK(killing_audit(s.metric, s.symmetries[k].K, pts).max <= 1e-10);
    CHECK(duality_invariance(s, pts, 3).max <= 1e-10);
  }
  CHECK_THROWS_AS(mc_solution(0.0), InvalidInput);
}

TEST_CASE("wrong inheritance constant is detected") {
  ExactSolution s = mc_solution(0.3);
  auto pts = s.sampler(8, 20);
  auto bad = inheritance_defect(s.metric, s.F, s.symmetries[0].K, [](const Eigen::Vector4d&) { return 0.6; }, pts);
  CHECK(bad.first.max > 1e-2);
}

TEST_CASE("plane waves") {
  for (auto f : {WaveProfile::Sine, WaveProfile::Quadratic, WaveProfile::Bump}) {
    ExactSolution s = ppwave_solution(f);
    auto pts = s.sampler(9, 100);
    auto mx = maxwell_residual(s, pts);
    CHECK(mx.closure.max <= 1e-9);
    CHECK(mx.coclosure.max <= 1e-9);
    auto st = einstein_proportionality(s, pts);
    CHECK(st.kappa == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(st.max_relative_residual <= 1e-8);
    CHECK(st.max_trace <= 1e-10);
    auto inh = inheritance_defect(s, pts, 0);
    CHECK(inh.first.max <= 1e-9);
    CHECK(inh.second.max <= 1e-9);
    for (const auto& p : pts) CHECK(s.symmetries[0].a(p) == doctest::Approx(wave_profile_derivative(f, p[0])));
    for (std::size_t k = 0; k < s.symmetries.size(); ++k) CHECK(killing_audit(s.metric, s.symmetries[k].K, pts).max <= 1e-10);
    CHECK(duality_invariance(s, pts, 4).max <= 1e-10);
  }
  // Same κ across solutions.
  ExactSolution mc = mc_solution(0.3);
  ExactSolution pp = ppwave_solution(WaveProfile::Quadratic);
  CHECK(einstein_proportionality(pp, pp.sampler(1, 50)).kappa ==
        doctest::Approx(einstein_proportionality(mc, mc.sampler(1, 50)).kappa).epsilon(1e-8));
  CHECK(wave_profile_derivative(WaveProfile::Quadratic, 0.7) == doctest::Approx(1.4));
  CHECK(wave_profile_derivative(WaveProfile::Bump, 1.5) == 0.0);
  CHECK(parse_wave_profile("u2") == WaveProfile::Quadratic);
  CHECK_THROWS_AS(make_solution("nosuch"), InvalidInput);
}

TEST_CASE("stress audit preconditions") {
  ExactSolution s = mc_solution(0.3);
  CHECK_THROWS_AS(einstein_proportionality(s, s.sampler(1, 5)), InvalidInput);
  ExactSolution empty = s;
  empty.F = TwoForm4([](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    return Mat4<S>::Constant(S(0.0)).eval();
  });
  CHECK_THROWS_AS(einstein_proportionality(empty, s.sampler(1, 20)), InvalidInput);
}

TEST_CASE("static reduction") {
  auto pts = random_box_points(5, 40, 2.0);
  ScalarField3 V = random_positive_lapse(11);
  OneForm3 W = random_smooth_form(12);
  Metric3 g3 = random_near_flat_metric(13, 0.1);

  auto vac = static_reduction_construct(V, zero_covector<3>(), g3, 0.7);
  auto ve = static_reduction_extract(vac.metric, vac.F, 0.7, pts);
  CHECK(max_diff(ve.W, zero_covector<3>(), pts) == 0.0);

  auto sc = static_reduction_construct(V, W, g3, 2.0);
  auto ex = static_reduction_extract(sc.metric, sc.F, 2.0, pts);
  CHECK(max_diff(ex.W, W, pts) <= 1e-12);
  for (const auto& x : pts) {
    CHECK(std::abs(ex.V(Vec3<double>(x)) - V(Vec3<double>(x))) <= 1e-12);
    CHECK((ex.g3.g(Vec3<double>(x)) - g3.g(Vec3<double>(x))).cwiseAbs().maxCoeff() <= 1e-12);
  }
  CHECK(ex.a3 == -2.0);

  auto mm = static_reduction_construct_mismatched(V, W, g3, 2.0);
  CHECK_THROWS_AS(static_reduction_extract(mm.metric, mm.F, 2.0, pts), AnsatzInconsistency);
  CHECK_THROWS_AS(static_reduction_extract(sc.metric, sc.F, 2.3, pts), AnsatzInconsistency);

  // Static Maxwell data: Maxwell equations hold iff (w4) holds; ABC with a3 = −1.
  auto abc = static_reduction_construct(constant_scalar<3>(1.0), make_abc_field(), flat_metric3(), 1.0);
  ExactSolution pseudo;
  pseudo.metric = abc.metric;
  pseudo.F = abc.F;
  auto p4 = slice_points(pts, 0.4);
  auto mx = maxwell_residual(pseudo, p4);
  CHECK(mx.closure.max <= 1e-12);
  CHECK(mx.coclosure.max <= 1e-12);
  VectorField<4> dt = constant_covector<4>(Eigen::Vector4d(1, 0, 0, 0));
  auto nn = static_nonnull_check(abc.metric, abc.F, dt, p4);
  CHECK(nn.proportionality.max <= 1e-12);
  // With T = FF − ¼gF² and g(K,K) = −V², f is minus the energy density.
  CHECK(nn.f_max <= 0.0);
  // L_K F = −aF* with a = a4.
  auto inh = inheritance_defect(abc.metric, abc.F, dt, [](const Eigen::Vector4d&) { return 1.0; }, p4);
  CHECK(inh.first.max <= 1e-12);
}

TEST_CASE("stationary reduction") {
  auto pts = random_box_points(6, 40, 2.0);
  Metric3 g3 = random_near_flat_metric(13, 0.1);
  TwistedProblem tp{g3, random_positive_lapse(11), random_smooth_form(21, 0.3), -0.7,
                    {random_smooth_form(22), random_smooth_form(23)}};
  auto c = stationary_reduction_construct(tp);
  auto e = stationary_reduction_extract(c.metric, c.F, 0.7, pts);
  CHECK(e.problem.a == doctest::Approx(-0.7));
  CHECK(max_diff(e.problem.theta, tp.theta, pts) <= 1e-12);
  CHECK(max_diff(e.problem.zeta.re, tp.zeta.re, pts) <= 1e-12);
  CHECK(max_diff(e.problem.zeta.im, tp.zeta.im, pts) <= 1e-12);
  CHECK_THROWS_AS(stationary_reduction_extract(c.metric, c.F, 0.9, pts), AnsatzInconsistency);

  // θ = 0: the stationary path sees the static data as ζ = iVW.
  ScalarField3 V = random_positive_lapse(11);
  OneForm3 W = random_smooth_form(12);
  auto sc = static_reduction_construct(V, W, g3, 0.7);
  auto se = stationary_reduction_extract(sc.metric, sc.F, 0.7, pts);
  auto st = static_reduction_extract(sc.metric, sc.F, 0.7, pts);
  CHECK(max_diff(se.problem.theta, zero_covector<3>(), pts) <= 1e-12);
  CHECK(max_diff(se.problem.zeta.re, zero_covector<3>(), pts) <= 1e-10);
  CHECK(max_diff(se.problem.zeta.im, scale<3>(st.V, st.W), pts) <= 1e-10);
  CHECK(se.problem.a == doctest::Approx(st.a3));
}

TEST_CASE("twisted exemplar") {
  auto pts = random_box_points(7, 40, 2.0);
  ScalarField3 chi([](const auto& x) { return sin(x[0]) * 0.3 + x[1] * x[2] * 0.1; });
  auto tw = twisted_abc_exemplar(chi);
  ExactSolution pseudo;
  pseudo.metric = tw.metric;
  pseudo.F = tw.F;
  auto mx = maxwell_residual(pseudo, slice_points(pts, 0.4));
  CHECK(mx.closure.max <= 1e-12);
  CHECK(mx.coclosure.max <= 1e-12);
  auto te = stationary_reduction_extract(tw.metric, tw.F, tw.a4, pts);
  double worst = 0.0;
  for (double v : twisted_residual(te.problem, pts)) worst = std::max(worst, v);
  CHECK(worst <= 1e-9);
  auto so = stationary_second_order_residual(te.problem, pts);
  CHECK(so.divergence.max <= 1e-9);
  CHECK(so.second_order.max <= 1e-8);
}
