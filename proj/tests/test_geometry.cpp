#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "inheritlab/geometry.hpp"

using namespace inheritlab;

namespace {

// Sympy values at (6/5, -7/10, 3/2), upper triangle (00, 01, 02, 11, 12, 22).
constexpr double kSchwarzschildRicci[6] = {-0.0025302128313644786, 0.045543830964560615, -0.097593923495487032,
                                           0.048977691235698122,  0.056929788705700769, -0.046447478404333643};
constexpr double kPowerRicci[6] = {0.020872053374094128, 0.010839144693782118, -0.023226738629533111,
                                   0.033130609873014381, 0.013548930867227648, 0.010420020990804228};

void check_ricci(const Curvature<double, 3>& c, const double (&want)[6], double tol) {
  int k = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      CHECK(c.ricci(i, j) == doctest::Approx(want[k]).epsilon(tol));
      CHECK(c.ricci(i, j) == doctest::Approx(c.ricci(j, i)).epsilon(1e-14));
      ++k;
    }
}

}  // namespace

TEST_CASE("flat metric has no curvature") {
  Metric3 flat = flat_metric3();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int n = 0; n < 50; ++n) {
    Eigen::Vector3d p(u(rng), u(rng), u(rng));
    auto c = evaluate_metric(flat, p);
    for (int k = 0; k < 3; ++k) CHECK(c.conn.gamma[k].cwiseAbs().maxCoeff() == 0.0);
    CHECK(c.ricci.cwiseAbs().maxCoeff() == 0.0);
    CHECK(c.scalar == 0.0);
  }
}

TEST_CASE("conformal metrics match symbolic Ricci") {
  Eigen::Vector3d p(1.2, -0.7, 1.5);
  auto s = evaluate_metric(schwarzschild_conformal_metric(1.0), p);
  check_ricci(s, kSchwarzschildRicci, 1e-11);
  CHECK(std::abs(s.scalar) < 1e-13);
  CHECK(std::abs(evaluate_metric(schwarzschild_conformal_metric(1.0), Eigen::Vector3d(2, 0, 0)).scalar) < 1e-13);

  auto w = evaluate_metric(power_conformal_metric(), p);
  check_ricci(w, kPowerRicci, 1e-11);
  CHECK(w.scalar == doctest::Approx(0.037909783934484338).epsilon(1e-12));
  CHECK(evaluate_metric(power_conformal_metric(), Eigen::Vector3d(2, 0, 0)).scalar ==
        doctest::Approx(0.039752435582567018).epsilon(1e-12));
}

TEST_CASE("scattering metric components") {
  Metric3 m = scattering_metric();
  Eigen::Vector3d p(0.1, 1.0, 0.5);
  Eigen::Matrix3d g = m.g(Vec3<double>(p));
  CHECK(g(0, 0) == doctest::Approx(1e4).epsilon(1e-14));
  CHECK(g(1, 1) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(g(2, 2) == doctest::Approx(100.0 * std::sin(1.0) * std::sin(1.0)).epsilon(1e-14));
  CHECK(std::abs(g(0, 1)) + std::abs(g(0, 2)) + std::abs(g(1, 2)) == 0.0);
  // x^{-4}dx² + x^{-2}h is flat space in r = 1/x.
  auto c = evaluate_metric(m, p);
  CHECK(c.ricci.cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("evaluate_metric rejects bad input") {
  Metric3 singular;
  singular.name = "zero";
  singular.g = MatrixField<3>([](const auto& p) {
    using S = typename std::decay_t<decltype(p)>::Scalar;
    return Mat3<S>::Constant(S(0.0)).eval();
  });
  CHECK_THROWS_AS(evaluate_metric(singular, Eigen::Vector3d(1, 2, 3)), SingularMetric);
  CHECK_THROWS_AS(evaluate_metric(log_conformal_metric(), Eigen::Vector3d(0.1, 0.1, 0.1)), OutsideChart);
  CHECK_THROWS_AS(make_metric3("nosuch"), InvalidInput);
}

TEST_CASE("dual derivatives agree with central differences") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Metric3> metrics{schwarzschild_conformal_metric(1.0), power_conformal_metric(),
                               random_near_flat_metric(3, 0.2), random_near_flat_metric(4, 0.1)};
  double worst = 0.0;
  const double h = 1e-5;
  for (int n = 0; n < 1000; ++n) {
    const Metric3& m = metrics[n % metrics.size()];
    Eigen::Vector3d p(u(rng), u(rng), u(rng));
    p = p.normalized() * (2.0 + 3.0 * std::abs(u(rng)));
    auto c = connection<double, 3>(m, p);
    for (int k = 0; k < 3; ++k) {
      Eigen::Vector3d e = Eigen::Vector3d::Unit(k) * h;
      Eigen::Matrix3d fd = (m.g(Vec3<double>(p + e)) - m.g(Vec3<double>(p - e))) / (2 * h);
      double scale = std::max(fd.cwiseAbs().maxCoeff(), 1e-3);
      worst = std::max(worst, (fd - c.dg[k]).cwiseAbs().maxCoeff() / scale);
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("asymptotic flatness audits") {
  std::vector<double> radii{10, 20, 50, 100, 200};
  Metric3 flat = flat_metric3();
  flat.asymptotics = AsymptoticParams{1.0, 1.0};
  auto a = audit_asymptotic_flatness(flat, radii, 20);
  CHECK(a.max_weighted_deviation == 0.0);
  CHECK(a.pass);

  auto p = audit_asymptotic_flatness(power_conformal_metric(), radii, 20);
  CHECK(p.pass);
  CHECK(std::isfinite(p.max_weighted_deviation));
  CHECK(p.max_weighted_deviation > 0.0);

  auto l = audit_asymptotic_flatness(log_conformal_metric(), {10, 100, 1e3, 1e4, 1e5, 1e6}, 10);
  CHECK_FALSE(l.pass);

  CHECK_THROWS_AS(audit_asymptotic_flatness(power_conformal_metric(), {}, 10), InvalidInput);
}

TEST_CASE("flat distance to a sphere") {
  DistanceField d(flat_metric3(), 10.0);
  Eigen::Vector3d x = Eigen::Vector3d(2.0, -1.0, 3.0).normalized() * 25.0;
  auto s = d(x);
  CHECK(s.d == doctest::Approx(15.0).epsilon(1e-12));
  CHECK(std::abs(s.d - 15.0) <= 1e-10);
  CHECK(s.eikonal_residual <= 1e-8);
  Eigen::Vector3d n = x.normalized();
  Eigen::Matrix3d want = (Eigen::Matrix3d::Identity() - n * n.transpose()) / 25.0;
  CHECK((s.hessian - want).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((s.hessian * n).norm() < 1e-9);

  CHECK(d.distance(Eigen::Vector3d(0, 0, 10.0)).d == doctest::Approx(0.0));
  CHECK_THROWS(d(Eigen::Vector3d(0, 0, 10.0)));

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int n2 = 0; n2 < 30; ++n2) {
    Eigen::Vector3d y(u(rng), u(rng), u(rng));
    y = y.normalized() * (11.0 + 60.0 * std::abs(u(rng)));
    CHECK(std::abs(d.distance(y).d - (y.norm() - 10.0)) <= 1e-10);
  }
}

TEST_CASE("conformal distance matches quadrature of the radial length") {
  DistanceField d(schwarzschild_conformal_metric(1.0), 20.0);
  auto s = d(Eigen::Vector3d(0.0, 36.0, 48.0));
  CHECK(s.d == doctest::Approx(41.10694562200144).epsilon(1e-8));
  CHECK(s.eikonal_residual <= 1e-8);
  CHECK(s.annihilation_residual <= 1e-6);

  FastMarchingDistance fm(schwarzschild_conformal_metric(1.0), 20.0, 70.0, 96);
  CHECK(fm(Eigen::Vector3d(0.0, 36.0, 48.0)) == doctest::Approx(s.d).epsilon(0.05));
}

TEST_CASE("Hessian bands") {
  std::vector<Eigen::Vector3d> pts;
  for (double r : {25.0, 30.0, 40.0, 60.0, 80.0, 120.0, 160.0, 200.0}) {
    for (const auto& n : fibonacci_directions(3)) pts.push_back(n * r);
  }
  auto flat = check_hessian_bands(flat_metric3(), 20.0, pts, 0.5, 1e-6);
  CHECK(flat.pass);
  CHECK(flat.c1 < 1e-8);

  auto conf = check_hessian_bands(schwarzschild_conformal_metric(1.0), 20.0, pts, 0.5);
  CHECK(conf.pass);
  CHECK(conf.c1 == doctest::Approx(0.34248047077315874).epsilon(1e-5));
  CHECK_FALSE(check_hessian_bands(schwarzschild_conformal_metric(1.0), 20.0, pts, 0.5, 0.1).pass);

  CHECK_THROWS_AS(check_hessian_bands(flat_metric3(), 20.0, {Eigen::Vector3d(0, 0, 20.0)}, 0.5), InvalidInput);
  CHECK_THROWS_AS(check_hessian_bands(flat_metric3(), 20.0, pts, 1.0), InvalidInput);
}

TEST_CASE("weighted Poincare examples") {
  SampledProfile zero{[](double) { return 0.0; }, [](double) { return 0.0; }};
  auto z = weighted_poincare_check(1.0, 1.0, 1.0, zero);
  CHECK(z.lhs == 0.0);
  CHECK(z.rhs == 0.0);
  CHECK(z.pass);

  SampledProfile lin{[](double t) { return 1.0 - t; }, [](double) { return -1.0; }};
  auto l = weighted_poincare_check(1.0, 1.0, 1.0, lin);
  CHECK(l.lhs == doctest::Approx(0.19314718055994531).epsilon(1e-13));
  CHECK(l.rhs == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(l.pass);
  CHECK(l.corrected_rhs == doctest::Approx(2.0).epsilon(1e-13));

  // ℓ = 5: lhs = ∫(5−t)²/(1+t)³ = 7.5 + ln 6 exceeds the stated bound 5.
  SampledProfile lin5{[](double t) { return 5.0 - t; }, [](double) { return -1.0; }};
  auto l5 = weighted_poincare_check(1.0, 1.0, 5.0, lin5);
  CHECK(l5.lhs == doctest::Approx(7.5 + std::log(6.0)).epsilon(1e-13));
  CHECK(l5.rhs == doctest::Approx(5.0).epsilon(1e-13));
  CHECK_FALSE(l5.pass);
  CHECK(l5.corrected_rhs == doctest::Approx(30.0).epsilon(1e-13));
  CHECK(l5.corrected_pass);

  SampledProfile bad{[](double t) { return 2.0 - t; }, [](double) { return -1.0; }};
  CHECK_THROWS_AS(weighted_poincare_check(1.0, 1.0, 1.0, bad), InvalidInput);

  std::mt19937_64 rng(5);
  for (int n = 0; n < 100; ++n) {
    auto phi = random_admissible_profile(rng, 5.0);
    auto res = weighted_poincare_check(10.0, 0.7, 5.0, phi);
    CHECK(res.pass);
    CHECK(res.corrected_pass);
  }
}

TEST_CASE("Gauss-Legendre quadrature") {
  auto q = composite_gauss_legendre(0.0, 2.0, 4, 8);
  double s = 0.0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * std::exp(q.nodes[i]);
  CHECK(s == doctest::Approx(std::exp(2.0) - 1.0).epsilon(1e-14));
  CHECK_THROWS_AS(gauss_legendre(0), InvalidInput);
}
