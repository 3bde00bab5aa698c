#include <cmath>

#include "doctest.h"
#include "inheritlab/carleman.hpp"

using namespace inheritlab;

namespace {

// Numpy realization of the same model (tests/oracles/carleman_model.py), r ∈ [2, 40].
constexpr double kMourreK[2] = {18.7070200362365, 18.8793358470939};
constexpr double kMourreKt[2] = {19.2466325653043, 19.4154220064983};
constexpr double kFh3[3][2] = {{0.217950878658293, 0.216006075906504},
                               {0.281930077487423, 0.282010928343367},
                               {0.293154510084949, 0.291166673023097}};
constexpr double kPoly[4] = {18.5960397985069, 18.111943163309, 14.6635379799942, 5.02799188139302};

const double kXmin = 1.0 / 40.0;

}  // namespace

TEST_CASE("grid construction") {
  RadialGrid g = make_grid(64, kXmin);
  CHECK(g.size() == 64);
  CHECK(g.r_edges.size() == 66);
  CHECK(g.r_edges[0] == doctest::Approx(2.0));
  CHECK(g.r_edges[65] == doctest::Approx(40.0));
  CHECK(g.measure.sum() == doctest::Approx(38.0 - (g.r_edges[1] - g.r_edges[0])).epsilon(1e-12));
  for (int i = 0; i < g.size(); ++i) CHECK(g.x[i] == doctest::Approx(1.0 / g.r[i]));
  CHECK_THROWS_AS(make_grid(2, kXmin), InvalidInput);
  CHECK_THROWS_AS(make_grid(64, 0.6), InvalidInput);
  CHECK_THROWS_AS(make_grid(64, 0.1, 0.7), InvalidInput);
  CHECK_THROWS_AS(build_H(make_grid(8, kXmin), flat_model()), InvalidInput);
}

TEST_CASE("H on a power profile") {
  RadialGrid g = make_grid(512, kXmin);
  OperatorMatrix H = build_H(g, flat_model());
  CHECK(H.self_adjoint);
  CHECK(adjoint_defect(H.m, g) <= 1e-13);
  Eigen::VectorXcd psi(g.size());
  for (int i = 0; i < g.size(); ++i) psi[i] = std::pow(g.r[i], -2.0);
  Eigen::VectorXcd out = H.m * psi;
  double worst = 0.0;
  for (int i = 1; i + 1 < g.size(); ++i) {
    double want = -6.0 * std::pow(g.r[i], -4.0);
    worst = std::max(worst, std::abs(out[i] - want) / std::abs(want));
  }
  // Second-order stencil on h = 38/513.
  CHECK(worst <= 1e-2);

  OperatorMatrix Hz = build_H(g, perturbed_model(1.0, 0.0));
  CHECK((Hz.m - H.m).norm() == 0.0);
  CHECK(adjoint_defect(radial_vector_field(g).m, g) <= 1e-13);
  CHECK(adjoint_defect(build_B(g).m, g) <= 1e-13);
  CHECK(adjoint_defect(build_A(g).m, g) <= 1e-13);
}

TEST_CASE("weight family") {
  RadialGrid g = make_grid(256, kXmin);
  for (double a : {0.0, 1.0, 4.0})
    for (double b : {1.0, 4.0, 16.0})
      for (double gm : {0.0, 0.5, 1.0}) CHECK(weight_bound_audit(WeightFamily{a, b, gm, std::nullopt}, g).max_violation == 0.0);
  CHECK(weight_monotonicity_defect(1.0, 1.0, {1.0, 4.0, 16.0}, g) <= 0.0);
  CHECK_THROWS_AS(validate(WeightFamily{1.0, 0.5, 1.0, std::nullopt}), InvalidInput);
  CHECK_THROWS_AS(validate(WeightFamily{1.0, 1.0, 1.5, std::nullopt}), InvalidInput);
  CHECK_THROWS(WeightFamily{}.h());
  CHECK(WeightFamily{4.0, 1.0, 0.0, std::nullopt}.h() == doctest::Approx(0.25));

  WeightFamily w{2.0, 3.0, 0.5, std::nullopt};
  const double x = 0.2, e = 1e-6;
  CHECK(w.x2dF(x) == doctest::Approx(x * x * (w.F(x + e) - w.F(x - e)) / (2 * e)).epsilon(1e-8));
}

TEST_CASE("conjugation without weight") {
  RadialGrid g = make_grid(512, kXmin);
  OperatorMatrix H = build_H(g, flat_model());
  Conjugated c = conjugate(H, g, WeightFamily{0.0, 1.0, 0.0, std::nullopt}, 1.0);
  CHECK(c.im_relative <= 1e-10);
  CHECK(c.structural_re <= 1e-10);
}

TEST_CASE("squared norm identity") {
  RadialGrid g = make_grid(512, kXmin);
  OperatorMatrix H = build_H(g, flat_model());
  // The default test space is too rich for coarse grids.
  const TestSpace coarse{2.0};
  Conjugated c = conjugate(H, g, WeightFamily{1.0, 1.0, 1.0, std::nullopt}, 1.0, 1.0, coarse);
  CHECK(c.im_relative > 1e-3);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    auto r = squared_norm_identity(c, g, random_grid_vector(g.size(), s));
    worst = std::max(worst, r.relative_defect);
    CHECK(std::abs(r.commutator_imag) <= 1e-9 * r.p2);
  }
  CHECK(worst <= 1e-12);

  // Near-null vector of P: the identity returns σ².
  Eigen::VectorXcd psi;
  double sigma = least_singular_vector(c.P.m, g, psi);
  CHECK(measure_norm(psi, g) == doctest::Approx(1.0).epsilon(1e-10));
  auto r = squared_norm_identity(c, g, psi);
  CHECK(r.sum == doctest::Approx(sigma * sigma).epsilon(1e-6));

  // Eigenvector of H with no weight: ‖(H − λ)ψ‖² = (μ − λ)².
  RadialGrid gs = make_grid(64, kXmin);
  OperatorMatrix Hs = build_H(gs, flat_model());
  Conjugated c0 = conjugate(Hs, gs, WeightFamily{0.0, 1.0, 0.0, std::nullopt}, 0.3, 1.0, TestSpace{0.5});
  Eigen::VectorXcd v;
  double s0 = least_singular_vector(c0.P.m, gs, v);
  Eigen::VectorXcd Hv = Hs.m * v;
  std::complex<double> mu = 0.0;
  for (int i = 0; i < gs.size(); ++i) mu += gs.measure[i] * std::conj(v[i]) * Hv[i];
  auto q = squared_norm_identity(c0, gs, v);
  CHECK(q.sum == doctest::Approx((mu.real() - 0.3) * (mu.real() - 0.3)).epsilon(1e-8));
  CHECK(q.sum == doctest::Approx(s0 * s0).epsilon(1e-8));
}

TEST_CASE("Mourre decomposition against numpy") {
  int k = 0;
  for (int n : {1024, 2048}) {
    MourreReport m = mourre_decomposition_check(make_grid(n, kXmin), flat_model(), 1.0);
    CHECK(m.K.total == doctest::Approx(kMourreK[k]).epsilon(1e-6));
    CHECK(m.K_tilde.total == doctest::Approx(kMourreKt[k]).epsilon(1e-6));
    CHECK(m.K.boundary <= m.K.total);
    ++k;
  }
  MourreReport z = mourre_decomposition_check(make_grid(1024, kXmin), flat_model(), 0.0);
  CHECK(z.K.total == doctest::Approx(19.070106216095).epsilon(1e-6));

  // Dropping the −2BxB term leaves an O(x^0) piece that the x^{1+δ} weight amplifies.
  MourreOptions bad;
  bad.omit_BxB = true;
  CHECK(mourre_decomposition_check(make_grid(1024, kXmin), flat_model(), 1.0, bad).K.total > 2.0 * kMourreK[0]);
}

TEST_CASE("commutator remainder across beta") {
  const double betas[3] = {1.0, 4.0, 16.0};
  for (int b = 0; b < 3; ++b) {
    int k = 0;
    for (int n : {1024, 2048}) {
      RadialGrid g = make_grid(n, kXmin);
      OperatorMatrix H = build_H(g, flat_model());
      Conjugated c = conjugate(H, g, WeightFamily{1.0, betas[b], 1.0, std::nullopt}, 1.0);
      CHECK(commutator_audit(c, H, g).remainder.total == doctest::Approx(kFh3[b][k]).epsilon(1e-6));
      ++k;
    }
  }
}

TEST_CASE("polynomial weight") {
  RadialGrid g = make_grid(1024, kXmin);
  auto rep = poly_weight_check(g, flat_model(), 2.0, 1.0, {0.0, 0.01, 0.1, 1.0}, 1.0);
  REQUIRE(rep.points.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CHECK(rep.points[i].positive);
    CHECK(rep.points[i].factor_min >= 1.0);
    CHECK(rep.points[i].remainder.total == doctest::Approx(kPoly[i]).epsilon(1e-6));
  }
  CHECK(rep.points[0].factor_min == doctest::Approx(2.0));
  CHECK(rep.points[0].factor_max == doctest::Approx(2.0));
  CHECK(rep.remainder_max == doctest::Approx(kPoly[0]).epsilon(1e-6));
  CHECK_THROWS_AS(poly_weight_check(g, flat_model(), 1.5, 1.0, {0.0}, 1.0), InvalidInput);
}

TEST_CASE("refinement study") {
  auto st = refinement_study([](const RadialGrid& g) { return mourre_decomposition_check(g, flat_model(), 1.0).K.total; },
                             {1024, 2048}, kXmin);
  CHECK(st.values.size() == 2);
  CHECK(st.values[0] == doctest::Approx(kMourreK[0]).epsilon(1e-6));
  CHECK(st.max_change == doctest::Approx(kMourreK[1] / kMourreK[0] - 1.0).epsilon(1e-4));
  CHECK(st.stable);
}

TEST_CASE("embedded eigenvalue probe") {
  // mpmath shooting: first coupling with a decaying solution, r1 = 2, λ = −1.
  CHECK(bound_state_coupling() == doctest::Approx(5.4904176406860047).epsilon(1e-8));

  ProbeConfig pc;
  ProbeReport pr = no_embedded_eigenvalue_probe(pc);
  const double want[4] = {4.04081278525052, 3.73661986255965, 3.58712314737495, 3.51295338743658};
  REQUIRE(pr.sigma.size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(pr.sigma[i] == doctest::Approx(want[i]).epsilon(1e-6));
  CHECK(pr.verdict == ProbeVerdict::NonDecaying);
  CHECK(pr.min_ratio == doctest::Approx(0.9247).epsilon(1e-3));
  CHECK(pr.dense_agreement <= 1e-6);

  ProbeConfig bs;
  bs.lambda = -1.0;
  bs.model = perturbed_model(1.0, -bound_state_coupling(), 0);
  bs.fixed_r_max = 40.0;
  bs.dense_oracles = 0;
  ProbeReport br = no_embedded_eigenvalue_probe(bs);
  CHECK(br.verdict == ProbeVerdict::Decaying);
  CHECK(br.sigma.back() < 2e-4);

  ProbeConfig few;
  few.sizes = {256, 512};
  CHECK_THROWS_AS(no_embedded_eigenvalue_probe(few), InvalidInput);
}
