#include <cmath>
#include <numbers>

#include "doctest.h"
#include "inheritlab/beltrami.hpp"
#include "inheritlab/frequency.hpp"

using namespace inheritlab;

namespace {

constexpr double kPi = std::numbers::pi;

FrequencyConfig config(std::vector<double> schedule, double k = 2.0) {
  FrequencyConfig c;
  c.schedule = std::move(schedule);
  c.k = k;
  return c;
}

SynthSpec power_law(double c, double q) {
  SynthSpec s;
  s.X = [c, q](double r) { return c * std::pow(r, -q); };
  s.dX = [c, q](double r) { return -q * c * std::pow(r, -q - 1.0); };
  return s;
}

OneForm3 dx_form() { return constant_covector<3>(Eigen::Vector3d(1, 0, 0)); }

}  // namespace

TEST_CASE("schedules and configuration") {
  auto s = geometric_schedule(10, 200, 1.05);
  CHECK(s.front() == 10.0);
  CHECK(s.back() >= 200.0);
  CHECK(s[s.size() - 2] < 200.0);
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i] / s[i - 1] == doctest::Approx(1.05).epsilon(1e-14));
  CHECK_THROWS_AS(geometric_schedule(10, 5, 1.05), InvalidInput);
  CHECK_THROWS_AS(validate(config({1, 3, 2})), InvalidInput);
  CHECK_THROWS_AS(validate(config({0, 1, 2})), InvalidInput);

  auto d = default_frequency_config(power_conformal_metric(), {10, 20});
  CHECK(d.delta == 0.5);
  CHECK(d.k == 20.0);
}

TEST_CASE("X on spheres") {
  Metric3 flat = flat_metric3();
  FrequencyConfig c = config({3});
  CHECK(compute_X(zero_covector<3>(), flat, c, 3.0) == 0.0);
  CHECK(compute_X(dx_form(), flat, c, 3.0) == doctest::Approx(4.0 * kPi).epsilon(1e-13));

  // Dense numpy quadrature of the l = 1, a = 1 field.
  OneForm3 ck = make_ck_field(1.0, 1, 0);
  CHECK(compute_X(ck, flat, c, 2.0) == doctest::Approx(2.852583334422343).epsilon(1e-10));
  CHECK(compute_X(ck, flat, c, 20.0) == doctest::Approx(0.020920944508440974).epsilon(1e-8));
  CHECK(compute_X(ck, flat, c, 50.0) == doctest::Approx(0.0033547251383867875).epsilon(1e-8));
  CHECK(compute_X(ck, flat, c, 100.0) == doctest::Approx(0.0008379256471195003).epsilon(1e-8));
  // Bessel asymptotics: r²X → 8π/3.
  CHECK(compute_X(ck, flat, c, 200.0) * 200.0 * 200.0 == doctest::Approx(8.0 * kPi / 3.0).epsilon(1e-4));
}

TEST_CASE("geodesic level sets reduce to shifted spheres in flat space") {
  Metric3 flat = flat_metric3();
  FrequencyConfig geo = config({30});
  geo.level_sets = LevelSets::Geodesic;
  geo.distance_R = 10.0;
  geo.n_theta = 16;
  geo.n_phi = 32;
  FrequencyConfig co = geo;
  co.level_sets = LevelSets::Coordinate;
  OneForm3 ck = make_ck_field(1.0, 1, 0);
  auto g = sphere_values(ck, flat, geo, 30.0);
  auto k = sphere_values(ck, flat, co, 40.0);
  CHECK(g.X * 30.0 * 30.0 == doctest::Approx(k.X * 40.0 * 40.0).epsilon(1e-10));
  CHECK(g.beta_pairing / 30.0 == doctest::Approx(k.beta_pairing / 40.0).epsilon(1e-9));
}

TEST_CASE("surface form of E") {
  Metric3 flat = flat_metric3();
  FrequencyConfig c = config({5});
  CHECK(compute_E_surface(zero_covector<3>(), flat, c, 5.0) == 0.0);

  // ω = r^{-2} dx: g(β, ω) = r f f' = −2r^{-4}, so E(r) = 8π r^{-5}.
  OneForm3 w = scale<3>(ScalarField3([](const auto& p) {
                          auto r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
                          return 1.0 / r2;
                        }),
                        dx_form());
  CHECK(compute_E_surface(w, flat, c, 5.0) == doctest::Approx(8.0 * kPi / 3125.0).epsilon(1e-12));

  // Divergence theorem on the shell 5 < |x| < 9 for the CK field (a = 1, Ric = 0).
  FrequencyConfig q = config({5});
  q.n_theta = 32;
  q.n_phi = 64;
  OneForm3 ck = make_ck_field(1.0, 1, 0);
  double surf = compute_E_surface(ck, flat, q, 5.0);
  CHECK(surf == doctest::Approx(0.045564812874).epsilon(1e-9));
  CHECK(compute_E_volume(ck, 1.0, flat, q, 5.0, 9.0, 64) == doctest::Approx(surf).epsilon(1e-8));
}

TEST_CASE("frequency function") {
  Metric3 flat = flat_metric3();
  FrequencyConfig c = config({5});
  CHECK_THROWS_AS(compute_F(zero_covector<3>(), flat, c, 5.0), FrequencyUndefined);

  // X = r^{-2p}, E = −X'/2 gives F = p e^{2k/r^δ} → p.
  FrequencyConfig big = config(geometric_schedule(1e3, 1e6, 2.0), 1.0);
  auto prof = synth_profile(power_law(1.0, 2.0 * 1.7), big);
  CHECK(prof.F.back() == doctest::Approx(1.7).epsilon(1e-5));
  for (std::size_t i = 0; i + 1 < prof.F.size(); ++i) CHECK(prof.F[i + 1] <= prof.F[i]);

  // CK: windowed average of F over [50, 200].
  OneForm3 ck = make_ck_field(1.0, 1, 0);
  FrequencyConfig ckc = default_frequency_config(flat, geometric_schedule(50, 200, 1.05));
  auto ckp = compute_profile(ck, flat, ckc);
  double avg = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < ckp.r.size(); ++i)
    if (ckp.r[i] <= 200.0) {
      avg += ckp.F[i];
      ++n;
    }
  CHECK(avg / n == doctest::Approx(1.0).epsilon(0.1));

  // Scaling covariance.
  OneForm3 ck3 = scale<3>(3.0, ck);
  for (double r : {20.0, 70.0}) {
    auto a = sphere_values(ck, flat, ckc, r);
    auto b = sphere_values(ck3, flat, ckc, r);
    CHECK(b.X == doctest::Approx(9.0 * a.X).epsilon(1e-13));
    CHECK(b.E == doctest::Approx(9.0 * a.E).epsilon(1e-13));
    CHECK(compute_F(ck3, flat, ckc, r) == doctest::Approx(compute_F(ck, flat, ckc, r)).epsilon(1e-12));
  }
}

TEST_CASE("synthetic profiles guard zeros of X") {
  SynthSpec s;
  s.X = [](double r) { return r > 4.5 && r < 5.5 ? 0.0 : 1.0 / (r * r); };
  s.dX = [](double r) { return -2.0 / (r * r * r); };
  auto prof = synth_profile(s, config({1, 2, 3, 4, 5, 6, 7, 8}));
  CHECK_FALSE(prof.defined[4]);
  CHECK(std::isnan(prof.F[4]));
  CHECK_THROWS_AS(frequency_at(prof, 4), FrequencyUndefined);
  CHECK(frequency_at(prof, 2) == doctest::Approx(prof.F[2]));
  CHECK_THROWS_AS(check_derivative_identity(prof, config({1, 2, 3, 4, 5, 6, 7, 8})), FrequencyUndefined);
  CHECK_THROWS_AS(monotonicity_scan(prof, config({1, 2, 3, 4, 5, 6, 7, 8})), FrequencyUndefined);
  CHECK_THROWS_AS(synth_profile(SynthSpec{}, config({1, 2})), InvalidInput);
}

TEST_CASE("derivative identity") {
  FrequencyConfig c = config(geometric_schedule(10, 200, 1.05));
  auto exact = check_derivative_identity(synth_profile(power_law(1.0, 3.0), c), c);
  CHECK(exact.c2 < 1e-10);

  // X = r^{-3} sampled only, E = (3/2)X/r: the 4-point stencil leaves a small residual.
  SynthSpec sampled;
  sampled.X = [](double r) { return std::pow(r, -3.0); };
  sampled.E = [](double r) { return 1.5 * std::pow(r, -4.0); };
  auto num = check_derivative_identity(synth_profile(sampled, c), c);
  FrequencyConfig fine = config(geometric_schedule(10, 200, 1.025));
  auto num2 = check_derivative_identity(synth_profile(sampled, fine), fine);
  CHECK(num.c2 < 0.1);
  CHECK(num.c2 / num2.c2 > 12.0);

  OneForm3 ck = make_ck_field(1.0, 1, 0);
  Metric3 flat = flat_metric3();
  auto rep = check_derivative_identity(ck, flat, default_frequency_config(flat, geometric_schedule(10, 200, 1.05)));
  CHECK(std::isfinite(rep.c2));
  CHECK(rep.c2 == doctest::Approx(5.202696822119283).epsilon(1e-6));

  FrequencyConfig z = config(geometric_schedule(10, 20, 1.1));
  CHECK_THROWS_AS(check_derivative_identity(zero_covector<3>(), flat, z), FrequencyUndefined);
}

TEST_CASE("decay exponent fits") {
  FrequencyConfig c = config(geometric_schedule(10, 400, 1.05));
  auto f1 = fit_decay_exponent(synth_profile(power_law(7.0, 4.0), c), 20, 300);
  CHECK(f1.p == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(f1.residual < 1e-10);

  SynthSpec wobble;
  wobble.X = [](double r) { return std::pow(r, -3.0) * (1.0 + 0.1 * std::sin(r)); };
  wobble.E = [](double r) { return 1.5 * std::pow(r, -4.0); };
  auto f2 = fit_decay_exponent(synth_profile(wobble, c), 20, 400);
  CHECK(f2.p == doctest::Approx(1.5).epsilon(0.05 / 1.5));

  auto prof = synth_profile(power_law(1.0, 2.0), c);
  CHECK_THROWS_AS(fit_decay_exponent(prof, 1, 5), InvalidInput);
  CHECK_THROWS_AS(fit_decay_exponent(prof, 100, 104), InvalidInput);
}

TEST_CASE("L2 classification of synthetic profiles") {
  FrequencyConfig c = config(geometric_schedule(10, 200, 1.05));
  CHECK(classify_L2(synth_profile(power_law(1.0, 4.0), c), c).verdict == L2Class::InL2Consistent);
  CHECK(classify_L2(synth_profile(power_law(1.0, 3.0), c), c).verdict == L2Class::Inconclusive);
  CHECK(classify_L2(synth_profile(power_law(1.0, 2.0), c), c).verdict == L2Class::NotInL2);
  CHECK(classify_L2(synth_profile(power_law(1.0, 2.4), c), c).verdict == L2Class::NotInL2);
  CHECK(classify_L2(synth_profile(power_law(1.0, 3.6), c), c).verdict == L2Class::InL2Consistent);
  CHECK(to_string(L2Class::NotInL2) == "not_in_L2");
}

TEST_CASE("CK frequency pipeline on [50, 200]") {
  Metric3 flat = flat_metric3();
  FrequencyConfig c = default_frequency_config(flat, geometric_schedule(10, 200, 1.05));
  auto prof = compute_profile(make_ck_field(1.0, 1, 0), flat, c);
  auto cls = classify_L2(prof, c, {50, 200});
  CHECK(cls.fit.p == doctest::Approx(1.0).epsilon(0.05));
  CHECK(cls.fit.p < 1.5);
  CHECK(cls.linear_r2 >= 0.99);
  CHECK(cls.verdict == L2Class::NotInL2);

  auto mono = monotonicity_scan(prof, c);
  CHECK(mono.F.size() == prof.r.size());
  CHECK(mono.dF.size() + 1 == prof.r.size());
  CHECK(mono.k_used > mono.c2);

  std::string csv = profile_csv(prof);
  CHECK(csv.rfind("r,X,E,F,dX_dr,identity_ratio\n", 0) == 0);
  CHECK(profile_svg(prof, &cls.fit).find("<svg") != std::string::npos);
}

TEST_CASE("monotonicity on an L2-consistent profile") {
  FrequencyConfig c = config(geometric_schedule(10, 200, 1.05), 3.0);
  auto rep = monotonicity_scan(synth_profile(power_law(1.0, 4.0), c), c);
  CHECK(rep.non_increasing);
  CHECK_FALSE(rep.k_raised);

  FrequencyConfig low = config(geometric_schedule(10, 200, 1.05), 0.0);
  low.k = -1.0;
  auto raised = monotonicity_scan(synth_profile(power_law(1.0, 4.0), low), low);
  CHECK(raised.k_raised);
  CHECK(raised.k_used == 2.0);
  CHECK_THROWS_AS(monotonicity_scan(zero_covector<3>(), flat_metric3(), config(geometric_schedule(10, 20, 1.1))),
                  FrequencyUndefined);
}
