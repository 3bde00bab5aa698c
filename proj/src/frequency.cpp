#include "inheritlab/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "inheritlab/parallel.hpp"

namespace inheritlab {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> geometric_schedule(double r_lo, double r_hi, double ratio) {
  if (!(r_lo > 0.0) || !(r_hi > r_lo) || !(ratio > 1.0)) throw InvalidInput("geometric schedule needs 0 < r_lo < r_hi, ratio > 1");
  std::vector<double> out{r_lo};
  while (out.back() < r_hi * (1.0 - 1e-12)) out.push_back(out.back() * ratio);
  return out;
}

FrequencyConfig default_frequency_config(const Metric3& metric, std::vector<double> schedule) {
  FrequencyConfig cfg;
  AsymptoticParams af = metric.asymptotics.value_or(AsymptoticParams{});
  cfg.delta = af.delta;
  cfg.k = 2.0 * std::max(af.c_star, 1.0);
  cfg.schedule = std::move(schedule);
  return cfg;
}

void validate(const FrequencyConfig& cfg) {
  if (cfg.schedule.empty()) throw InvalidInput("empty radius schedule");
  for (std::size_t i = 0; i < cfg.schedule.size(); ++i) {
    if (!(cfg.schedule[i] > 0.0)) throw InvalidInput("schedule radii must be positive");
    if (i > 0 && !(cfg.schedule[i] > cfg.schedule[i - 1])) throw InvalidInput("schedule must be strictly increasing");
  }
  if (cfg.R0 < 0.0) throw InvalidInput("R0 must be non-negative");
  if (!(cfg.delta > 0.0)) throw InvalidInput("delta must be positive");
  if (cfg.n_theta < 1 || cfg.n_phi < 1) throw InvalidInput("empty sphere quadrature");
}

// ---- sphere integrals -------------------------------------------------------

namespace {

struct NodeTerms {
  double w2 = 0.0;    // |ω|²_g
  double pair = 0.0;  // g(∇_ν ω, ω)
};

NodeTerms node_terms(const OneForm3& omega, const Metric3& metric, const Eigen::Vector3d& x,
                     const Eigen::Vector3d& dr) {
  Vec3<double> p = x;
  MetricAt<double, 3> m = metric_at<double, 3>(metric, p);
  Eigen::Vector3d w = omega(p);
  Eigen::Matrix3d nab = covariant_derivative_at<double>(metric, omega, p);
  Eigen::Vector3d nu = m.ginv * dr;
  nu /= std::sqrt(dr.dot(nu));
  Eigen::Vector3d dnu = nab.transpose() * nu;  // ν^i ∇_i ω_j
  return {w.dot(m.ginv * w), dnu.dot(m.ginv * w)};
}

}  // namespace

SphereValues sphere_values(const OneForm3& omega, const Metric3& metric, const FrequencyConfig& cfg, double r) {
  if (!(r > 0.0)) throw InvalidInput("radius must be positive");
  SphereQuadrature q = make_sphere_quadrature(1.0, cfg.n_theta, cfg.n_phi);
  double iw2 = 0.0, ipair = 0.0;
  if (cfg.level_sets == LevelSets::Coordinate) {
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
      Eigen::Vector3d n = q.normals[k];
      Eigen::Vector3d x = r * n;
      double dsig = q.weights[k] * r * r * (metric.exactly_flat ? 1.0 : area_density_ratio(metric, x));
      NodeTerms t = node_terms(omega, metric, x, n);
      iw2 += dsig * t.w2;
      ipair += dsig * t.pair;
    }
  } else {
    DistanceField df(metric, cfg.distance_R, cfg.distance);
    double rho = r + cfg.distance_R;
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
      Eigen::Vector3d n = q.normals[k];
      DistanceSample s;
      bool ok = false;
      for (int it = 0; it < 40; ++it) {
        s = df.distance(rho * n);
        double slope = s.gradient.dot(n);
        if (!(slope > 0.0)) throw SolverFailure("distance level set is not star-shaped");
        double step = (s.d - r) / slope;
        rho -= step;
        if (std::abs(step) <= 1e-12 * rho) {
          ok = true;
          break;
        }
      }
      if (!ok) throw SolverFailure("distance level set search did not converge");
      s = df.distance(rho * n);
      Eigen::Vector3d x = rho * n;
      MetricAt<double, 3> m = metric_at<double, 3>(metric, Vec3<double>(x));
      double gd = std::sqrt(s.gradient.dot(m.ginv * s.gradient));
      double dsig = q.weights[k] * m.vol * gd * rho * rho / s.gradient.dot(n);
      NodeTerms t = node_terms(omega, metric, x, s.gradient);
      iw2 += dsig * t.w2;
      ipair += dsig * t.pair;
    }
  }
  const double rr = r + cfg.R0;
  SphereValues out;
  out.X = iw2 / (rr * rr);
  out.beta_pairing = rr * ipair;
  out.E = -out.beta_pairing / (rr * rr * rr);
  return out;
}

double compute_X(const OneForm3& omega, const Metric3& metric, const FrequencyConfig& cfg, double r) {
  return sphere_values(omega, metric, cfg, r).X;
}

double compute_E_surface(const OneForm3& omega, const Metric3& metric, const FrequencyConfig& cfg, double r) {
  return sphere_values(omega, metric, cfg, r).E;
}

double frequency_from(double X, double E, const FrequencyConfig& cfg, double r) {
  if (!(X > 0.0)) throw FrequencyUndefined("frequency undefined: X(r) = 0 at r = " + std::to_string(r));
  const double rr = r + cfg.R0;
  return rr * std::exp(2.0 * cfg.k / std::pow(rr, cfg.delta)) * E / X;
}

double compute_F(const OneForm3& omega, const Metric3& metric, const FrequencyConfig& cfg, double r) {
  SphereValues v = sphere_values(omega, metric, cfg, r);
  return frequency_from(v.X, v.E, cfg, r);
}

double compute_E_volume(const OneForm3& omega, double a, const Metric3& metric, const FrequencyConfig& cfg, double r,
                        double r_max, int radial_nodes) {
  if (cfg.level_sets != LevelSets::Coordinate) throw InvalidInput("volume form of E is available on coordinate spheres only");
  if (!(r_max > r) || !(r > 0.0)) throw InvalidInput("volume form needs 0 < r < r_max");
  const int order = 16;
  int panels = std::max(1, (radial_nodes + order - 1) / order);
  Quadrature1D rad = composite_gauss_legendre(r, r_max, panels, order);
  SphereQuadrature q = make_sphere_quadrature(1.0, cfg.n_theta, cfg.n_phi);
  double vol = 0.0;
  for (std::size_t i = 0; i < rad.nodes.size(); ++i) {
    const double rho = rad.nodes[i];
    double shell = 0.0;
    for (std::size_t k = 0; k < q.nodes.size(); ++k) {
      Vec3<double> p = rho * q.normals[k];
      MetricAt<double, 3> m = metric_at<double, 3>(metric, p);
      Eigen::Vector3d w = omega(p);
      Eigen::Vector3d wu = m.ginv * w;
      Eigen::Matrix3d nab = covariant_derivative_at<double>(metric, omega, p);
      double grad2 = (nab.array() * (m.ginv * nab * m.ginv).array()).sum();
      double ric = 0.0;
      if (!metric.exactly_flat) ric = wu.dot(curvature<double, 3>(metric, p).ricci * wu);
      shell += q.weights[k] * m.vol * (grad2 - a * a * w.dot(wu) + ric);
    }
    vol += rad.weights[i] * rho * rho * shell;
  }
  const double rr = r + cfg.R0, rm = r_max + cfg.R0;
  double boundary = (rm * rm) / (rr * rr) * compute_E_surface(omega, metric, cfg, r_max);
  return vol / (rr * rr) + boundary;
}

// ---- profiles ---------------------------------------------------------------

RadialProfile compute_profile(const OneForm3& omega, const Metric3& metric, const FrequencyConfig& cfg) {
  validate(cfg);
  const std::size_t n = cfg.schedule.size();
  std::vector<SphereValues> vals(n);
  parallel_for(n, [&](std::size_t i) { vals[i] = sphere_values(omega, metric, cfg, cfg.schedule[i]); });
  RadialProfile prof;
  prof.r = cfg.schedule;
  for (const auto& v : vals) {
    prof.X.push_back(v.X);
    prof.E.push_back(v.E);
    prof.beta_pairing.push_back(v.beta_pairing);
  }
  refresh_profile(prof, cfg);
  return prof;
}

RadialProfile synth_profile(const SynthSpec& spec, const FrequencyConfig& cfg) {
  validate(cfg);
  if (!spec.X) throw InvalidInput("synthetic profile needs X(r)");
  if (!spec.E && !spec.dX) throw InvalidInput("synthetic profile needs E(r) or X'(r)");
  RadialProfile prof;
  prof.r = cfg.schedule;
  const double rr0 = cfg.R0;
  for (double r : prof.r) {
    double X = spec.X(r);
    double E = spec.E ? spec.E(r) : -0.5 * spec.dX(r);
    prof.X.push_back(X);
    prof.E.push_back(E);
    prof.beta_pairing.push_back(-E * std::pow(r + rr0, 3));
    if (spec.dX) prof.dX.push_back(spec.dX(r));
  }
  prof.analytic_dX = static_cast<bool>(spec.dX);
  refresh_profile(prof, cfg);
  return prof;
}

namespace {

// Weights of the derivative at x0 from the nodes x[0..3].
Eigen::Vector4d derivative_weights(const std::array<double, 4>& x, double x0) {
  Eigen::Matrix4d A;
  for (int j = 0; j < 4; ++j) {
    double t = x[j] - x0, pw = 1.0;
    for (int i = 0; i < 4; ++i) {
      A(i, j) = pw;
      pw *= t;
    }
  }
  return A.fullPivLu().solve(Eigen::Vector4d(0.0, 1.0, 0.0, 0.0));
}

}  // namespace

void refresh_profile(RadialProfile& prof, const FrequencyConfig& cfg) {
  const std::size_t n = prof.r.size();
  prof.k = cfg.k;
  prof.F.assign(n, kNaN);
  prof.defined.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (prof.X[i] > 0.0) {
      prof.defined[i] = true;
      prof.F[i] = frequency_from(prof.X[i], prof.E[i], cfg, prof.r[i]);
    }
  }
  if (prof.analytic_dX) return;
  prof.dX.assign(n, kNaN);
  for (std::size_t i = 2; i + 2 < n; ++i) {
    std::array<double, 4> x{prof.r[i - 2], prof.r[i - 1], prof.r[i + 1], prof.r[i + 2]};
    Eigen::Vector4d w = derivative_weights(x, prof.r[i]);
    prof.dX[i] = w[0] * prof.X[i - 2] + w[1] * prof.X[i - 1] + w[2] * prof.X[i + 1] + w[3] * prof.X[i + 2];
  }
}

double frequency_at(const RadialProfile& profile, std::size_t i) {
  if (i >= profile.r.size()) throw InvalidInput("profile index out of range");
  if (!profile.defined[i])
    throw FrequencyUndefined("frequency undefined: X(r) = 0 at r = " + std::to_string(profile.r[i]));
  return profile.F[i];
}

DerivativeIdentityReport check_derivative_identity(const RadialProfile& prof, const FrequencyConfig& cfg) {
  DerivativeIdentityReport rep;
  for (std::size_t i = 0; i < prof.r.size(); ++i) {
    if (!std::isfinite(prof.dX[i])) continue;
    if (!(prof.X[i] > 0.0))
      throw FrequencyUndefined("derivative identity undefined: X(r) = 0 at r = " + std::to_string(prof.r[i]));
    double rr = prof.r[i] + cfg.R0;
    double ratio = std::abs(prof.dX[i] + 2.0 * prof.E[i]) * std::pow(rr, 1.0 + cfg.delta) / prof.X[i];
    rep.r.push_back(prof.r[i]);
    rep.ratio.push_back(ratio);
    rep.c2 = std::max(rep.c2, ratio);
  }
  if (rep.r.empty()) throw InvalidInput("schedule too short for the 4-point stencil");
  return rep;
}

DerivativeIdentityReport check_derivative_identity(const OneForm3& omega, const Metric3& metric,
                                                   const FrequencyConfig& cfg) {
  return check_derivative_identity(compute_profile(omega, metric, cfg), cfg);
}

DecayFit fit_decay_exponent(const RadialProfile& prof, double r_lo, double r_hi, double R0) {
  if (prof.r.empty()) throw InvalidInput("empty profile");
  const double tol = 1e-9 * std::max(1.0, std::abs(r_hi));
  if (!(r_hi > r_lo) || r_lo < prof.r.front() - tol || r_hi > prof.r.back() + tol)
    throw InvalidInput("fit window lies outside the schedule");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < prof.r.size(); ++i) {
    if (prof.r[i] < r_lo - tol || prof.r[i] > r_hi + tol) continue;
    if (!(prof.X[i] > 0.0)) throw FrequencyUndefined("X vanishes inside the fit window");
    lx.push_back(std::log(prof.r[i] + R0));
    ly.push_back(std::log(prof.X[i]));
  }
  const int n = static_cast<int>(lx.size());
  if (n < 3) throw InvalidInput("fit window holds fewer than 3 radii");
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  DecayFit fit;
  fit.samples = n;
  fit.slope = sxy / sxx;
  double icpt = my - fit.slope * mx;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) ss += std::pow(ly[i] - icpt - fit.slope * lx[i], 2);
  fit.residual = std::sqrt(ss / n);
  fit.p = -fit.slope / 2.0;
  fit.stderr_p = 0.5 * std::sqrt(ss / std::max(1, n - 2) / sxx);
  return fit;
}

std::string to_string(L2Class c) {
  switch (c) {
    case L2Class::InL2Consistent: return "in_L2_consistent";
    case L2Class::NotInL2: return "not_in_L2";
    case L2Class::Inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

L2Classification classify_L2(const RadialProfile& prof, const FrequencyConfig& cfg, L2Options opt) {
  L2Classification out;
  const std::size_t n = prof.r.size();
  if (n < 4) throw InvalidInput("classification needs at least 4 radii");
  double lo = opt.r_lo > 0.0 ? opt.r_lo : prof.r.front();
  double hi = opt.r_hi > 0.0 ? opt.r_hi : prof.r.back();
  out.fit = fit_decay_exponent(prof, lo, hi, cfg.R0);

  out.partial_sums.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    auto f = [&](std::size_t j) { return std::pow(prof.r[j] + cfg.R0, 2) * prof.X[j]; };
    out.partial_sums[i] = out.partial_sums[i - 1] + 0.5 * (prof.r[i] - prof.r[i - 1]) * (f(i) + f(i - 1));
  }
  {
    double mr = 0.0, ms = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mr += prof.r[i];
      ms += out.partial_sums[i];
    }
    mr /= n;
    ms /= n;
    double srr = 0.0, srs = 0.0, sss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      srr += (prof.r[i] - mr) * (prof.r[i] - mr);
      srs += (prof.r[i] - mr) * (out.partial_sums[i] - ms);
      sss += (out.partial_sums[i] - ms) * (out.partial_sums[i] - ms);
    }
    out.linear_r2 = sss > 0.0 ? srs * srs / (srr * sss) : 0.0;
  }
  {
    std::size_t m = n / 2;
    double s0 = out.partial_sums[m], s1 = out.partial_sums[n - 1];
    out.growth_exponent = (s0 > 0.0 && s1 > 0.0) ? std::log(s1 / s0) / std::log(prof.r[n - 1] / prof.r[m]) : 0.0;
  }
  const double p = out.fit.p;
  if (p > 1.5) {
    double rr = prof.r.back() + cfg.R0;
    double c = prof.X.back() * std::pow(rr, 2.0 * p);
    double tail = c * std::pow(rr, 3.0 - 2.0 * p) / (2.0 * p - 3.0);
    out.tail_fraction = out.partial_sums.back() > 0.0 ? tail / out.partial_sums.back()
                                                      : std::numeric_limits<double>::infinity();
  } else {
    out.tail_fraction = std::numeric_limits<double>::infinity();
  }
  if (p < 1.5 - opt.margin && out.growth_exponent > 0.25) {
    out.verdict = L2Class::NotInL2;
    out.note = "partial sums grow without saturation and the decay exponent is below 3/2; "
               "a nonzero L2 solution would force F(infinity) >= 3/2";
  } else if (p > 1.5 + opt.margin && out.tail_fraction < 0.25) {
    out.verdict = L2Class::InL2Consistent;
    out.note = "partial sums saturate and the decay exponent exceeds 3/2";
  } else {
    out.verdict = L2Class::Inconclusive;
    out.note = "decay exponent within the margin of 3/2 or partial sums neither saturate nor grow";
  }
  return out;
}

MonotonicityReport monotonicity_scan(RadialProfile prof, const FrequencyConfig& cfg, double tol) {
  MonotonicityReport rep;
  for (std::size_t i = 0; i < prof.r.size(); ++i)
    if (!(prof.X[i] > 0.0))
      throw FrequencyUndefined("frequency undefined: X(r) = 0 at r = " + std::to_string(prof.r[i]));
  rep.c2 = check_derivative_identity(prof, cfg).c2;
  FrequencyConfig used = cfg;
  if (!(cfg.k > rep.c2)) {
    used.k = 2.0 * std::max(rep.c2, 1.0);
    rep.k_raised = true;
  }
  rep.k_used = used.k;
  refresh_profile(prof, used);
  rep.r = prof.r;
  rep.F = prof.F;
  for (std::size_t i = 0; i + 1 < prof.r.size(); ++i) {
    double d = prof.F[i + 1] - prof.F[i];
    rep.dF.push_back(d);
    if (d > tol * std::max(std::abs(prof.F[i]), std::abs(prof.F[i + 1]))) rep.increases.push_back(i);
  }
  rep.non_increasing = rep.increases.empty();
  rep.note = "monotonicity is asserted only for L2 fields; increases are recorded for other inputs";
  return rep;
}

MonotonicityReport monotonicity_scan(const OneForm3& omega, const Metric3& metric, const FrequencyConfig& cfg,
                                     double tol) {
  return monotonicity_scan(compute_profile(omega, metric, cfg), cfg, tol);
}

// ---- export -----------------------------------------------------------------

std::string profile_csv(const RadialProfile& prof, const DerivativeIdentityReport* identity) {
  std::ostringstream os;
  os << std::setprecision(17);
  os << "r,X,E,F,dX_dr,identity_ratio\n";
  for (std::size_t i = 0; i < prof.r.size(); ++i) {
    double ratio = kNaN;
    if (identity) {
      auto it = std::find(identity->r.begin(), identity->r.end(), prof.r[i]);
      if (it != identity->r.end()) ratio = identity->ratio[static_cast<std::size_t>(it - identity->r.begin())];
    }
    os << prof.r[i] << ',' << prof.X[i] << ',' << prof.E[i] << ',' << prof.F[i] << ',' << prof.dX[i] << ',' << ratio
       << '\n';
  }
  return os.str();
}

std::string profile_svg(const RadialProfile& prof, const DecayFit* fit, double R0) {
  const double W = 640, H = 420, pad = 50;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < prof.r.size(); ++i) {
    if (!(prof.X[i] > 0.0)) continue;
    lx.push_back(std::log10(prof.r[i] + R0));
    ly.push_back(std::log10(prof.X[i]));
  }
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (lx.size() >= 2) {
    double x0 = *std::min_element(lx.begin(), lx.end()), x1 = *std::max_element(lx.begin(), lx.end());
    double y0 = *std::min_element(ly.begin(), ly.end()), y1 = *std::max_element(ly.begin(), ly.end());
    if (y1 - y0 < 1e-12) {
      y0 -= 0.5;
      y1 += 0.5;
    }
    auto X = [&](double v) { return pad + (v - x0) / (x1 - x0) * (W - 2 * pad); };
    auto Y = [&](double v) { return H - pad - (v - y0) / (y1 - y0) * (H - 2 * pad); };
    os << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < lx.size(); ++i) os << X(lx[i]) << ',' << Y(ly[i]) << ' ';
    os << "\"/>\n";
    if (fit) {
      double mx = 0.0, my = 0.0;
      for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
      }
      mx /= lx.size();
      my /= ly.size();
      auto line = [&](double v) { return my + fit->slope * (v - mx); };
      os << "<line x1=\"" << X(x0) << "\" y1=\"" << Y(line(x0)) << "\" x2=\"" << X(x1) << "\" y2=\"" << Y(line(x1))
         << "\" stroke=\"red\" stroke-dasharray=\"6,4\"/>\n";
      os << "<text x=\"" << pad << "\" y=\"" << pad - 15 << "\" font-size=\"14\">slope " << fit->slope << ", p = "
         << fit->p << "</text>\n";
    }
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" font-size=\"13\">log10(r + R0)</text>\n";
    os << "<text x=\"8\" y=\"" << H / 2 << "\" font-size=\"13\">log10 X</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace inheritlab
