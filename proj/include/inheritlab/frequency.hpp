#pragma once

// Frequency diagnostics on large spheres:
//   X(r) = (r+R0)^{-2} ∫_{S_r} |ω|² dσ
//   E(r) = −(r+R0)^{-3} ∫_{S_r} g(β, ω) dσ,   β_j = (r+R0) ν^i ∇_i ω_j
//   F(r) = (r+R0) exp(2k/(r+R0)^δ) E(r) / X(r)
// ν is the unit normal of S_r. S_r is either the coordinate sphere |x| = r or
// the level set d_R = r of the distance to the coordinate sphere of radius R.

#include <optional>
#include <string>
#include <vector>

#include "inheritlab/forms.hpp"

namespace inheritlab {

enum class LevelSets { Coordinate, Geodesic };

struct FrequencyConfig {
  double R0 = 0.0;
  double delta = 1.0;
  double k = 2.0;
  std::vector<double> schedule;
  int n_theta = 64;
  int n_phi = 128;
  LevelSets level_sets = LevelSets::Coordinate;
  double distance_R = 10.0;  // base sphere radius for geodesic level sets
  DistanceConfig distance;
};

// r_lo, r_lo·q, ... up to the first value ≥ r_hi.
std::vector<double> geometric_schedule(double r_lo, double r_hi, double ratio);

// δ from the metric's declared asymptotics and k = 2·max(C*, 1).
FrequencyConfig default_frequency_config(const Metric3& metric, std::vector<double> schedule);

// Throws InvalidInput for a non-increasing or non-positive schedule.
void validate(const FrequencyConfig& cfg);

struct SphereValues {
  double X = 0.0;
  double E = 0.0;
  double beta_pairing = 0.0;  // ∫ g(β, ω) dσ
};

SphereValues sphere_values(const OneForm3& omega, const Metric3& metric, const FrequencyConfig& cfg, double r);
double compute_X(const OneForm3& omega, const Metric3& metric, const FrequencyConfig& cfg, double r);
double compute_E_surface(const OneForm3& omega, const Metric3& metric, const FrequencyConfig& cfg, double r);
// Throws FrequencyUndefined when X(r) = 0.
double compute_F(const OneForm3& omega, const Metric3& metric, const FrequencyConfig& cfg, double r);
double frequency_from(double X, double E, const FrequencyConfig& cfg, double r);

// (r+R0)^{-2} ∫_{r<|x|<r_max} [|∇ω|² − a²|ω|² + Ric(ω♯,ω♯)] dv + ((r_max+R0)/(r+R0))² E(r_max),
// coordinate spheres only.
double compute_E_volume(const OneForm3& omega, double a, const Metric3& metric, const FrequencyConfig& cfg, double r,
                        double r_max, int radial_nodes = 64);

struct RadialProfile {
  std::vector<double> r;
  std::vector<double> X;
  std::vector<double> E;
  std::vector<double> F;             // NaN where X = 0
  std::vector<double> beta_pairing;
  std::vector<double> dX;            // NaN where the stencil is unavailable
  bool analytic_dX = false;          // dX supplied in closed form (synthetic profiles)
  std::vector<bool> defined;         // X > 0
  double k = 0.0;                    // weight constant used for F
};

// Quadrature on every radius in the schedule (parallel by radius).
RadialProfile compute_profile(const OneForm3& omega, const Metric3& metric, const FrequencyConfig& cfg);

struct SynthSpec {
  std::function<double(double)> X;
  std::function<double(double)> E;   // optional
  std::function<double(double)> dX;  // optional; E = −dX/2 when E is absent
};

// Profile filled analytically on cfg.schedule.
RadialProfile synth_profile(const SynthSpec& spec, const FrequencyConfig& cfg);

// F at schedule index i; throws FrequencyUndefined when X = 0 there.
double frequency_at(const RadialProfile& profile, std::size_t i);
// Recomputes F and dX for a new k.
void refresh_profile(RadialProfile& profile, const FrequencyConfig& cfg);

struct DerivativeIdentityReport {
  std::vector<double> r;
  std::vector<double> ratio;   // |X' + 2E|·(r+R0)^{1+δ}/X at interior radii
  double c2 = 0.0;             // sup of ratio
};

// 4-point centered differences of X on the (possibly non-uniform) schedule.
// Throws FrequencyUndefined when X vanishes on an interior radius.
DerivativeIdentityReport check_derivative_identity(const RadialProfile& profile, const FrequencyConfig& cfg);
DerivativeIdentityReport check_derivative_identity(const OneForm3& omega, const Metric3& metric,
                                                   const FrequencyConfig& cfg);

struct DecayFit {
  double p = 0.0;         // X ≈ C (r+R0)^{-2p}
  double slope = 0.0;     // of log X vs log(r+R0)
  double residual = 0.0;  // rms of the log fit
  double stderr_p = 0.0;
  int samples = 0;
};

// Throws InvalidInput when the window leaves the schedule or holds fewer than 3 radii.
DecayFit fit_decay_exponent(const RadialProfile& profile, double r_lo, double r_hi, double R0 = 0.0);

enum class L2Class { InL2Consistent, NotInL2, Inconclusive };
std::string to_string(L2Class c);

struct L2Classification {
  L2Class verdict = L2Class::Inconclusive;
  DecayFit fit;
  std::vector<double> partial_sums;  // ∫ (r+R0)² X dr from the first radius
  double linear_r2 = 0.0;            // R² of a linear fit of the partial sums in r
  double growth_exponent = 0.0;      // log-log slope of the partial sums over the upper half
  double tail_fraction = 0.0;        // power-law tail beyond the last radius / last partial sum
  std::string note;
};

struct L2Options {
  double r_lo = 0.0;   // fit window; 0 means the whole schedule
  double r_hi = 0.0;
  double margin = 0.05;
};

L2Classification classify_L2(const RadialProfile& profile, const FrequencyConfig& cfg, L2Options opt = {});

struct MonotonicityReport {
  std::vector<double> r;
  std::vector<double> F;
  std::vector<double> dF;           // F[i+1] − F[i]
  std::vector<std::size_t> increases;  // indices i with dF[i] > tol·|F[i]|
  double k_used = 0.0;
  double c2 = 0.0;
  bool k_raised = false;            // cfg.k did not exceed the empirical C₂
  bool non_increasing = true;
  std::string note;
};

MonotonicityReport monotonicity_scan(RadialProfile profile, const FrequencyConfig& cfg, double tol = 1e-12);
MonotonicityReport monotonicity_scan(const OneForm3& omega, const Metric3& metric, const FrequencyConfig& cfg,
                                     double tol = 1e-12);

// CSV with columns r,X,E,F,dX_dr,identity_ratio.
std::string profile_csv(const RadialProfile& profile, const DerivativeIdentityReport* identity = nullptr);
// Log-log plot of X with the fitted slope.
std::string profile_svg(const RadialProfile& profile, const DecayFit* fit = nullptr, double R0 = 0.0);

}  // namespace inheritlab
