#pragma once

// Einstein-Maxwell audits for explicit non-inheriting solutions and the
// static/stationary reductions.
//
// Conventions: F* = ½ ε_ab^{cd} F_cd with ε_0123 = +√|g| in the chart order of
// each solution; T_ij = F_ik F_j^k − ¼ g_ij F_kl F^kl; the inheritance
// condition is L_K F = −aF*, L_K F* = aF.
//
// Charts: the Som-Raychaudhuri type solution ("mc") lives in (t, r, z, φ) and
// the plane wave in (u, v, y, x). With ε_0123 = +√|g| these orders reproduce
// a = −2b and a = f'(u).

#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "inheritlab/beltrami.hpp"

namespace inheritlab {

struct Symmetry {
  std::string name;
  VectorField<4> K;
  std::function<double(const Eigen::Vector4d&)> a;
};

struct ExactSolution {
  std::string name;
  Metric4 metric;
  TwoForm4 F;
  std::vector<Symmetry> symmetries;  // first entry is the non-inheriting one
  std::map<std::string, double> params;
  std::vector<std::string> coordinates;
  std::function<std::vector<Eigen::Vector4d>(std::uint64_t seed, int n)> sampler;
};

enum class WaveProfile { Sine, Quadratic, Bump };
std::string to_string(WaveProfile p);
WaveProfile parse_wave_profile(const std::string& s);

// f(u) for the plane wave; Bump is 2(1 − u²)³ on |u| < 1 and 0 outside (C²).
template <class S>
S wave_profile(WaveProfile kind, const S& u) {
  switch (kind) {
    case WaveProfile::Sine: return sin(u);
    case WaveProfile::Quadratic: return u * u;
    case WaveProfile::Bump: {
      if (std::abs(value_of(u)) >= 1.0) return S(0.0);
      S q = 1.0 - u * u;
      return 2.0 * q * q * q;
    }
  }
  return S(0.0);
}
double wave_profile_derivative(WaveProfile kind, double u);

ExactSolution minkowski_solution();
// g = −(dt − br²dφ)² + e^{b²r²}(dr² + dz²) + r²dφ²,  A = cos(2bz)(dt − br²dφ).
ExactSolution mc_solution(double b);
// g = −2du dv − b²(x² + y²)du² + dx² + dy²,  A = −√2 b (x cos f − y sin f) du.
ExactSolution ppwave_solution(WaveProfile f, double b = 1.0);
// "minkowski", "mc:b=0.3", "ppwave:f=sin,b=1" (f ∈ sin, u2, bump)
ExactSolution make_solution(const std::string& spec);
std::vector<std::string> solution_names();

// ---- pointwise tensors ------------------------------------------------------

template <class S>
Mat4<S> stress_tensor(const MetricAt<S, 4>& m, const Mat4<S>& F) {
  Mat4<S> Fu = (m.ginv * F * m.ginv).eval();  // F^{kl}
  S f2(0.0);
  for (int k = 0; k < 4; ++k)
    for (int l = 0; l < 4; ++l) f2 = f2 + F(k, l) * Fu(k, l);
  Mat4<S> FFg = (F * m.ginv * F.transpose()).eval();  // F_ik g^{kl} F_jl
  Mat4<S> T;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) T(i, j) = FFg(i, j) - 0.25 * m.g(i, j) * f2;
  return T;
}

// ---- audits -----------------------------------------------------------------

struct MaxwellReport {
  ResidualStats closure;    // max |∂_[a F_bc]|
  ResidualStats coclosure;  // max |∂_[a F*_bc]|
};
MaxwellReport maxwell_residual(const ExactSolution& sol, const std::vector<Eigen::Vector4d>& points);

struct StressAudit {
  std::vector<Eigen::Vector4d> points;
  std::vector<Eigen::Matrix4d> G;
  std::vector<Eigen::Matrix4d> T;
  double kappa = 0.0;
  double floor = 0.0;                  // floor_fraction · max(|G|, |T|)
  double max_relative_residual = 0.0;  // max |G − κT| / (|G| + |T| + floor) over components
  double max_abs_residual = 0.0;
  double max_trace = 0.0;              // max |g^{ij} T_ij|
  double max_asymmetry = 0.0;
  bool vacuum = false;                 // G = 0 and T = 0
};
// Throws InvalidInput for fewer than 10 points, or T ≡ 0 with G ≢ 0.
StressAudit einstein_proportionality(const ExactSolution& sol, const std::vector<Eigen::Vector4d>& points,
                                     double floor_fraction = 1e-4);

struct InheritanceReport {
  ResidualStats first;   // |L_K F + aF*|
  ResidualStats second;  // |L_K F* − aF|
};
InheritanceReport inheritance_defect(const ExactSolution& sol, const std::vector<Eigen::Vector4d>& points,
                                     std::size_t symmetry = 0);
InheritanceReport inheritance_defect(const Metric4& metric, const TwoForm4& F, const VectorField<4>& K,
                                     const std::function<double(const Eigen::Vector4d&)>& a,
                                     const std::vector<Eigen::Vector4d>& points);

// max |∇_(i K_j)| per point, computed as ½ (L_K g)_ij.
ResidualStats killing_audit(const Metric4& metric, const VectorField<4>& K, const std::vector<Eigen::Vector4d>& points);

// max |T(cos φ F + sin φ F*) − T(F)| over random angles.
ResidualStats duality_invariance(const ExactSolution& sol, const std::vector<Eigen::Vector4d>& points,
                                 std::uint64_t seed);

struct NonNullReport {
  ResidualStats proportionality;  // |T_ij K^j − f K_i|
  double f_min = 0.0;
  double f_max = 0.0;
};
// T_ij K^j = f K_i with f = T(K,K)/g(K,K).
NonNullReport static_nonnull_check(const Metric4& metric, const TwoForm4& F, const VectorField<4>& K,
                                   const std::vector<Eigen::Vector4d>& points);

// ---- charts and pullbacks ---------------------------------------------------

// Pullback under (t', x) ↦ (t' + χ(x), x) in a chart (t, x, y, z).
Metric4 time_shift_metric(const Metric4& g, const ScalarField3& chi);
TwoForm4 time_shift_field(const TwoForm4& F, const ScalarField3& chi);

// ---- static reduction -------------------------------------------------------

// Chart (t, x, y, z): g = −V²dt² + g3, F_0i = V W_i sin(a4 t), F_ij = −(*₃W)_ij cos(a4 t),
// i.e. E = W sin(a4 t), B = −W cos(a4 t).
struct StaticConstruction {
  Metric4 metric;
  TwoForm4 F;
};
StaticConstruction static_reduction_construct(const ScalarField3& V, const OneForm3& W, const Metric3& g3, double a4);
// Same data with the magnetic sign flipped (negative control).
StaticConstruction static_reduction_construct_mismatched(const ScalarField3& V, const OneForm3& W, const Metric3& g3,
                                                         double a4);

struct StaticExtraction {
  ScalarField3 V;
  OneForm3 W;
  Metric3 g3;
  double a4 = 0.0;         // time frequency of the ansatz
  double a3 = 0.0;         // constant of ε∇(VW) + a3 W = 0, a3 = −a4 in this orientation
  double consistency = 0.0;  // worst ansatz mismatch at the second time
};
// W is read at t1 and checked against the data at t2 on `points`.
// Throws InvalidInput if V ≤ 0 or the metric is not static, AnsatzInconsistency above tol.
StaticExtraction static_reduction_extract(const Metric4& g4, const TwoForm4& F, double a4,
                                          const std::vector<Eigen::Vector3d>& points, double t1 = 0.3,
                                          double t2 = 1.1, double tol = 1e-10);

// ---- stationary reduction ---------------------------------------------------

// g = −V²(dt + θ)² + g3 and E − iB = V^{-1} ζ e^{−i a4 t}, a4 = −a3, with E_i = V^{-1}F_0i,
// B_i = V^{-1}F*_0i. ζ satisfies *(dζ − i a3 θ∧ζ) = −a3 V^{-1} ζ for Maxwell data.
struct StationaryConstruction {
  Metric4 metric;
  TwoForm4 F;
};
StationaryConstruction stationary_reduction_construct(const TwistedProblem& data);

struct StationaryExtraction {
  TwistedProblem problem;  // (g3, V, θ, a3, ζ)
  double a4 = 0.0;
  double consistency = 0.0;
};
StationaryExtraction stationary_reduction_extract(const Metric4& g4, const TwoForm4& F, double a4,
                                                  const std::vector<Eigen::Vector3d>& points, double t1 = 0.3,
                                                  double t2 = 1.1, double tol = 1e-10);

// Exact stationary data: flat static ABC solution (a4 = 1) seen in the chart t = t' + χ(x).
struct TwistedExemplar {
  Metric4 metric;
  TwoForm4 F;
  ScalarField3 chi;
  double a4 = 1.0;
};
TwistedExemplar twisted_abc_exemplar(const ScalarField3& chi);

}  // namespace inheritlab
