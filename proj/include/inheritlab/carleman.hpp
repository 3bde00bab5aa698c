#pragma once

// Radial matrix model of the conjugated-operator estimates near x = 0, x = 1/r.
//
// Nodes are ordered by increasing r on the collar x_min ≤ x ≤ x1 with Dirichlet
// ends. The measure is dx/x² = dr, in which x²D_x = i∂_r is formally
// self-adjoint, and
//     H = (x²D_x)² + ℓ(ℓ+1) x² + A x^δ   (= −∂_r² + ℓ(ℓ+1)/r² + A/r^δ).
// (x²D_x)² is the finite-volume form on the dual cells; x²D_x is i·M^{-1}S with
// S the skew central-difference form, so both are self-adjoint for the measure
// inner product ⟨u, v⟩ = Σ m_j ū_j v_j. Adjoints below are measure adjoints
// A† = M^{-1} Aᴴ M.
//
// Remainder norms: for a remainder K with claimed decay x^p, the reported norm
// is that of x^{-p/2} K x^{-p/2} as a map H¹ → H^{-1} restricted to a fixed
// space of tapered sine modes on [r1, r_max] (frequencies ≤ xi_max). The space
// does not depend on the node count, so the norm converges under refinement.

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Sparse>

#include "inheritlab/shell.hpp"

namespace inheritlab {

enum class Spacing { UniformX, UniformInverseX };

struct RadialGrid {
  Spacing spacing = Spacing::UniformInverseX;
  double x_min = 0.025;
  double x1 = 0.5;
  Eigen::VectorXd r_edges;  // r at all nodes including both Dirichlet ends
  Eigen::VectorXd r;        // interior nodes, increasing r
  Eigen::VectorXd x;        // 1/r
  Eigen::VectorXd measure;  // dual-cell lengths in r
  int size() const { return static_cast<int>(r.size()); }
  double r1() const { return 1.0 / x1; }
  double r_max() const { return 1.0 / x_min; }
};

// Throws InvalidInput unless 0 < x_min < x1 ≤ 1/2 and nodes ≥ 3.
RadialGrid make_grid(int nodes, double x_min, double x1 = 0.5, Spacing spacing = Spacing::UniformInverseX);

struct RadialModel {
  double delta = 1.0;
  double amplitude = 0.0;
  int ell = 0;
  bool flat() const { return amplitude == 0.0; }
};
RadialModel flat_model(int ell = 0);
RadialModel perturbed_model(double delta, double amplitude, int ell = 0);

enum class OperatorLabel { H, A, B, BPoly, P, ReP, ImP, Commutator, VectorField, Multiplication, Other };
std::string to_string(OperatorLabel l);

struct OperatorMatrix {
  SparseC m;
  OperatorLabel label = OperatorLabel::Other;
  bool self_adjoint = false;
};

SparseC measure_adjoint(const SparseC& a, const RadialGrid& grid);
// ‖A − A†‖_F / ‖A‖_F (0 for A = 0).
double adjoint_defect(const SparseC& a, const RadialGrid& grid);
SparseC diagonal_matrix(const Eigen::VectorXd& d);
SparseC identity_matrix(int n);

// Throws InvalidInput for fewer than 16 nodes or, with a perturbation, when
// δ·Δr/r > 0.1 somewhere on the grid.
OperatorMatrix build_H(const RadialGrid& grid, const RadialModel& model);
OperatorMatrix radial_vector_field(const RadialGrid& grid);  // x²D_x

// 1 on x ≤ x_a, 0 on x ≥ x_b, joined by the degree-7 smoothstep (C³).
struct Cutoff {
  double x_a = 0.3;
  double x_b = 0.45;
  double operator()(double x) const;
  double derivative(double x) const;
};

OperatorMatrix build_B(const RadialGrid& grid, const Cutoff& chi = {});  // ½(χ x²D_x + adj)
OperatorMatrix build_A(const RadialGrid& grid, const Cutoff& chi = {});  // ½(χ x D_x + adj)
// ½(χ x^{-s}(1 + t/x)^{-k} x²D_x + adj)
OperatorMatrix build_B_poly(const RadialGrid& grid, double s, double k, double t, const Cutoff& chi = {});

// F(x) = φ(x) α/x + β log(1 + γ/(βx)); φ ≡ 1 unless a cutoff is given.
struct WeightFamily {
  double alpha = 0.0;
  double beta = 1.0;
  double gamma = 0.0;
  std::optional<Cutoff> phi;
  double F(double x) const;
  double x2dF(double x) const;  // x² ∂_x F
  double h() const;             // 1/α (throws for α = 0)
};
// α ≥ 0, β ≥ 1, 0 ≤ γ ≤ 1.
void validate(const WeightFamily& w);

struct WeightAudit {
  double max_violation = 0.0;  // of 0 ≤ −x²∂_xF ≤ α + γ
  double min_rate = 0.0;
  double max_rate = 0.0;
  int nodes_checked = 0;
  int cutoff_nodes = 0;  // nodes with φ < 1, excluded from the bound
};
WeightAudit weight_bound_audit(const WeightFamily& w, const RadialGrid& grid);
// max over nodes and consecutive β pairs of F_{β_i} − F_{β_{i+1}} (≤ 0 when monotone); betas increasing.
double weight_monotonicity_defect(double alpha, double gamma, const std::vector<double>& betas,
                                  const RadialGrid& grid);

struct TestSpace {
  double xi_max = 8.0;
  double taper = 0.85;  // modes are tapered to zero on u ∈ [taper, 1], u = (r − r1)/(r_max − r1)
  int boundary_band = 4;
};

struct RemainderNorm {
  double total = 0.0;
  double boundary = 0.0;  // rows within boundary_band of either end only
};
RemainderNorm remainder_norm(const SparseC& K, const RadialGrid& grid, double weight_power, const TestSpace& ts = {});

struct Conjugated {
  OperatorMatrix P, ReP, ImP;
  Eigen::VectorXd F, x2dF;
  double lambda = 0.0;
  double structural_re = 0.0;  // ReP − (H + (x²D_xF)² − λ)  with x^δ divided out
  double structural_im = 0.0;  // ImP − ((x²∂_xF)x²D_x + x²D_x(x²∂_xF))  with x^δ divided out
  double im_relative = 0.0;    // ‖ImP‖_F / ‖H‖_F
};
// P = e^F (H − λ) e^{−F}, formed entrywise as e^{F_i − F_j}(H − λ)_ij.
Conjugated conjugate(const OperatorMatrix& H, const RadialGrid& grid, const WeightFamily& w, double lambda,
                     double delta = 1.0, const TestSpace& ts = {});

struct CommutatorAudit {
  SparseC commutator;   // i[ReP, ImP]
  RemainderNorm remainder;  // of i[ReP, ImP] − i[H + (x²D_xF)², 2(x²∂_xF)x²D_x], x^{1+δ} divided out
};
CommutatorAudit commutator_audit(const Conjugated& c, const OperatorMatrix& H, const RadialGrid& grid,
                                 double delta = 1.0, const TestSpace& ts = {});

struct MourreOptions {
  Cutoff chi;
  TestSpace test;
  bool omit_BxB = false;  // negative control
};
struct MourreReport {
  double lambda = 0.0;
  RemainderNorm K;        // i[B,H] − (2λx − 2BxB + (H−λ)R + R(H−λ)), R = χ²x, x^{1+δ} divided out
  RemainderNorm K_tilde;  // i[A,H] − (2λ + (H−λ)R̃ + R̃(H−λ)), R̃ = χ², x^δ divided out
};
MourreReport mourre_decomposition_check(const RadialGrid& grid, const RadialModel& model, double lambda,
                                        const MourreOptions& opt = {});

struct PolyWeightPoint {
  double t = 0.0;
  double factor_min = 0.0;  // of s − k (t/x)/(1 + t/x) over the nodes
  double factor_max = 0.0;
  bool positive = false;    // factor_min ≥ s − k
  RemainderNorm remainder;  // x^{1+δ−s} divided out
};
struct PolyWeightReport {
  double s = 0.0, k = 0.0;
  std::vector<PolyWeightPoint> points;
  double remainder_max = 0.0;
};
// Throws InvalidInput when positivity is required and s − k < 1.
PolyWeightReport poly_weight_check(const RadialGrid& grid, const RadialModel& model, double s, double k,
                                   const std::vector<double>& ts, double lambda, bool require_positivity = true,
                                   const Cutoff& chi = {}, const TestSpace& test = {});

struct SquaredNormIdentity {
  double re2 = 0.0;         // ‖Re P ψ‖²
  double im2 = 0.0;         // ‖Im P ψ‖²
  double commutator = 0.0;  // ⟨ψ, i[Re P, Im P] ψ⟩
  double commutator_imag = 0.0;
  double sum = 0.0;
  double p2 = 0.0;          // ‖P ψ‖²
  double relative_defect = 0.0;
};
SquaredNormIdentity squared_norm_identity(const Conjugated& c, const RadialGrid& grid, const Eigen::VectorXcd& psi);

Eigen::VectorXcd random_grid_vector(int n, std::uint64_t seed);
double measure_norm(const Eigen::VectorXcd& v, const RadialGrid& grid);
// Smallest measure singular value of P and its right singular vector (unit measure norm).
double least_singular_vector(const SparseC& P, const RadialGrid& grid, Eigen::VectorXcd& psi);

struct RefinementStudy {
  std::vector<int> sizes;
  std::vector<double> values;
  double max_change = 0.0;  // max |v_{i+1}/v_i − 1|
  bool stable = false;      // max_change < 0.2
};
RefinementStudy refinement_study(const std::function<double(const RadialGrid&)>& measure, const std::vector<int>& sizes,
                                 double x_min, double x1 = 0.5, Spacing spacing = Spacing::UniformInverseX);

// ---- no-embedded-eigenvalue probe -------------------------------------------

struct ProbeConfig {
  double lambda = 1.0;
  RadialModel model;
  double r1 = 2.0;
  double h = 0.05;
  double fixed_r_max = 0.0;  // > 0: keep r_max and refine h = (r_max − r1)/N instead of extending
  std::vector<int> sizes{256, 512, 1024, 2048};
  double weight_power = 1.0;
  int dense_oracles = 2;
};

enum class ProbeVerdict { NonDecaying, Decaying, ThresholdInconclusive };
std::string to_string(ProbeVerdict v);

struct ProbeReport {
  std::vector<int> sizes;
  std::vector<double> r_max;
  std::vector<double> sigma;
  std::vector<double> dense_sigma;  // NaN where no dense oracle was run
  double slope = 0.0;               // of log σ against log size
  double min_ratio = 0.0;           // min σ_{i+1}/σ_i
  double dense_agreement = 0.0;     // max relative gap to the dense oracle
  ProbeVerdict verdict = ProbeVerdict::NonDecaying;
  std::string note;
};
// On r = r1 + jh, j = 1..N (r_max = r1 + Nh): λ > 0 closes the far end with the outgoing condition
// u' = i√λ u, otherwise Dirichlet. Throws InvalidInput for fewer than 3 sizes.
ProbeReport no_embedded_eigenvalue_probe(const ProbeConfig& cfg);

// Shooting: c such that −u'' − (c/r) u = λu (λ < 0) has a solution decaying at ∞
// with u(r1) = 0; the first such c.
double bound_state_coupling(double r1 = 2.0, double lambda = -1.0);

// ---- semiclassical sweep ----------------------------------------------------

struct SemiclassicalPoint {
  double alpha = 0.0;
  double h = 0.0;
  double min_ratio = 0.0;  // of (⟨ψ, i[ReP_h, ImP_h]ψ⟩ − absorbable)/(h⟨ψ, xψ⟩) over test vectors
  double max_ratio = 0.0;
};
// P_h = h² e^{α/x}(H − λ)e^{−α/x}, h = 1/α. The absorbable part is the
// symmetrization of xh(4 Re P_h − (Im P_h)²).
std::vector<SemiclassicalPoint> semiclassical_sweep(const RadialGrid& grid, const RadialModel& model, double lambda,
                                                    const std::vector<double>& alphas);

}  // namespace inheritlab
