#include "inheritlab/carleman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "inheritlab/errors.hpp"
#include "inheritlab/parallel.hpp"

namespace inheritlab {

namespace {

using cd = std::complex<double>;
constexpr cd I_(0.0, 1.0);

double smooth7(double t) {
  t = std::clamp(t, 0.0, 1.0);
  double t4 = t * t * t * t;
  return t4 * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t);
}

double smooth7_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  double s = t * (1.0 - t);
  return 140.0 * s * s * s;
}

SparseC commutator(const SparseC& a, const SparseC& b) {
  SparseC out = SparseC(a * b) - SparseC(b * a);
  out.prune(cd(0.0));
  return out;
}

// ½(DY + YD) for diagonal D.
SparseC sym(const Eigen::VectorXd& d, const SparseC& y) {
  SparseC D = diagonal_matrix(d);
  SparseC out = 0.5 * (SparseC(D * y) + SparseC(y * D));
  return out;
}

double frobenius(const SparseC& a) {
  double s = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SparseC::InnerIterator it(a, k); it; ++it) s += std::norm(it.value());
  return std::sqrt(s);
}

cd measure_dot(const Eigen::VectorXcd& u, const Eigen::VectorXcd& v, const Eigen::VectorXd& m) {
  cd s(0.0);
  for (Eigen::Index j = 0; j < u.size(); ++j) s += m[j] * std::conj(u[j]) * v[j];
  return s;
}

OperatorMatrix labelled(SparseC m, OperatorLabel l, const RadialGrid& grid) {
  m.makeCompressed();
  OperatorMatrix out;
  out.self_adjoint = adjoint_defect(m, grid) <= 1e-12;
  out.m = std::move(m);
  out.label = l;
  return out;
}

Eigen::VectorXd cutoff_values(const Cutoff& chi, const RadialGrid& grid) {
  Eigen::VectorXd c(grid.size());
  for (int j = 0; j < grid.size(); ++j) c[j] = chi(grid.x[j]);
  return c;
}

}  // namespace

// ---- grid and operators -----------------------------------------------------

RadialGrid make_grid(int nodes, double x_min, double x1, Spacing spacing) {
  if (!(x_min > 0.0) || !(x1 > x_min) || !(x1 <= 0.5)) throw InvalidInput("radial grid needs 0 < x_min < x1 <= 1/2");
  if (nodes < 3) throw InvalidInput("radial grid needs at least 3 interior nodes");
  RadialGrid g;
  g.spacing = spacing;
  g.x_min = x_min;
  g.x1 = x1;
  const int ne = nodes + 2;
  g.r_edges.resize(ne);
  for (int j = 0; j < ne; ++j) {
    double s = static_cast<double>(j) / (ne - 1);
    if (spacing == Spacing::UniformInverseX)
      g.r_edges[j] = 1.0 / x1 + s * (1.0 / x_min - 1.0 / x1);
    else
      g.r_edges[j] = 1.0 / (x1 + s * (x_min - x1));
  }
  g.r_edges[0] = 1.0 / x1;
  g.r_edges[ne - 1] = 1.0 / x_min;
  g.r = g.r_edges.segment(1, nodes);
  g.x = g.r.cwiseInverse();
  g.measure.resize(nodes);
  for (int j = 0; j < nodes; ++j) g.measure[j] = 0.5 * (g.r_edges[j + 2] - g.r_edges[j]);
  return g;
}

RadialModel flat_model(int ell) {
  RadialModel m;
  m.ell = ell;
  return m;
}

RadialModel perturbed_model(double delta, double amplitude, int ell) {
  if (!(delta > 0.0)) throw InvalidInput("perturbation decay δ must be positive");
  RadialModel m;
  m.delta = delta;
  m.amplitude = amplitude;
  m.ell = ell;
  return m;
}

std::string to_string(OperatorLabel l) {
  switch (l) {
    case OperatorLabel::H: return "H";
    case OperatorLabel::A: return "A";
    case OperatorLabel::B: return "B";
    case OperatorLabel::BPoly: return "B_poly";
    case OperatorLabel::P: return "P";
    case OperatorLabel::ReP: return "ReP";
    case OperatorLabel::ImP: return "ImP";
    case OperatorLabel::Commutator: return "commutator";
    case OperatorLabel::VectorField: return "x2Dx";
    case OperatorLabel::Multiplication: return "multiplication";
    case OperatorLabel::Other: return "other";
  }
  return "other";
}

SparseC diagonal_matrix(const Eigen::VectorXd& d) {
  SparseC m(d.size(), d.size());
  m.reserve(Eigen::VectorXi::Constant(d.size(), 1));
  for (Eigen::Index j = 0; j < d.size(); ++j) m.insert(j, j) = d[j];
  m.makeCompressed();
  return m;
}

SparseC identity_matrix(int n) {
  return diagonal_matrix(Eigen::VectorXd::Ones(n));
}

SparseC measure_adjoint(const SparseC& a, const RadialGrid& grid) {
  SparseC ah = a.adjoint();
  SparseC out = diagonal_matrix(grid.measure.cwiseInverse()) * ah * diagonal_matrix(grid.measure);
  return out;
}

double adjoint_defect(const SparseC& a, const RadialGrid& grid) {
  double n = frobenius(a);
  if (n == 0.0) return 0.0;
  return frobenius(SparseC(a - measure_adjoint(a, grid))) / n;
}

OperatorMatrix build_H(const RadialGrid& grid, const RadialModel& model) {
  const int n = grid.size();
  if (n < 16) throw InvalidInput("radial grid too coarse: fewer than 16 nodes");
  if (model.ell < 0) throw InvalidInput("angular mode ℓ must be non-negative");
  if (!model.flat()) {
    if (!(model.delta > 0.0)) throw InvalidInput("perturbation decay δ must be positive");
    for (int j = 0; j < n; ++j) {
      double dr = std::max(grid.r_edges[j + 1] - grid.r_edges[j], grid.r_edges[j + 2] - grid.r_edges[j + 1]);
      if (model.delta * dr / grid.r[j] > 0.1)
        throw InvalidInput("radial grid too coarse for the perturbation: δ·Δr/r > 0.1");
    }
  }
  std::vector<Eigen::Triplet<cd>> t;
  t.reserve(3 * n);
  const double L = model.ell * (model.ell + 1.0);
  for (int j = 0; j < n; ++j) {
    double dl = grid.r_edges[j + 1] - grid.r_edges[j];
    double dr = grid.r_edges[j + 2] - grid.r_edges[j + 1];
    double mi = 1.0 / grid.measure[j];
    double x = grid.x[j];
    double pot = L * x * x + (model.flat() ? 0.0 : model.amplitude * std::pow(x, model.delta));
    t.emplace_back(j, j, mi * (1.0 / dl + 1.0 / dr) + pot);
    if (j > 0) t.emplace_back(j, j - 1, -mi / dl);
    if (j + 1 < n) t.emplace_back(j, j + 1, -mi / dr);
  }
  SparseC H(n, n);
  H.setFromTriplets(t.begin(), t.end());
  return labelled(std::move(H), OperatorLabel::H, grid);
}

OperatorMatrix radial_vector_field(const RadialGrid& grid) {
  const int n = grid.size();
  std::vector<Eigen::Triplet<cd>> t;
  t.reserve(2 * n);
  for (int j = 0; j < n; ++j) {
    double mi = 1.0 / grid.measure[j];
    if (j > 0) t.emplace_back(j, j - 1, -0.5 * mi * I_);
    if (j + 1 < n) t.emplace_back(j, j + 1, 0.5 * mi * I_);
  }
  SparseC G(n, n);
  G.setFromTriplets(t.begin(), t.end());
  return labelled(std::move(G), OperatorLabel::VectorField, grid);
}

double Cutoff::operator()(double x) const {
  return 1.0 - smooth7((x - x_a) / (x_b - x_a));
}

double Cutoff::derivative(double x) const {
  return -smooth7_derivative((x - x_a) / (x_b - x_a)) / (x_b - x_a);
}

namespace {

OperatorMatrix symmetrized_field(const RadialGrid& grid, const Eigen::VectorXd& w, OperatorLabel l) {
  SparseC wg = diagonal_matrix(w) * radial_vector_field(grid).m;
  SparseC out = 0.5 * (wg + measure_adjoint(wg, grid));
  return labelled(std::move(out), l, grid);
}

}  // namespace

OperatorMatrix build_B(const RadialGrid& grid, const Cutoff& chi) {
  return symmetrized_field(grid, cutoff_values(chi, grid), OperatorLabel::B);
}

OperatorMatrix build_A(const RadialGrid& grid, const Cutoff& chi) {
  return symmetrized_field(grid, cutoff_values(chi, grid).cwiseProduct(grid.r), OperatorLabel::A);
}

OperatorMatrix build_B_poly(const RadialGrid& grid, double s, double k, double t, const Cutoff& chi) {
  if (t < 0.0) throw InvalidInput("poly weight parameter t must be non-negative");
  Eigen::VectorXd w(grid.size());
  for (int j = 0; j < grid.size(); ++j) {
    double x = grid.x[j];
    w[j] = chi(x) * std::pow(x, -s) * std::pow(1.0 + t / x, -k);
  }
  return symmetrized_field(grid, w, OperatorLabel::BPoly);
}

// ---- weights ----------------------------------------------------------------

double WeightFamily::F(double x) const {
  double p = phi ? (*phi)(x) : 1.0;
  double out = p * alpha / x;
  if (gamma != 0.0) out += beta * std::log1p(gamma / (beta * x));
  return out;
}

double WeightFamily::x2dF(double x) const {
  double out;
  if (phi)
    out = alpha * (x * phi->derivative(x) - (*phi)(x));
  else
    out = -alpha;
  if (gamma != 0.0) out -= gamma / (1.0 + gamma / (beta * x));
  return out;
}

double WeightFamily::h() const {
  if (alpha == 0.0) throw InvalidInput("semiclassical parameter needs α > 0");
  return 1.0 / alpha;
}

void validate(const WeightFamily& w) {
  if (!(w.alpha >= 0.0)) throw InvalidInput("weight needs α >= 0");
  if (!(w.beta >= 1.0)) throw InvalidInput("weight needs β >= 1");
  if (!(w.gamma >= 0.0 && w.gamma <= 1.0)) throw InvalidInput("weight needs 0 <= γ <= 1");
}

WeightAudit weight_bound_audit(const WeightFamily& w, const RadialGrid& grid) {
  validate(w);
  WeightAudit a;
  a.min_rate = std::numeric_limits<double>::infinity();
  a.max_rate = -std::numeric_limits<double>::infinity();
  const double cap = w.alpha + w.gamma;
  for (int j = 0; j < grid.size(); ++j) {
    double x = grid.x[j];
    if (w.phi && (*w.phi)(x) < 1.0) {
      ++a.cutoff_nodes;
      continue;
    }
    double rate = -w.x2dF(x);
    ++a.nodes_checked;
    a.min_rate = std::min(a.min_rate, rate);
    a.max_rate = std::max(a.max_rate, rate);
    a.max_violation = std::max({a.max_violation, -rate, rate - cap});
  }
  return a;
}

double weight_monotonicity_defect(double alpha, double gamma, const std::vector<double>& betas,
                                  const RadialGrid& grid) {
  if (betas.size() < 2) throw InvalidInput("monotonicity audit needs at least two β values");
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < betas.size(); ++i) {
    if (!(betas[i + 1] > betas[i])) throw InvalidInput("β values must be increasing");
    WeightFamily a{alpha, betas[i], gamma, std::nullopt};
    WeightFamily b{alpha, betas[i + 1], gamma, std::nullopt};
    validate(a);
    validate(b);
    for (int j = 0; j < grid.size(); ++j) worst = std::max(worst, a.F(grid.x[j]) - b.F(grid.x[j]));
  }
  return worst;
}

// ---- remainder norms --------------------------------------------------------

RemainderNorm remainder_norm(const SparseC& K, const RadialGrid& grid, double weight_power, const TestSpace& ts) {
  const int n = grid.size();
  if (K.rows() != n || K.cols() != n) throw InvalidInput("remainder matrix does not match the grid");
  if (!(ts.xi_max > 0.0) || !(ts.taper > 0.0 && ts.taper < 1.0)) throw InvalidInput("invalid test space");
  const double r1 = grid.r1();
  const double L = grid.r_max() - r1;
  const int kmax = static_cast<int>(std::floor(ts.xi_max * L / std::numbers::pi));
  if (kmax < 1) throw InvalidInput("test space is empty: xi_max·L < π");

  Eigen::MatrixXd Q(n, kmax);
  for (int j = 0; j < n; ++j) {
    double u = (grid.r[j] - r1) / L;
    double w = 1.0 - smooth7((u - ts.taper) / (1.0 - ts.taper));
    for (int k = 0; k < kmax; ++k) Q(j, k) = std::sin((k + 1) * std::numbers::pi * u) * w;
  }
  Eigen::VectorXd W(n);
  for (int j = 0; j < n; ++j) W[j] = std::pow(grid.x[j], -0.5 * weight_power);

  Eigen::MatrixXcd KWQ = K * (W.asDiagonal() * Q).cast<cd>();
  Eigen::VectorXd mw = grid.measure.cwiseProduct(W);

  SparseC H0 = build_H(grid, flat_model(0)).m + identity_matrix(n);
  Eigen::MatrixXd HQ = (H0 * Q.cast<cd>()).real();
  Eigen::MatrixXd Sg = Q.transpose() * grid.measure.asDiagonal() * HQ;
  Sg = 0.5 * (Sg + Sg.transpose()).eval();
  Eigen::LLT<Eigen::MatrixXd> llt(Sg);
  if (llt.info() != Eigen::Success) throw SolverFailure("test-space Gram matrix is not positive definite");
  Eigen::MatrixXd Linv = llt.matrixL().solve(Eigen::MatrixXd::Identity(kmax, kmax));

  auto norm_of = [&](const Eigen::MatrixXcd& kwq) {
    Eigen::MatrixXcd A = Q.transpose().cast<cd>() * (mw.cast<cd>().asDiagonal() * kwq);
    Eigen::MatrixXcd B = Linv.cast<cd>() * A * Linv.transpose().cast<cd>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(B);
    return svd.singularValues()(0);
  };

  RemainderNorm out;
  out.total = norm_of(KWQ);
  const int band = std::clamp(ts.boundary_band, 0, n / 2);
  Eigen::MatrixXcd edge = Eigen::MatrixXcd::Zero(n, kmax);
  edge.topRows(band) = KWQ.topRows(band);
  edge.bottomRows(band) = KWQ.bottomRows(band);
  out.boundary = band > 0 ? norm_of(edge) : 0.0;
  return out;
}

// ---- conjugation and commutators --------------------------------------------

Conjugated conjugate(const OperatorMatrix& H, const RadialGrid& grid, const WeightFamily& w, double lambda,
                     double delta, const TestSpace& ts) {
  validate(w);
  const int n = grid.size();
  Conjugated c;
  c.lambda = lambda;
  c.F.resize(n);
  c.x2dF.resize(n);
  for (int j = 0; j < n; ++j) {
    c.F[j] = w.F(grid.x[j]);
    c.x2dF[j] = w.x2dF(grid.x[j]);
  }
  SparseC Hl = H.m - lambda * identity_matrix(n);
  Hl.makeCompressed();
  for (int k = 0; k < Hl.outerSize(); ++k)
    for (SparseC::InnerIterator it(Hl, k); it; ++it) it.valueRef() *= std::exp(c.F[it.row()] - c.F[it.col()]);
  SparseC Pd = measure_adjoint(Hl, grid);
  SparseC re = 0.5 * (Hl + Pd);
  SparseC im = (-0.5 * I_) * (Hl - Pd);
  im.prune(cd(0.0));

  SparseC ref_re = H.m - diagonal_matrix(c.x2dF.cwiseAbs2()) - lambda * identity_matrix(n);
  SparseC G = radial_vector_field(grid).m;
  SparseC ref_im = 2.0 * sym(c.x2dF, G);
  c.structural_re = remainder_norm(SparseC(re - ref_re), grid, delta, ts).total;
  c.structural_im = remainder_norm(SparseC(im - ref_im), grid, delta, ts).total;
  double hn = frobenius(H.m);
  c.im_relative = hn > 0.0 ? frobenius(im) / hn : 0.0;

  c.P = labelled(std::move(Hl), OperatorLabel::P, grid);
  c.ReP = labelled(std::move(re), OperatorLabel::ReP, grid);
  c.ImP = labelled(std::move(im), OperatorLabel::ImP, grid);
  return c;
}

CommutatorAudit commutator_audit(const Conjugated& c, const OperatorMatrix& H, const RadialGrid& grid, double delta,
                                 const TestSpace& ts) {
  CommutatorAudit a;
  a.commutator = I_ * commutator(c.ReP.m, c.ImP.m);
  SparseC D = diagonal_matrix(c.x2dF);
  SparseC Q1 = H.m - diagonal_matrix(c.x2dF.cwiseAbs2());
  SparseC Q1p = 2.0 * SparseC(D * radial_vector_field(grid).m);
  SparseC R = a.commutator - I_ * commutator(Q1, Q1p);
  a.remainder = remainder_norm(R, grid, 1.0 + delta, ts);
  return a;
}

MourreReport mourre_decomposition_check(const RadialGrid& grid, const RadialModel& model, double lambda,
                                        const MourreOptions& opt) {
  const int n = grid.size();
  OperatorMatrix H = build_H(grid, model);
  SparseC Id = identity_matrix(n);
  SparseC Hl = H.m - lambda * Id;
  Eigen::VectorXd c = cutoff_values(opt.chi, grid);
  SparseC X = diagonal_matrix(grid.x);

  SparseC B = build_B(grid, opt.chi).m;
  SparseC R = diagonal_matrix(c.cwiseAbs2().cwiseProduct(grid.x));
  SparseC rhs = (2.0 * lambda) * X + SparseC(Hl * R) + SparseC(R * Hl);
  if (!opt.omit_BxB) rhs -= 2.0 * SparseC(B * X * B);
  SparseC K = I_ * commutator(B, H.m) - rhs;

  SparseC A = build_A(grid, opt.chi).m;
  SparseC Rt = diagonal_matrix(c.cwiseAbs2());
  SparseC Kt = I_ * commutator(A, H.m) - (2.0 * lambda) * Id - SparseC(Hl * Rt) - SparseC(Rt * Hl);

  MourreReport rep;
  rep.lambda = lambda;
  const double d = model.flat() ? 1.0 : model.delta;
  rep.K = remainder_norm(K, grid, 1.0 + d, opt.test);
  rep.K_tilde = remainder_norm(Kt, grid, d, opt.test);
  return rep;
}

PolyWeightReport poly_weight_check(const RadialGrid& grid, const RadialModel& model, double s, double k,
                                   const std::vector<double>& ts, double lambda, bool require_positivity,
                                   const Cutoff& chi, const TestSpace& test) {
  if (require_positivity && s - k < 1.0) throw InvalidInput("poly weight positivity needs s − k >= 1");
  if (ts.empty()) throw InvalidInput("poly weight check needs at least one t");
  const int n = grid.size();
  OperatorMatrix H = build_H(grid, model);
  SparseC Hl = H.m - lambda * identity_matrix(n);
  SparseC G = radial_vector_field(grid).m;
  SparseC Gd = measure_adjoint(G, grid);
  const double d = model.flat() ? 1.0 : model.delta;

  PolyWeightReport rep;
  rep.s = s;
  rep.k = k;
  rep.points.resize(ts.size());
  parallel_for(ts.size(), [&](std::size_t i) {
    double t = ts[i];
    PolyWeightPoint& pt = rep.points[i];
    pt.t = t;
    SparseC B = build_B_poly(grid, s, k, t, chi).m;
    Eigen::VectorXd cw(n), cf(n);
    pt.factor_min = std::numeric_limits<double>::infinity();
    pt.factor_max = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < n; ++j) {
      double x = grid.x[j];
      double q = 1.0 + t / x;
      cw[j] = chi(x) * std::pow(x, 1.0 - s) * std::pow(q, -k);
      double fac = (s - k) + k / q;
      cf[j] = cw[j] * (fac - 1.0);
      pt.factor_min = std::min(pt.factor_min, fac);
      pt.factor_max = std::max(pt.factor_max, fac);
    }
    pt.positive = pt.factor_min >= s - k;
    SparseC C = diagonal_matrix(cw);
    SparseC rhs = (2.0 * lambda) * C + 2.0 * SparseC(Gd * diagonal_matrix(cf) * G) + SparseC(Hl * C) + SparseC(C * Hl);
    SparseC K = I_ * commutator(B, H.m) - rhs;
    pt.remainder = remainder_norm(K, grid, 1.0 + d - s, test);
  });
  for (const auto& p : rep.points) rep.remainder_max = std::max(rep.remainder_max, p.remainder.total);
  return rep;
}

SquaredNormIdentity squared_norm_identity(const Conjugated& c, const RadialGrid& grid, const Eigen::VectorXcd& psi) {
  if (psi.size() != grid.size()) throw InvalidInput("test vector does not match the grid");
  const Eigen::VectorXd& m = grid.measure;
  Eigen::VectorXcd rp = c.ReP.m * psi;
  Eigen::VectorXcd ip = c.ImP.m * psi;
  Eigen::VectorXcd pp = c.P.m * psi;
  Eigen::VectorXcd cp = I_ * (c.ReP.m * ip - c.ImP.m * rp);
  SquaredNormIdentity s;
  s.re2 = measure_dot(rp, rp, m).real();
  s.im2 = measure_dot(ip, ip, m).real();
  cd comm = measure_dot(psi, cp, m);
  s.commutator = comm.real();
  s.commutator_imag = comm.imag();
  s.sum = s.re2 + s.im2 + s.commutator;
  s.p2 = measure_dot(pp, pp, m).real();
  double scale = std::max({s.p2, s.re2, s.im2, std::numeric_limits<double>::min()});
  s.relative_defect = std::abs(s.sum - s.p2) / scale;
  return s;
}

Eigen::VectorXcd random_grid_vector(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(n);
  for (int j = 0; j < n; ++j) v[j] = cd(g(rng), g(rng));
  return v;
}

double measure_norm(const Eigen::VectorXcd& v, const RadialGrid& grid) {
  return std::sqrt(measure_dot(v, v, grid.measure).real());
}

namespace {

// Smallest singular value of a square sparse matrix by inverse iteration on BᴴB.
double sparse_sigma_min(const SparseC& B, Eigen::VectorXcd& x) {
  Eigen::SparseLU<SparseC> lu;
  lu.analyzePattern(B);
  lu.factorize(B);
  if (lu.info() != Eigen::Success) throw SolverFailure("sparse LU failed");
  x.resize(B.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = cd(1.0 + 0.01 * i, 0.5 - 0.003 * i);
  x.normalize();
  double prev = 0.0;
  for (int it = 1; it <= 20000; ++it) {
    Eigen::VectorXcd z = lu.solve(Eigen::VectorXcd(lu.adjoint().solve(x)));
    double rq = x.dot(z).real();  // ≈ σ^{-2}
    x = z.normalized();
    double sigma = 1.0 / std::sqrt(rq);
    if (it > 3 && std::abs(sigma - prev) <= 1e-13 * sigma) break;
    prev = sigma;
  }
  return (B * x).norm();
}

SparseC balanced(const SparseC& P, const Eigen::VectorXd& m) {
  Eigen::VectorXd d = m.cwiseSqrt();
  SparseC out = diagonal_matrix(d) * P * diagonal_matrix(d.cwiseInverse());
  out.makeCompressed();
  return out;
}

}  // namespace

double least_singular_vector(const SparseC& P, const RadialGrid& grid, Eigen::VectorXcd& psi) {
  Eigen::VectorXcd y;
  double s = sparse_sigma_min(balanced(P, grid.measure), y);
  psi = grid.measure.cwiseSqrt().cwiseInverse().cast<cd>().asDiagonal() * y;
  psi /= measure_norm(psi, grid);
  return s;
}

RefinementStudy refinement_study(const std::function<double(const RadialGrid&)>& measure, const std::vector<int>& sizes,
                                 double x_min, double x1, Spacing spacing) {
  if (sizes.size() < 2) throw InvalidInput("refinement study needs at least two sizes");
  RefinementStudy st;
  st.sizes = sizes;
  st.values.resize(sizes.size());
  parallel_for(sizes.size(), [&](std::size_t i) { st.values[i] = measure(make_grid(sizes[i], x_min, x1, spacing)); });
  for (std::size_t i = 0; i + 1 < sizes.size(); ++i) {
    double ch = st.values[i] != 0.0 ? std::abs(st.values[i + 1] / st.values[i] - 1.0)
                                    : std::abs(st.values[i + 1]);
    st.max_change = std::max(st.max_change, ch);
  }
  st.stable = st.max_change < 0.2;
  return st;
}

// ---- probe ------------------------------------------------------------------

std::string to_string(ProbeVerdict v) {
  switch (v) {
    case ProbeVerdict::NonDecaying: return "non_decaying";
    case ProbeVerdict::Decaying: return "decaying";
    case ProbeVerdict::ThresholdInconclusive: return "threshold_inconclusive";
  }
  return "";
}

namespace {

struct ProbeMatrix {
  SparseC balanced;
  double r_max;
};

ProbeMatrix probe_matrix(const ProbeConfig& cfg, int N) {
  const bool outgoing = cfg.lambda > 0.0;
  double h = cfg.h;
  double r_max;
  if (cfg.fixed_r_max > 0.0) {
    r_max = cfg.fixed_r_max;
    h = (r_max - cfg.r1) / N;
  } else {
    r_max = cfg.r1 + N * h;
  }
  // The last unknown sits at r_max; Dirichlet puts the wall one step further out.
  const int n = N;
  const double L = cfg.model.ell * (cfg.model.ell + 1.0);
  std::vector<Eigen::Triplet<cd>> t;
  t.reserve(3 * n);
  Eigen::VectorXd r(n), m = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i) r[i] = cfg.r1 + h * (i + 1);
  const double ih2 = 1.0 / (h * h);
  for (int i = 0; i < n; ++i) {
    double pot = L / (r[i] * r[i]) + (cfg.model.flat() ? 0.0 : cfg.model.amplitude * std::pow(r[i], -cfg.model.delta));
    cd diag = 2.0 * ih2 + pot - cfg.lambda;
    if (i > 0) t.emplace_back(i, i - 1, -ih2);
    if (i + 1 < n) t.emplace_back(i, i + 1, -ih2);
    if (outgoing && i == n - 1) {
      t.back() = Eigen::Triplet<cd>(i, i - 1, -2.0 * ih2);
      diag += -2.0 * I_ * std::sqrt(cfg.lambda) / h;
      m[i] = 0.5;
    }
    t.emplace_back(i, i, diag);
  }
  SparseC T(n, n);
  T.setFromTriplets(t.begin(), t.end());
  Eigen::VectorXd w = r.array().pow(cfg.weight_power);
  SparseC A = diagonal_matrix(w) * T * diagonal_matrix(w);
  return {balanced(A, m), r_max};
}

}  // namespace

ProbeReport no_embedded_eigenvalue_probe(const ProbeConfig& cfg) {
  if (cfg.sizes.size() < 3) throw InvalidInput("probe needs at least three sizes");
  if (!(cfg.h > 0.0) || !(cfg.r1 > 0.0)) throw InvalidInput("probe needs r1 > 0 and h > 0");
  for (std::size_t i = 0; i < cfg.sizes.size(); ++i) {
    if (cfg.sizes[i] < 16) throw InvalidInput("probe sizes must be at least 16");
    if (i > 0 && cfg.sizes[i] <= cfg.sizes[i - 1]) throw InvalidInput("probe sizes must increase");
  }
  if (cfg.fixed_r_max > 0.0 && !(cfg.fixed_r_max > cfg.r1)) throw InvalidInput("probe needs r_max > r1");
  const std::size_t k = cfg.sizes.size();
  ProbeReport rep;
  rep.sizes = cfg.sizes;
  rep.r_max.resize(k);
  rep.sigma.resize(k);
  rep.dense_sigma.assign(k, std::numeric_limits<double>::quiet_NaN());
  parallel_for(k, [&](std::size_t i) {
    ProbeMatrix pm = probe_matrix(cfg, cfg.sizes[i]);
    rep.r_max[i] = pm.r_max;
    Eigen::VectorXcd x;
    rep.sigma[i] = sparse_sigma_min(pm.balanced, x);
    if (static_cast<int>(i) < cfg.dense_oracles) {
      Eigen::BDCSVD<Eigen::MatrixXcd> svd{Eigen::MatrixXcd(pm.balanced)};
      rep.dense_sigma[i] = svd.singularValues().minCoeff();
    }
  });
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    double lx = std::log(static_cast<double>(cfg.sizes[i])), ly = std::log(rep.sigma[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    if (i > 0) rep.min_ratio = std::min(rep.min_ratio, rep.sigma[i] / rep.sigma[i - 1]);
    if (!std::isnan(rep.dense_sigma[i]))
      rep.dense_agreement = std::max(rep.dense_agreement, std::abs(rep.sigma[i] - rep.dense_sigma[i]) / rep.dense_sigma[i]);
  }
  rep.slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  if (cfg.lambda == 0.0) {
    rep.verdict = ProbeVerdict::ThresholdInconclusive;
    rep.note = "λ = 0 is the threshold; the probe is not conclusive there";
  } else if (rep.min_ratio >= 0.9) {
    rep.verdict = ProbeVerdict::NonDecaying;
    rep.note = "σ_min stays bounded below under refinement";
  } else {
    rep.verdict = ProbeVerdict::Decaying;
    rep.note = "σ_min decreases under refinement, consistent with an eigenvalue at λ";
  }
  return rep;
}

double bound_state_coupling(double r1, double lambda) {
  if (!(lambda < 0.0)) throw InvalidInput("bound-state coupling needs λ < 0");
  if (!(r1 > 0.0)) throw InvalidInput("bound-state coupling needs r1 > 0");
  const double kappa = std::sqrt(-lambda);
  const double r_far = r1 + 60.0 / kappa;
  // u(r1) for the solution decaying at infinity, integrated inwards.
  auto shoot = [&](double c, double step) {
    double u = 1.0, du = -kappa + c / (2.0 * kappa * r_far);
    auto f = [&](double r, double a, double b, double& da, double& db) {
      da = b;
      db = (kappa * kappa - c / r) * a;
    };
    const int n = static_cast<int>(std::ceil((r_far - r1) / step));
    const double hs = -(r_far - r1) / n;
    double r = r_far;
    for (int i = 0; i < n; ++i) {
      double k1a, k1b, k2a, k2b, k3a, k3b, k4a, k4b;
      f(r, u, du, k1a, k1b);
      f(r + 0.5 * hs, u + 0.5 * hs * k1a, du + 0.5 * hs * k1b, k2a, k2b);
      f(r + 0.5 * hs, u + 0.5 * hs * k2a, du + 0.5 * hs * k2b, k3a, k3b);
      f(r + hs, u + hs * k3a, du + hs * k3b, k4a, k4b);
      u += hs / 6.0 * (k1a + 2 * k2a + 2 * k3a + k4a);
      du += hs / 6.0 * (k1b + 2 * k2b + 2 * k3b + k4b);
      r += hs;
      double sc = std::max(std::abs(u), std::abs(du));
      if (sc > 1e100) {
        u /= sc;
        du /= sc;
      }
    }
    return u;
  };
  const double coarse = 4e-3, fine = 5e-4;
  double c_lo = 0.0, f_lo = shoot(c_lo, coarse);
  double c_hi = c_lo;
  bool found = false;
  for (int i = 1; i <= 2000; ++i) {
    double c = 0.05 * i;
    double fc = shoot(c, coarse);
    if (fc * f_lo <= 0.0) {
      c_hi = c;
      found = true;
      break;
    }
    c_lo = c;
    f_lo = fc;
  }
  if (!found) throw SolverFailure("no bound-state coupling found below 100");
  f_lo = shoot(c_lo, fine);
  for (int it = 0; it < 200 && c_hi - c_lo > 1e-15 * c_hi; ++it) {
    double c = 0.5 * (c_lo + c_hi);
    double fc = shoot(c, fine);
    if (fc * f_lo <= 0.0) {
      c_hi = c;
    } else {
      c_lo = c;
      f_lo = fc;
    }
  }
  return 0.5 * (c_lo + c_hi);
}

// ---- semiclassical sweep ----------------------------------------------------

std::vector<SemiclassicalPoint> semiclassical_sweep(const RadialGrid& grid, const RadialModel& model, double lambda,
                                                    const std::vector<double>& alphas) {
  if (alphas.empty()) throw InvalidInput("semiclassical sweep needs at least one α");
  const int n = grid.size();
  OperatorMatrix H = build_H(grid, model);
  const double r1 = grid.r1(), L = grid.r_max() - r1;
  std::vector<Eigen::VectorXcd> tests;
  for (double u : {0.2, 0.35, 0.5, 0.65})
    for (double xi : {0.0, 1.0}) {
      Eigen::VectorXcd v(n);
      double rc = r1 + u * L;
      for (int j = 0; j < n; ++j) {
        double d = grid.r[j] - rc;
        v[j] = std::exp(-0.5 * d * d) * std::exp(I_ * (xi * grid.r[j]));
      }
      tests.push_back(v / measure_norm(v, grid));
    }

  std::vector<SemiclassicalPoint> out(alphas.size());
  parallel_for(alphas.size(), [&](std::size_t i) {
    WeightFamily w{alphas[i], 1.0, 0.0, std::nullopt};
    const double h = w.h();
    Conjugated c = conjugate(H, grid, w, lambda);
    SparseC re = (h * h) * c.ReP.m;
    SparseC im = (h * h) * c.ImP.m;
    SparseC C = I_ * commutator(re, im);
    SparseC absorb = 4.0 * h * sym(grid.x, re) - h * sym(grid.x, SparseC(im * im));
    SparseC Q = C - absorb;
    SemiclassicalPoint p;
    p.alpha = alphas[i];
    p.h = h;
    p.min_ratio = std::numeric_limits<double>::infinity();
    p.max_ratio = -std::numeric_limits<double>::infinity();
    for (const auto& v : tests) {
      double num = measure_dot(v, Q * v, grid.measure).real();
      double den = h * measure_dot(v, grid.x.cast<cd>().cwiseProduct(v), grid.measure).real();
      double ratio = num / den;
      p.min_ratio = std::min(p.min_ratio, ratio);
      p.max_ratio = std::max(p.max_ratio, ratio);
    }
    out[i] = p;
  });
  return out;
}

}  // namespace inheritlab
