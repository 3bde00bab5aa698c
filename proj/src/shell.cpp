#include "inheritlab/shell.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

namespace inheritlab {

namespace {

using cd = std::complex<double>;

// d/dr log(r h_l(ar)) at r = R for the outgoing spherical Hankel function.
cd outgoing_log_derivative(int l, double a, double R) {
  double z = std::abs(a) * R;
  auto ul = static_cast<unsigned>(l);
  cd h(std::sph_bessel(ul, z), std::sph_neumann(ul, z));
  cd h1(std::sph_bessel(ul + 1, z), std::sph_neumann(ul + 1, z));
  cd dh = (static_cast<double>(l) / z) * h - h1;
  return (h + z * dh) / (R * h);
}

}  // namespace

int ShellOperator::degree_of_block(int b) const {
  int nlm = (disc.l_max + 1) * (disc.l_max + 1);
  int lm = b % nlm;
  int l = static_cast<int>(std::sqrt(static_cast<double>(lm)));
  while ((l + 1) * (l + 1) <= lm) ++l;
  while (l * l > lm) --l;
  return l;
}

ShellOperator assemble_shell_operator(const ShellDiscretization& disc, const Metric3& metric, double a) {
  if (a == 0.0) throw InvalidInput("curl eigenvalue a must be nonzero");
  if (!metric.exactly_flat) throw InvalidInput("shell operator is implemented for the flat metric only");
  if (!(disc.R0 > 0.0) || !(disc.R_max > disc.R0)) throw InvalidInput("shell needs 0 < R0 < R_max");
  if (disc.l_max < 0) throw InvalidInput("l_max must be non-negative");
  const double wavelength = 2.0 * std::numbers::pi / std::abs(a);
  int n = disc.radial_nodes;
  if (n <= 0) {
    if (!(disc.nodes_per_wavelength > 0.0)) throw InvalidInput("nodes_per_wavelength must be positive");
    n = static_cast<int>(std::lround((disc.R_max - disc.R0) * disc.nodes_per_wavelength / wavelength));
  }
  if (n < 3) throw InvalidInput("shell grid has fewer than three intervals");
  const double h = (disc.R_max - disc.R0) / n;
  if (wavelength / h < 10.0 - 1e-12)
    throw InvalidInput("shell grid too coarse: fewer than 10 nodes per wavelength 2π/|a|");

  ShellOperator op;
  op.disc = disc;
  op.a = a;
  op.h = h;
  const bool outgoing = disc.outer == OuterBoundary::Outgoing;
  const int N = outgoing ? n : n - 1;
  for (int i = 1; i <= N; ++i) op.r.push_back(disc.R0 + h * i);

  const int nb = op.block_count();
  const double ih2 = 1.0 / (h * h);
  const double s = disc.weight_power;
  std::vector<Eigen::Triplet<cd>> trip;
  trip.reserve(static_cast<std::size_t>(nb) * N * 3);
  op.measure.resize(static_cast<Eigen::Index>(nb) * N);
  for (int b = 0; b < nb; ++b) {
    const int l = op.degree_of_block(b);
    const int off = b * N;
    cd kappa = outgoing ? outgoing_log_derivative(l, a, disc.R_max) : cd(0.0);
    for (int i = 0; i < N; ++i) {
      const double ri = op.r[i];
      const double wi = std::pow(ri, s);
      cd diag = 2.0 * ih2 + l * (l + 1.0) / (ri * ri) - a * a;
      double lower = -ih2, upper = -ih2;
      double m = 1.0;
      if (outgoing && i == N - 1) {
        lower = -2.0 * ih2;
        diag += -2.0 * kappa / h;
        m = 0.5;
      }
      op.measure[off + i] = m;
      trip.emplace_back(off + i, off + i, wi * diag * wi);
      if (i > 0) trip.emplace_back(off + i, off + i - 1, wi * lower * std::pow(op.r[i - 1], s));
      if (i < N - 1) trip.emplace_back(off + i, off + i + 1, wi * upper * std::pow(op.r[i + 1], s));
    }
  }
  op.matrix.resize(static_cast<Eigen::Index>(nb) * N, static_cast<Eigen::Index>(nb) * N);
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  op.matrix.makeCompressed();
  return op;
}

double measure_symmetry_defect(const ShellOperator& op) {
  SparseC ma = op.measure.cast<cd>().asDiagonal() * op.matrix;
  SparseC diff = SparseC(ma - SparseC(ma.transpose()));
  double scale = 0.0, worst = 0.0;
  for (int k = 0; k < ma.outerSize(); ++k)
    for (SparseC::InnerIterator it(ma, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseC::InnerIterator it(diff, k); it; ++it) worst = std::max(worst, std::abs(it.value()));
  return scale > 0.0 ? worst / scale : 0.0;
}

namespace {

// M^{1/2} A M^{-1/2} restricted to block b.
SparseC balanced_block(const ShellOperator& op, int b) {
  const int N = op.block_size();
  SparseC blk = op.matrix.block(static_cast<Eigen::Index>(b) * N, static_cast<Eigen::Index>(b) * N, N, N);
  Eigen::VectorXd d = op.measure.segment(static_cast<Eigen::Index>(b) * N, N).cwiseSqrt();
  SparseC out = d.cast<cd>().asDiagonal() * blk * d.cwiseInverse().cast<cd>().asDiagonal();
  out.makeCompressed();
  return out;
}

double dense_sigma_min(const SparseC& blk) {
  Eigen::MatrixXcd dense(blk);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(dense);
  return svd.singularValues().minCoeff();
}

double sparse_sigma_min(const SparseC& blk, int* iterations) {
  Eigen::SparseLU<SparseC> lu;
  lu.analyzePattern(blk);
  lu.factorize(blk);
  if (lu.info() != Eigen::Success) throw SolverFailure("sparse LU of shell block failed");
  Eigen::VectorXcd x = Eigen::VectorXcd::Ones(blk.rows());
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = cd(1.0 + 0.01 * i, 0.5 - 0.003 * i);
  x.normalize();
  double prev = 0.0;
  double sigma = 0.0;
  for (int it = 1; it <= 5000; ++it) {
    Eigen::VectorXcd y = lu.adjoint().solve(x);
    Eigen::VectorXcd z = lu.solve(y);
    double nz = z.norm();
    // ‖(BᴴB)^{-1}x‖ → σ_min^{-2}
    sigma = 1.0 / std::sqrt(nz);
    x = z / nz;
    if (iterations) *iterations = it;
    if (it > 3 && std::abs(sigma - prev) <= 1e-14 * sigma) break;
    prev = sigma;
  }
  Eigen::VectorXcd bx = blk * x;
  return bx.norm();
}

}  // namespace

SingularReport smallest_singular_value(const ShellOperator& op, SingularMethod method) {
  SingularReport rep;
  rep.sigma_min = std::numeric_limits<double>::infinity();
  rep.per_degree.assign(op.disc.l_max + 1, 0.0);
  // blocks with equal l are identical; use component 0, m = 0
  for (int l = 0; l <= op.disc.l_max; ++l) {
    int b = l * l + l;
    SparseC blk = balanced_block(op, b);
    int its = 0;
    double s = method == SingularMethod::Dense ? dense_sigma_min(blk) : sparse_sigma_min(blk, &its);
    rep.iterations = std::max(rep.iterations, its);
    rep.per_degree[l] = s;
    if (s < rep.sigma_min) {
      rep.sigma_min = s;
      rep.block = b;
    }
  }
  return rep;
}

void write_triplets(std::ostream& os, const SparseC& m) {
  os << "# " << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  os.precision(17);
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseC::InnerIterator it(m, k); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
}

}  // namespace inheritlab
