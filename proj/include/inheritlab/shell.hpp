#pragma once

// (Δ_H − a²) on 1-forms over a flat shell R0 ≤ |x| ≤ R_max.
//
// On flat space Δ_H acts componentwise as −∇² in the Cartesian frame, so each
// Cartesian component is expanded in real spherical harmonics up to l_max and
// each (component, l, m) block is the radial operator
//     −v'' + l(l+1) r^{-2} v − a² v,    v = r u,
// discretized with second-order differences on a uniform radial grid. The
// inner boundary is Dirichlet. The outer boundary is either Dirichlet (zero
// extension) or the outgoing Dirichlet-to-Neumann closure of r h_l^{(1)}(ar).
//
// With weight power s the stored matrix is r^s T r^s; singular values are
// taken in the measure inner product, i.e. of M^{1/2} r^s T r^s M^{-1/2}.

#include <complex>
#include <iosfwd>
#include <vector>

#include <Eigen/Sparse>

#include "inheritlab/geometry.hpp"

namespace inheritlab {

enum class OuterBoundary { Dirichlet, Outgoing };

struct ShellDiscretization {
  double R0 = 2.0;
  double R_max = 20.0;
  int radial_nodes = 0;  // intervals on [R0, R_max]; 0 means derive from nodes_per_wavelength
  double nodes_per_wavelength = 16.0;
  int l_max = 4;
  OuterBoundary outer = OuterBoundary::Outgoing;
  double weight_power = 1.0;
};

using SparseC = Eigen::SparseMatrix<std::complex<double>>;

struct ShellOperator {
  ShellDiscretization disc;
  double a = 1.0;
  double h = 0.0;
  std::vector<double> r;        // radial unknown locations
  Eigen::VectorXd measure;      // per unknown, strictly positive
  SparseC matrix;               // 3 (l_max+1)² blocks of size r.size()
  int block_size() const { return static_cast<int>(r.size()); }
  int block_count() const { return 3 * (disc.l_max + 1) * (disc.l_max + 1); }
  int degree_of_block(int b) const;  // l of block b
};

// Throws InvalidInput for a = 0, non-flat metrics, or fewer than 10 nodes per wavelength 2π/|a|.
ShellOperator assemble_shell_operator(const ShellDiscretization& disc, const Metric3& metric, double a);

// max |(MA)_{ij} − (MA)_{ji}| / max |(MA)_{ij}|
double measure_symmetry_defect(const ShellOperator& op);

enum class SingularMethod { Dense, Sparse };

struct SingularReport {
  double sigma_min = 0.0;
  int block = -1;                  // block realizing the minimum
  std::vector<double> per_degree;  // smallest value for each l
  int iterations = 0;              // sparse path only
};

// Dense: SVD of every distinct radial block. Sparse: inverse iteration on
// BᴴB with a sparse LU of each distinct block.
SingularReport smallest_singular_value(const ShellOperator& op, SingularMethod method);

// "# rows cols nnz" header, then one "row col re im" line per stored entry (0-based).
void write_triplets(std::ostream& os, const SparseC& m);

}  // namespace inheritlab
