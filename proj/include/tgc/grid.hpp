// Uniform cell-centered Cartesian grids (1-D and 2-D), field containers, and
// the homogeneous-Neumann Laplacian with its lumped inner products.
//
// The discretization is chosen so that the discrete calculus is exact:
// the Laplacian is assembled face by face and is symmetric with zero row and
// column sums, and all inner products use the midpoint (lumped) rule. That
// makes summation-by-parts, conservation, and adjoint-transpose tests hold to
// roundoff instead of to discretization accuracy.
#pragma once

#include <Eigen/Core>
#include <Eigen/Sparse>
#include <array>
#include <cstdint>

namespace tgc {

using Vector = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

// Rectangular domain, 1 or 2 axes, cell-centered. Cell (ix, iy) has linear
// index ix + nx*iy and center ((ix+1/2)dx, (iy+1/2)dy).
struct Domain {
  int dim = 1;
  std::array<double, 2> lengths{1.0, 1.0};
  std::array<std::int64_t, 2> cells{2, 1};

  double cell_size(int axis) const { return lengths[axis] / static_cast<double>(cells[axis]); }
  std::int64_t cell_count() const { return dim == 1 ? cells[0] : cells[0] * cells[1]; }
  double cell_volume() const {
    return dim == 1 ? cell_size(0) : cell_size(0) * cell_size(1);
  }
  double volume() const { return dim == 1 ? lengths[0] : lengths[0] * lengths[1]; }

  // Center coordinate of cell `index` along `axis`.
  double center(std::int64_t index, int axis) const {
    const std::int64_t i = (axis == 0) ? index % cells[0] : index / cells[0];
    return (static_cast<double>(i) + 0.5) * cell_size(axis);
  }

  bool operator==(const Domain& other) const {
    return dim == other.dim && lengths == other.lengths && cells == other.cells;
  }
};

// dim in {1,2}, lengths > 0, cells >= 2 per axis. Throws InvalidArgument with
// the violated precondition named.
Domain build_domain(int dim, const std::array<double, 2>& lengths,
                    const std::array<std::int64_t, 2>& cells);

// One real value per cell. Plain value semantics; arithmetic routes through
// the kernels backend.
class Field {
 public:
  Field() = default;
  Field(const Domain& domain, double fill = 0.0)
      : domain_(domain), values_(Vector::Constant(domain.cell_count(), fill)) {}
  Field(const Domain& domain, Vector values);

  const Domain& domain() const { return domain_; }
  std::int64_t size() const { return values_.size(); }
  const Vector& values() const { return values_; }
  Vector& values() { return values_; }
  double operator[](std::int64_t i) const { return values_[i]; }
  double& operator[](std::int64_t i) { return values_[i]; }
  const double* data() const { return values_.data(); }
  double* data() { return values_.data(); }

  // this += a*f
  Field& add_scaled(double a, const Field& f);
  // this = a*f + b*this
  Field& combine(double a, const Field& f, double b);
  Field& scale(double a);
  // this = min(hi, max(lo, this)) pointwise
  Field& clamp(double lo, double hi);

  double min() const;
  double max() const;
  bool all_finite() const;

 private:
  Domain domain_;
  Vector values_;
};

// Square sparse operator over cells. The symmetric flag is a promise made by
// the assembler, checked in tests.
struct SparseOperator {
  SpMat matrix;
  bool symmetric = false;

  std::int64_t rows() const { return matrix.rows(); }
  Field apply(const Field& f) const;
};

// Second-order cell-centered Laplacian with ghost-cell reflection (Neumann).
// Symmetric negative semidefinite; constants are in the kernel; every row and
// column sums to zero.
SparseOperator assemble_neumann_laplacian(const Domain& domain);

// Lumped L2 inner product: sum_cells f*g*cellVolume. Throws DomainMismatch.
double inner_product(const Field& f, const Field& g);

// Cell-volume-weighted sum (== inner_product(f, 1)).
double integrate(const Field& f);

// sqrt(inner_product(f, f))
double l2_norm(const Field& f);

// Weighted L2 distance, sqrt(<f-g, f-g>).
double l2_distance(const Field& f, const Field& g);

}  // namespace tgc
