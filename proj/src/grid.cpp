#include "tgc/grid.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "tgc/errors.hpp"
#include "tgc/kernels.hpp"

namespace tgc {

Domain build_domain(int dim, const std::array<double, 2>& lengths,
                    const std::array<std::int64_t, 2>& cells) {
  if (dim != 1 && dim != 2)
    throw InvalidArgument("invalid-dimension: dim must be 1 or 2, got " + std::to_string(dim));
  Domain d;
  d.dim = dim;
  for (int axis = 0; axis < dim; ++axis) {
    if (!(lengths[axis] > 0.0))
      throw InvalidArgument("nonpositive-length: axis " + std::to_string(axis));
    if (cells[axis] < 2)
      throw InvalidArgument("cell-count-too-small: axis " + std::to_string(axis) +
                            " needs at least 2 cells");
    d.lengths[axis] = lengths[axis];
    d.cells[axis] = cells[axis];
  }
  if (dim == 1) {
    d.lengths[1] = 1.0;
    d.cells[1] = 1;
  }
  return d;
}

Field::Field(const Domain& domain, Vector values) : domain_(domain), values_(std::move(values)) {
  if (values_.size() != domain_.cell_count())
    throw ShapeMismatch("field has " + std::to_string(values_.size()) + " values for " +
                        std::to_string(domain_.cell_count()) + " cells");
}

Field& Field::add_scaled(double a, const Field& f) {
  if (!(f.domain_ == domain_)) throw DomainMismatch("add_scaled operands");
  kernels::axpy(static_cast<std::size_t>(values_.size()), a, f.data(), data());
  return *this;
}

Field& Field::combine(double a, const Field& f, double b) {
  if (!(f.domain_ == domain_)) throw DomainMismatch("combine operands");
  kernels::axpby(static_cast<std::size_t>(values_.size()), a, f.data(), b, data());
  return *this;
}

Field& Field::scale(double a) {
  kernels::scal(static_cast<std::size_t>(values_.size()), a, data());
  return *this;
}

Field& Field::clamp(double lo, double hi) {
  kernels::clamp(static_cast<std::size_t>(values_.size()), data(), lo, hi, data());
  return *this;
}

double Field::min() const {
  double lo, hi;
  kernels::minmax(static_cast<std::size_t>(values_.size()), data(), &lo, &hi);
  return lo;
}

double Field::max() const {
  double lo, hi;
  kernels::minmax(static_cast<std::size_t>(values_.size()), data(), &lo, &hi);
  return hi;
}

bool Field::all_finite() const {
  for (std::int64_t i = 0; i < values_.size(); ++i)
    if (!std::isfinite(values_[i])) return false;
  return true;
}

Field SparseOperator::apply(const Field& f) const {
  if (f.size() != matrix.rows()) throw DomainMismatch("operator/field size");
  return Field(f.domain(), matrix * f.values());
}

SparseOperator assemble_neumann_laplacian(const Domain& domain) {
  // Face-based assembly: each interior face between cells a and b along axis
  // d contributes the symmetric pair (+s, -s) with s = 1/dx_d^2 to rows a and
  // b. Boundary faces contribute nothing (ghost reflection = zero flux), so
  // rows and columns sum to zero exactly and the matrix is symmetric by
  // construction.
  const std::int64_t m = domain.cell_count();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(m) * (domain.dim == 1 ? 3 : 5));

  const std::int64_t nx = domain.cells[0];
  const std::int64_t ny = domain.dim == 2 ? domain.cells[1] : 1;

  auto add_face = [&trip](std::int64_t a, std::int64_t b, double s) {
    trip.emplace_back(a, a, -s);
    trip.emplace_back(a, b, s);
    trip.emplace_back(b, b, -s);
    trip.emplace_back(b, a, s);
  };

  const double sx = 1.0 / (domain.cell_size(0) * domain.cell_size(0));
  for (std::int64_t iy = 0; iy < ny; ++iy)
    for (std::int64_t ix = 0; ix + 1 < nx; ++ix)
      add_face(ix + nx * iy, ix + 1 + nx * iy, sx);

  if (domain.dim == 2) {
    const double sy = 1.0 / (domain.cell_size(1) * domain.cell_size(1));
    for (std::int64_t iy = 0; iy + 1 < ny; ++iy)
      for (std::int64_t ix = 0; ix < nx; ++ix)
        add_face(ix + nx * iy, ix + nx * (iy + 1), sy);
  }

  SparseOperator op;
  op.matrix.resize(m, m);
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  op.matrix.makeCompressed();
  op.symmetric = true;
  return op;
}

double inner_product(const Field& f, const Field& g) {
  if (!(f.domain() == g.domain())) throw DomainMismatch("inner_product operands");
  const double raw = kernels::dot(static_cast<std::size_t>(f.size()), f.data(), g.data());
  return raw * f.domain().cell_volume();
}

double integrate(const Field& f) {
  return kernels::sum(static_cast<std::size_t>(f.size()), f.data()) * f.domain().cell_volume();
}

double l2_norm(const Field& f) { return std::sqrt(std::max(0.0, inner_product(f, f))); }

double l2_distance(const Field& f, const Field& g) {
  if (!(f.domain() == g.domain())) throw DomainMismatch("l2_distance operands");
  const double raw = kernels::diff_norm2(static_cast<std::size_t>(f.size()), f.data(), g.data());
  return std::sqrt(std::max(0.0, raw * f.domain().cell_volume()));
}

}  // namespace tgc
