#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace condensate {

using Complex = std::complex<double>;

/// Field values sampled at the grid points. Real fields carry a zero imaginary part.
using FieldVector = Eigen::VectorXcd;
/// Real-valued vectors on the grid (functional coefficients, kernels columns).
using RealVector = Eigen::VectorXd;

/// Uniform midpoint discretization of the interval [a, b].
///
/// Point i sits at a + (i + 1/2) h with h = (b - a) / M, and every point carries
/// the same quadrature weight h. The inner product of two grid functions is
/// h times their plain conjugate dot product.
class Grid {
 public:
  Grid(double a, double b, std::size_t m);

  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  std::size_t size() const noexcept { return m_; }
  double length() const noexcept { return b_ - a_; }
  double spacing() const noexcept { return h_; }
  double weight() const noexcept { return h_; }

  double point(std::size_t i) const noexcept { return a_ + (static_cast<double>(i) + 0.5) * h_; }
  RealVector points() const;

  /// Index of the grid point closest to x; exact midpoints go to the lower index.
  std::size_t nearest_index(double x) const noexcept;

  bool contains(double x) const noexcept { return x >= a_ && x <= b_; }

  friend bool operator==(const Grid& lhs, const Grid& rhs) noexcept {
    return lhs.a_ == rhs.a_ && lhs.b_ == rhs.b_ && lhs.m_ == rhs.m_;
  }

 private:
  double a_;
  double b_;
  std::size_t m_;
  double h_;
};

Grid make_grid(double a, double b, std::size_t m);

/// <psi|phi> = w * sum_i conj(psi_i) phi_i.
Complex inner(const FieldVector& psi, const FieldVector& phi, const Grid& g);
/// Same pairing with a real left argument (linear functionals, basis vectors).
Complex inner(const RealVector& psi, const FieldVector& phi, const Grid& g);
double inner(const RealVector& psi, const RealVector& phi, const Grid& g);

double l2_norm(const FieldVector& phi, const Grid& g);
double l2_norm(const RealVector& phi, const Grid& g);

/// max_i |phi_i|. Throws EmptyVector on an empty input.
double sup_norm(const FieldVector& phi);
double sup_norm(const RealVector& phi);

}  // namespace condensate
