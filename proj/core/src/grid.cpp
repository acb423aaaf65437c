#include "condensate/grid.hpp"

#include <cmath>
#include <string>

#include "condensate/error.hpp"

namespace condensate {

Grid::Grid(double a, double b, std::size_t m) : a_(a), b_(b), m_(m), h_(0.0) {
  if (!(b > a) || !std::isfinite(a) || !std::isfinite(b)) {
    throw Error(ErrorCode::NonpositiveLength,
                "domain [" + std::to_string(a) + ", " + std::to_string(b) + "] has no positive length");
  }
  if (m < 2) {
    throw Error(ErrorCode::TooFewPoints, "grid needs at least 2 points, got " + std::to_string(m));
  }
  h_ = (b - a) / static_cast<double>(m);
}

RealVector Grid::points() const {
  RealVector x(static_cast<Eigen::Index>(m_));
  for (std::size_t i = 0; i < m_; ++i) x[static_cast<Eigen::Index>(i)] = point(i);
  return x;
}

std::size_t Grid::nearest_index(double x) const noexcept {
  // Point i sits at offset i + 1/2 in units of h.
  const double t = (x - a_) / h_ - 0.5;
  double lower = std::floor(t);
  double pick = (t - lower <= 0.5) ? lower : lower + 1.0;
  if (pick < 0.0) return 0;
  if (pick > static_cast<double>(m_ - 1)) return m_ - 1;
  return static_cast<std::size_t>(pick);
}

Grid make_grid(double a, double b, std::size_t m) { return Grid(a, b, m); }

namespace {

void check_lengths(Eigen::Index n1, Eigen::Index n2, const Grid& g) {
  const auto m = static_cast<Eigen::Index>(g.size());
  if (n1 != m || n2 != m) {
    throw Error(ErrorCode::LengthMismatch, "vector lengths " + std::to_string(n1) + " and " +
                                               std::to_string(n2) + " do not match grid size " +
                                               std::to_string(m));
  }
}

}  // namespace

Complex inner(const FieldVector& psi, const FieldVector& phi, const Grid& g) {
  check_lengths(psi.size(), phi.size(), g);
  // Eigen's dot() conjugates its left operand.
  return g.weight() * psi.dot(phi);
}

Complex inner(const RealVector& psi, const FieldVector& phi, const Grid& g) {
  check_lengths(psi.size(), phi.size(), g);
  Complex acc{0.0, 0.0};
  for (Eigen::Index i = 0; i < psi.size(); ++i) acc += psi[i] * phi[i];
  return g.weight() * acc;
}

double inner(const RealVector& psi, const RealVector& phi, const Grid& g) {
  check_lengths(psi.size(), phi.size(), g);
  return g.weight() * psi.dot(phi);
}

double l2_norm(const FieldVector& phi, const Grid& g) {
  check_lengths(phi.size(), phi.size(), g);
  return std::sqrt(g.weight() * phi.squaredNorm());
}

double l2_norm(const RealVector& phi, const Grid& g) {
  check_lengths(phi.size(), phi.size(), g);
  return std::sqrt(g.weight() * phi.squaredNorm());
}

double sup_norm(const FieldVector& phi) {
  if (phi.size() == 0) throw Error(ErrorCode::EmptyVector, "sup_norm of an empty vector");
  return phi.cwiseAbs().maxCoeff();
}

double sup_norm(const RealVector& phi) {
  if (phi.size() == 0) throw Error(ErrorCode::EmptyVector, "sup_norm of an empty vector");
  return phi.cwiseAbs().maxCoeff();
}

}  // namespace condensate
