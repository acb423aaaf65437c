#pragma once

#include <string>
#include <string_view>
#include <variant>

#include "condensate/covariance.hpp"
#include "condensate/grid.hpp"

namespace condensate {

struct PointEval {
  double x0;
  std::size_t index;
  double snap_distance;  // |x0 - x_index|
};

struct DerivativeEval {
  double x0;
  int n;
  int order;
  std::size_t index;
  double snap_distance;
};

struct Integral {
  std::string weight_name;
};

struct Custom {};

using FunctionalKind = std::variant<PointEval, DerivativeEval, Integral, Custom>;

/// A linear functional <T| stored as its coefficient vector: <T|phi> = inner(coeff, phi).
///
/// Coefficients are real; the field they act on may be complex.
class LinearFunctional {
 public:
  LinearFunctional(Grid g, FunctionalKind kind, RealVector coeff);

  const Grid& grid() const noexcept { return grid_; }
  const FunctionalKind& kind() const noexcept { return kind_; }
  const RealVector& coeff() const noexcept { return coeff_; }

  Complex operator()(const FieldVector& phi) const { return inner(coeff_, phi, grid_); }

  /// Order of the derivative this functional evaluates (0 for point evaluation and the rest).
  int derivative_order() const noexcept;

 private:
  Grid grid_;
  FunctionalKind kind_;
  RealVector coeff_;
};

LinearFunctional make_point_functional(const Grid& g, double x0);

/// Central finite-difference functional for the n-th derivative at the grid point nearest x0.
/// order is the accuracy order of the stencil (2, 4 or 6).
LinearFunctional make_derivative_functional(const Grid& g, double x0, int n, int order = 4);

/// <T|phi> = integral of weight(x) phi(x). Known weights: "uniform", "linear", "cos<k>".
LinearFunctional make_integral_functional(const Grid& g, std::string_view weight_name);

LinearFunctional make_custom_functional(const Grid& g, RealVector coeff);

/// Central-difference weights c_j, j = -p..p, for the n-th derivative at unit spacing.
RealVector central_difference_weights(int n, int order);

/// Parses "point:<x0>", "dpoint:<x0>:<n>[:<order>]", "integral:<weight-name>" or
/// "custom:@<csv-file>" (one coefficient per grid point; a non-numeric header line is skipped).
LinearFunctional parse_functional(std::string_view spec, const Grid& g);
std::string describe(const LinearFunctional& t);

/// Scalars and the profile direction derived from <T| and C.
struct TheoryConstants {
  double tct;   // <T|C|T>
  double tc2t;  // <T|C^2|T> = ||C T||^2
  double a;     // sqrt(max_x C(x,x))
  double b;     // sqrt(tct / tc2t)
  double d;     // a * b * sqrt(|domain|)

  /// Threshold on t_1 implied by the threshold u on <T|phi>.
  double t_threshold(double u) const noexcept;
};

/// <T|C|T>. Throws GridMismatch, DegenerateFunctional.
double tct(const LinearFunctional& t, const CovOperator& c);

/// C|T>, the limit profile up to a phase.
RealVector profile(const LinearFunctional& t, const CovOperator& c);

TheoryConstants constants(const LinearFunctional& t, const CovOperator& c);

}  // namespace condensate
