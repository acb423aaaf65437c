#pragma once

#include <cstdint>
#include <variant>

#include "condensate/covariance.hpp"
#include "condensate/functional.hpp"
#include "condensate/grid.hpp"
#include "condensate/rng.hpp"

namespace condensate {

enum class ScalarField { Real, Complex };

/// Pin rho and theta so that u can be sent to infinity along one realization.
struct FixedRho {
  double rho = 1.0;
  double theta = 0.0;
};

/// Draw t_u from its exact conditional law.
struct RandomRho {};

using ConditionMode = std::variant<FixedRho, RandomRho>;

/// Conditioning event |<T|phi>|_F >= u, where |s|_F is the modulus for complex fields
/// and s itself for real ones (one-sided).
struct ConditionSpec {
  double u = 0.0;
  ConditionMode mode = FixedRho{};
  ScalarField scalar = ScalarField::Complex;
};

/// Throws NegativeU, or InvalidCondition for rho < 0, theta outside [0, 2 pi), or a
/// nonzero theta on a real field.
void validate(const ConditionSpec& spec);

struct TuDraw {
  Complex t_u;
  double rho;
  double theta;
};

/// One field realization and the coefficients that produced it.
struct FieldSample {
  FieldVector values;
  /// Preimage C^{-1/2} phi as a grid function (weighted coordinates): t_u v + g_perp.
  FieldVector white;
  Complex t_u{0.0, 0.0};
  double r2 = 0.0;  // sum_{n>=2} |t_n|^2
  double u = 0.0;
  double rho = 0.0;
  double theta = 0.0;
  std::uint64_t stream_key = 0;
};

/// M i.i.d. KL coefficients: standard normal for real fields; for complex fields real
/// and imaginary parts are independent N(0, 1/2).
FieldVector draw_white_coefficients(Stream& rng, std::size_t m, ScalarField scalar);

/// Unconditional field sum_n t_n C^{1/2} nu_n with nu_n the weighted-orthonormal KL modes.
FieldSample sample_unconditional(const SqrtFactor& s, ScalarField scalar, Stream& rng);
/// Same with caller-supplied coefficients (in eigenbasis order).
FieldSample field_from_coefficients(const SqrtFactor& s, const FieldVector& coeffs);

TuDraw sample_t_u(const ConditionSpec& spec, double tct, Stream& rng);

/// Exact sampler for the field conditioned on a large <T|phi>.
///
/// The adapted direction v = C^{1/2} T / sqrt(<T|C|T>) is held in KL coefficients.
/// Noise is drawn in the KL basis, its component along v is removed, and t_u v is put
/// back in its place, so no completion of the adapted basis is ever formed.
class Conditioner {
 public:
  Conditioner(const SqrtFactor& s, const LinearFunctional& t);

  const SqrtFactor& factor() const noexcept { return *factor_; }
  const Grid& grid() const noexcept { return factor_->grid(); }
  /// <T|C|T> evaluated through the square root, ||C^{1/2} T||^2.
  double tct() const noexcept { return tct_; }
  /// v as a grid function; unit norm in the weighted inner product.
  FieldVector adapted_direction() const;
  const RealVector& adapted_coefficients() const noexcept { return v_coeff_; }

  FieldSample sample(const ConditionSpec& spec, Stream& rng) const;

  /// Builds phi_u from a given t_u and raw noise coefficients; the v-component of the
  /// noise is discarded.
  FieldSample assemble(const TuDraw& draw, double u, const FieldVector& noise) const;

 private:
  const SqrtFactor* factor_;
  double tct_;
  RealVector v_coeff_;
};

FieldSample sample_conditional(const SqrtFactor& s, const LinearFunctional& t, const ConditionSpec& spec,
                               Stream& rng);

/// <T|phi> / sqrt(tct).
Complex t1_of(const FieldSample& sample, const LinearFunctional& t, double tct);

}  // namespace condensate
