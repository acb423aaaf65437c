#include "condensate/conditioner.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "condensate/error.hpp"

namespace condensate {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// KL coefficients -> weighted grid function: U c / sqrt(w).
FieldVector coefficients_to_grid(const SqrtFactor& s, const FieldVector& c) {
  const double inv_sqrt_w = 1.0 / std::sqrt(s.grid().weight());
  FieldVector out(c.size());
  out.real() = inv_sqrt_w * (s.eigenvectors() * c.real());
  out.imag() = inv_sqrt_w * (s.eigenvectors() * c.imag());
  return out;
}

FieldVector scaled_by_sqrt_lambda(const SqrtFactor& s, const FieldVector& c) {
  FieldVector out = c;
  out.array() *= s.sqrt_eigenvalues().array().cast<Complex>();
  return out;
}

}  // namespace

void validate(const ConditionSpec& spec) {
  if (!(spec.u >= 0.0) || !std::isfinite(spec.u)) {
    std::ostringstream os;
    os << "threshold u = " << spec.u << " must be a finite nonnegative number";
    throw Error(ErrorCode::NegativeU, os.str());
  }
  if (const auto* fixed = std::get_if<FixedRho>(&spec.mode)) {
    if (!(fixed->rho >= 0.0) || !std::isfinite(fixed->rho)) {
      throw Error(ErrorCode::InvalidCondition, "rho must be finite and nonnegative");
    }
    if (!(fixed->theta >= 0.0 && fixed->theta < kTwoPi)) {
      throw Error(ErrorCode::InvalidCondition, "theta must lie in [0, 2 pi)");
    }
    if (spec.scalar == ScalarField::Real && fixed->theta != 0.0) {
      throw Error(ErrorCode::InvalidCondition, "real fields are conditioned one-sided; theta must be 0");
    }
  }
}

FieldVector draw_white_coefficients(Stream& rng, std::size_t m, ScalarField scalar) {
  FieldVector t(static_cast<Eigen::Index>(m));
  if (scalar == ScalarField::Real) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = Complex{rng.normal(), 0.0};
  } else {
    const double scale = std::sqrt(0.5);
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const double re = rng.normal();
      const double im = rng.normal();
      t[i] = Complex{scale * re, scale * im};
    }
  }
  return t;
}

FieldSample field_from_coefficients(const SqrtFactor& s, const FieldVector& coeffs) {
  if (coeffs.size() != static_cast<Eigen::Index>(s.size())) {
    throw Error(ErrorCode::LengthMismatch, "coefficient count does not match the factor");
  }
  FieldSample out;
  out.white = coefficients_to_grid(s, coeffs);
  out.values = coefficients_to_grid(s, scaled_by_sqrt_lambda(s, coeffs));
  out.r2 = coeffs.squaredNorm();
  return out;
}

FieldSample sample_unconditional(const SqrtFactor& s, ScalarField scalar, Stream& rng) {
  const auto key = rng.key();
  FieldSample out = field_from_coefficients(s, draw_white_coefficients(rng, s.size(), scalar));
  out.stream_key = key;
  return out;
}

TuDraw sample_t_u(const ConditionSpec& spec, double tct, Stream& rng) {
  validate(spec);
  if (!(tct > 0.0)) throw Error(ErrorCode::DegenerateFunctional, "<T|C|T> must be positive");
  const double floor2 = spec.u * spec.u / tct;
  if (const auto* fixed = std::get_if<FixedRho>(&spec.mode)) {
    const double modulus = std::sqrt(fixed->rho + floor2);
    if (spec.scalar == ScalarField::Real) return {Complex{modulus, 0.0}, fixed->rho, 0.0};
    return {std::polar(modulus, fixed->theta), fixed->rho, fixed->theta};
  }
  if (spec.scalar == ScalarField::Complex) {
    // |t_1|^2 is Exp(1); conditioning on |t_1|^2 >= floor2 shifts it by floor2.
    const double rho = rng.exponential(1.0);
    const double theta = kTwoPi * rng.uniform();
    return {std::polar(std::sqrt(rho + floor2), theta), rho, theta};
  }
  const double t = truncated_normal_lower(rng, spec.u / std::sqrt(tct));
  return {Complex{t, 0.0}, std::max(t * t - floor2, 0.0), 0.0};
}

Conditioner::Conditioner(const SqrtFactor& s, const LinearFunctional& t) : factor_(&s), tct_(0.0) {
  if (!(t.grid() == s.grid())) throw Error(ErrorCode::GridMismatch, "functional and factor live on different grids");
  const double sqrt_w = std::sqrt(s.grid().weight());
  RealVector c = s.eigenvectors().transpose() * t.coeff();
  c.array() *= s.sqrt_eigenvalues().array() * sqrt_w;
  tct_ = c.squaredNorm();

  const RealVector variance = s.matrix().rowwise().squaredNorm() / s.grid().weight();
  const double floor = 1e-14 * variance.maxCoeff() * inner(t.coeff(), t.coeff(), s.grid());
  if (!(tct_ > floor)) {
    std::ostringstream os;
    os << "||C^{1/2} T||^2 = " << tct_ << " is not above the degeneracy floor " << floor;
    throw Error(ErrorCode::DegenerateFunctional, os.str());
  }
  v_coeff_ = c / std::sqrt(tct_);
}

FieldVector Conditioner::adapted_direction() const {
  return coefficients_to_grid(*factor_, v_coeff_.cast<Complex>());
}

FieldSample Conditioner::assemble(const TuDraw& draw, double u, const FieldVector& noise) const {
  if (noise.size() != v_coeff_.size()) throw Error(ErrorCode::LengthMismatch, "noise length does not match the factor");
  Complex along{0.0, 0.0};
  for (Eigen::Index k = 0; k < noise.size(); ++k) along += v_coeff_[k] * noise[k];
  FieldVector white = noise - along * v_coeff_.cast<Complex>();
  const double r2 = white.squaredNorm();
  white += draw.t_u * v_coeff_.cast<Complex>();

  FieldSample out;
  out.values = coefficients_to_grid(*factor_, scaled_by_sqrt_lambda(*factor_, white));
  out.white = coefficients_to_grid(*factor_, white);
  out.t_u = draw.t_u;
  out.r2 = r2;
  out.u = u;
  out.rho = draw.rho;
  out.theta = draw.theta;
  return out;
}

FieldSample Conditioner::sample(const ConditionSpec& spec, Stream& rng) const {
  validate(spec);
  const auto key = rng.key();
  const FieldVector noise = draw_white_coefficients(rng, factor_->size(), spec.scalar);
  const TuDraw draw = sample_t_u(spec, tct_, rng);
  FieldSample out = assemble(draw, spec.u, noise);
  out.stream_key = key;
  return out;
}

FieldSample sample_conditional(const SqrtFactor& s, const LinearFunctional& t, const ConditionSpec& spec,
                               Stream& rng) {
  return Conditioner(s, t).sample(spec, rng);
}

Complex t1_of(const FieldSample& sample, const LinearFunctional& t, double tct) {
  if (!(tct > 0.0)) throw Error(ErrorCode::DegenerateFunctional, "<T|C|T> must be positive");
  if (sample.values.size() != t.coeff().size()) throw Error(ErrorCode::GridMismatch, "sample and functional sizes differ");
  return t(sample.values) / std::sqrt(tct);
}

}  // namespace condensate
