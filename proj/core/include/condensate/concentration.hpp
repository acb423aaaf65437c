#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "condensate/conditioner.hpp"
#include "condensate/covariance.hpp"
#include "condensate/functional.hpp"

namespace condensate {

/// || phi/||phi||_2 - e^{i theta} p/||p||_2 ||_inf, with theta the sample's recorded phase.
/// Throws ZeroVector if either vector vanishes.
double normalized_sup_distance(const FieldSample& sample, const RealVector& profile, const Grid& g);
/// The same difference measured in the L2 norm.
double normalized_l2_distance(const FieldSample& sample, const RealVector& profile, const Grid& g);

/// A * ( |t_u/||phi||_2 - e^{i theta} B|^2 + r2/||phi||_2^2 )^{1/2}; dominates the
/// normalized sup distance for every sample.
double estimate0_rhs(const FieldSample& sample, const TheoryConstants& k, const Grid& g);

struct RatioBounds {
  bool applicable = false;  // |t_u| > D r
  double ratio_abs = 0.0;   // |t_u| / ||phi||_2
  double lower = 0.0;       // B / (1 + D r / |t_u|)
  double upper = 0.0;       // B / (1 - D r / |t_u|), only meaningful when applicable
  double noise_share = 0.0; // r2 / ||phi||_2^2
  double noise_bound = 0.0; // (B r / (|t_u| - D r))^2
  bool ratio_ok = true;     // lower <= ratio <= upper
  bool noise_ok = true;     // noise_share <= noise_bound
  bool limit_ok = true;     // |ratio - e^{i theta} B| <= B D r / (|t_u| - D r) and r/||phi|| <= B r / (|t_u| - D r)

  bool ok() const noexcept { return ratio_ok && noise_ok; }
};

/// Checks the two-sided ratio estimate and the noise-share estimate. Both are only
/// asserted when |t_u| > D r; otherwise applicable is false and every flag stays true.
RatioBounds ratio_bounds_check(const FieldSample& sample, const TheoryConstants& k, const Grid& g);

struct DistanceRecord {
  double u = 0.0;
  std::size_t sample_index = 0;
  double rho = 0.0;
  double theta = 0.0;
  double sup_dist = 0.0;
  double l2_dist = 0.0;
  double bound_rhs = 0.0;
  Complex ratio{0.0, 0.0};  // t_u / ||phi_u||_2
  double t_abs = 0.0;
  double r = 0.0;
  bool applicable = false;
  bool est0_ok = true;
  bool est12_ok = true;
};

/// Builds a record for a sample and evaluates its bound checks.
DistanceRecord measure(const FieldSample& sample, std::size_t index, const RealVector& profile,
                       const TheoryConstants& k, const Grid& g);

/// Re-evaluates est0_ok and est12_ok from the stored record values.
void evaluate_checks(DistanceRecord& rec, const TheoryConstants& k);

struct Quantiles {
  double q10 = 0.0;
  double q50 = 0.0;
  double q90 = 0.0;
};

/// Linear-interpolation quantiles of an unsorted sample.
Quantiles quantiles(std::vector<double> values);

/// Least-squares slope of log(y) against log(x); nullopt with fewer than two points
/// or any nonpositive value.
std::optional<double> log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

struct SweepOptions {
  std::vector<double> u_list;
  std::size_t n_mc = 200;
  ConditionMode mode = FixedRho{};
  ScalarField scalar = ScalarField::Complex;
  std::uint64_t seed = 0;
  /// 0 picks the hardware concurrency. Results do not depend on it.
  unsigned threads = 1;
  /// Test hook applied to each record before its checks are evaluated.
  std::function<void(DistanceRecord&)> record_hook;
};

struct SweepLevel {
  double u;
  Quantiles sup;
  Quantiles l2;
};

struct SweepReport {
  std::vector<SweepLevel> levels;
  std::vector<DistanceRecord> records;  // grouped by u, then sample index
  std::optional<double> slope;
  std::size_t violations_est0 = 0;
  std::size_t violations_est12 = 0;
  std::size_t applicable = 0;
  TheoryConstants constants{};
  std::string kernel;
  std::string functional;
  ScalarField scalar = ScalarField::Complex;
  ConditionMode mode = FixedRho{};
  std::uint64_t seed = 0;
};

/// Paired-seed u-sweep.
///
/// Sample i draws its noise from substream(seed, i) once and reuses it at every u, so
/// each noise realization is followed as u grows. Random-mode t_u draws come from a
/// child stream per (i, u index). Throws EmptyUList, InvalidSpec (unsorted u, n_mc = 0).
SweepReport sweep(const SqrtFactor& s, const CovOperator& c, const LinearFunctional& t, const SweepOptions& opt);

struct Prop1Result {
  std::size_t n_mc = 0;
  std::size_t non_finite = 0;
  double var_hat = 0.0;
  double tct = 0.0;
  double tolerance = 0.0;  // on |var_hat / tct - 1|
  bool pass = false;
};

/// Monte-Carlo check that <T|phi> is finite with variance <T|C|T> for unconditional
/// fields. Pass iff no non-finite values and |var_hat/tct - 1| <= 5/sqrt(n) + 0.02.
Prop1Result verify_prop1(const SqrtFactor& s, const CovOperator& c, const LinearFunctional& t, std::size_t n_mc,
                         std::uint64_t seed, ScalarField scalar = ScalarField::Complex, unsigned threads = 1);

struct Prop3Options {
  double x0 = 0.5;
  int n = 1;
  int order = 4;
  double u_big = 1e6;
  ConditionMode mode = FixedRho{1.0, 0.0};
  ScalarField scalar = ScalarField::Complex;
  std::uint64_t seed = 0;
  double profile_tol = 1e-3;
  double sample_tol = 1e-2;
};

struct Prop3Result {
  double x0 = 0.0;
  double snapped_x0 = 0.0;
  double snap_distance = 0.0;
  int n = 0;
  int order = 0;
  bool smoothness_warning = false;
  bool analytic_available = false;
  std::optional<double> profile_distance;  // discrete vs analytic, normalized, sup norm
  double sample_distance = 0.0;            // conditioned sample vs reference profile
  bool sample_vs_analytic = false;
  double u_big = 0.0;
  double profile_tol = 0.0;
  double sample_tol = 0.0;
  bool pass = false;
};

/// Conditions on a large n-th derivative at x0 and compares against the normalized
/// closed-form curve d^n C(x, y)/dy^n at y = the grid point the stencil is centred on.
/// Without a closed form (exponential kernel, n >= 1) the sample is compared to the
/// discrete profile and the smoothness warning is raised.
Prop3Result verify_prop3(const Kernel& kernel, const Grid& g, const Prop3Options& opt);

}  // namespace condensate
