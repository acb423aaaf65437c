#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "condensate/grid.hpp"

namespace condensate {

/// sigma2 * exp(-(x-y)^2 / (2 ell^2))
struct SqExpKernel {
  double variance;
  double length_scale;
};

/// sigma2 * exp(-|x-y| / ell)
struct ExponentialKernel {
  double variance;
  double length_scale;
};

/// One term lambda * e_k(x) e_k(y) of a finite-rank cosine kernel.
struct CosineMode {
  double eigenvalue;
  int index;
};

/// sum_k lambda_k e_k(x) e_k(y), with e_0 = 1/sqrt(L) and e_k = sqrt(2/L) cos(k pi (x-a)/L).
struct RankKKernel {
  std::vector<CosineMode> modes;
};

using Kernel = std::variant<SqExpKernel, ExponentialKernel, RankKKernel>;

/// Throws InvalidKernelParams. Mode indices are checked against the grid size.
void validate(const Kernel& k, const Grid& g);

double evaluate(const Kernel& k, double x, double y, const Grid& g);

/// d^n C(x, y) / dy^n in closed form, when the kernel is smooth enough for one to exist.
/// Returns nullopt for the exponential kernel with n >= 1.
std::optional<double> y_derivative(const Kernel& k, double x, double y, int n, const Grid& g);

/// True when the kernel is not differentiable on the diagonal (exponential).
bool is_rough(const Kernel& k) noexcept;

/// Parses "sqexp:<variance>:<ell>", "exp:<variance>:<ell>" or "rankk:<l0@k0,l1@k1,...>".
Kernel parse_kernel(std::string_view spec);
std::string describe(const Kernel& k);

/// Discretized covariance operator in value-vector coordinates.
///
/// kernel_matrix()(i, j) = C(x_i, x_j) and matrix() = w * kernel_matrix(), so that
/// matrix() * phi is the midpoint-rule approximation of (C phi)(x_i). Sampled fields
/// then have pointwise covariance kernel_matrix(), while KL modes are orthonormal in
/// the weighted inner product. Every sqrt(w) conversion in the library happens in
/// this header's implementation or in SqrtFactor.
class CovOperator {
 public:
  /// Wraps an explicit kernel matrix; used by assemble() and by tests that need
  /// operators no kernel produces.
  CovOperator(Grid g, Eigen::MatrixXd kernel_matrix);

  const Grid& grid() const noexcept { return grid_; }
  const Eigen::MatrixXd& kernel_matrix() const noexcept { return kernel_; }
  const Eigen::MatrixXd& matrix() const noexcept { return op_; }
  double trace() const noexcept { return trace_; }
  std::size_t size() const noexcept { return grid_.size(); }

  const std::optional<Kernel>& kernel() const noexcept { return source_; }

 private:
  friend CovOperator assemble(const Kernel& k, const Grid& g);

  Grid grid_;
  Eigen::MatrixXd kernel_;
  Eigen::MatrixXd op_;
  double trace_;
  std::optional<Kernel> source_;
};

CovOperator assemble(const Kernel& k, const Grid& g);

/// C(x_i, x_i) for every grid point.
RealVector point_variance(const CovOperator& c);
/// A^2 = max_i C(x_i, x_i).
double point_variance_max(const CovOperator& c);

FieldVector apply(const CovOperator& c, const FieldVector& phi);
RealVector apply(const CovOperator& c, const RealVector& phi);

/// Spectral square root of a covariance operator.
///
/// matrix() = V diag(sqrt(lambda)) V^T where V holds plain-orthonormal eigenvectors
/// (columns, descending eigenvalue). Each eigenvector is sign-normalized so its first
/// non-negligible entry is positive, which keeps the leading modes comparable across
/// grid refinements.
class SqrtFactor {
 public:
  const Grid& grid() const noexcept { return grid_; }
  const Eigen::MatrixXd& matrix() const noexcept { return s_; }
  const Eigen::MatrixXd& eigenvectors() const noexcept { return v_; }
  const RealVector& eigenvalues() const noexcept { return lambda_; }
  const RealVector& sqrt_eigenvalues() const noexcept { return sqrt_lambda_; }
  double clip_tol() const noexcept { return clip_tol_; }
  std::size_t n_clipped() const noexcept { return n_clipped_; }
  std::size_t size() const noexcept { return grid_.size(); }

  /// S phi, computed through the eigenbasis.
  FieldVector apply(const FieldVector& phi) const;
  RealVector apply(const RealVector& phi) const;

  /// ||S S - C||_F / ||C||_F against the operator this factor was built from.
  double relative_residual(const CovOperator& c) const;

 private:
  friend SqrtFactor sqrt_factor(const CovOperator& c, double clip_tol);
  explicit SqrtFactor(Grid g) : grid_(std::move(g)) {}

  Grid grid_;
  Eigen::MatrixXd s_;
  Eigen::MatrixXd v_;
  RealVector lambda_;
  RealVector sqrt_lambda_;
  double clip_tol_ = 0.0;
  std::size_t n_clipped_ = 0;
};

/// Dense symmetric eigendecomposition. Eigenvalues in [-clip_tol * lambda_max, 0) are
/// zeroed and counted; anything more negative throws NotPositive.
SqrtFactor sqrt_factor(const CovOperator& c, double clip_tol = 1e-12);

}  // namespace condensate
