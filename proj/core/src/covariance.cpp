#include "condensate/covariance.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "condensate/error.hpp"

namespace condensate {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double cosine_mode(int k, double x, const Grid& g) {
  const double len = g.length();
  if (k == 0) return 1.0 / std::sqrt(len);
  return std::sqrt(2.0 / len) * std::cos(k * std::numbers::pi * (x - g.a()) / len);
}

// n-th derivative of e_k.
double cosine_mode_derivative(int k, double x, int n, const Grid& g) {
  if (n == 0) return cosine_mode(k, x, g);
  if (k == 0) return 0.0;
  const double len = g.length();
  const double kappa = k * std::numbers::pi / len;
  return std::sqrt(2.0 / len) * std::pow(kappa, n) *
         std::cos(kappa * (x - g.a()) + n * std::numbers::pi / 2.0);
}

// Probabilists' Hermite polynomial He_n(s).
double hermite_he(int n, double s) {
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = s;
  for (int k = 1; k < n; ++k) {
    const double next = s * cur - k * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw Error(ErrorCode::InvalidSpec, "cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return value;
}

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) {
    throw Error(ErrorCode::InvalidSpec, "cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

void check_stationary(double variance, double ell, const char* name) {
  if (!(variance > 0.0) || !(ell > 0.0) || !std::isfinite(variance) || !std::isfinite(ell)) {
    std::ostringstream os;
    os << name << " kernel needs variance > 0 and length scale > 0 (got " << variance << ", " << ell << ")";
    throw Error(ErrorCode::InvalidKernelParams, os.str());
  }
}

}  // namespace

void validate(const Kernel& k, const Grid& g) {
  std::visit(Overloaded{
                 [](const SqExpKernel& s) { check_stationary(s.variance, s.length_scale, "sqexp"); },
                 [](const ExponentialKernel& e) { check_stationary(e.variance, e.length_scale, "exp"); },
                 [&g](const RankKKernel& r) {
                   if (r.modes.empty()) throw Error(ErrorCode::InvalidKernelParams, "rankk kernel has no modes");
                   std::set<int> seen;
                   for (const auto& mode : r.modes) {
                     if (!(mode.eigenvalue > 0.0) || !std::isfinite(mode.eigenvalue)) {
                       throw Error(ErrorCode::InvalidKernelParams, "rankk eigenvalues must be positive");
                     }
                     if (mode.index < 0 || static_cast<std::size_t>(mode.index) >= g.size()) {
                       throw Error(ErrorCode::InvalidKernelParams,
                                   "rankk mode index " + std::to_string(mode.index) + " outside [0, M)");
                     }
                     if (!seen.insert(mode.index).second) {
                       throw Error(ErrorCode::InvalidKernelParams,
                                   "rankk mode index " + std::to_string(mode.index) + " repeated");
                     }
                   }
                 },
             },
             k);
}

double evaluate(const Kernel& k, double x, double y, const Grid& g) {
  return std::visit(Overloaded{
                        [&](const SqExpKernel& s) {
                          const double d = (x - y) / s.length_scale;
                          return s.variance * std::exp(-0.5 * d * d);
                        },
                        [&](const ExponentialKernel& e) {
                          return e.variance * std::exp(-std::abs(x - y) / e.length_scale);
                        },
                        [&](const RankKKernel& r) {
                          double acc = 0.0;
                          for (const auto& mode : r.modes) {
                            acc += mode.eigenvalue * cosine_mode(mode.index, x, g) * cosine_mode(mode.index, y, g);
                          }
                          return acc;
                        },
                    },
                    k);
}

std::optional<double> y_derivative(const Kernel& k, double x, double y, int n, const Grid& g) {
  if (n < 0) return std::nullopt;
  if (n == 0) return evaluate(k, x, y, g);
  return std::visit(Overloaded{
                        [&](const SqExpKernel& s) -> std::optional<double> {
                          // d/dy = -(1/ell) d/ds with s = (x-y)/ell, and d^n/ds^n e^{-s^2/2} = (-1)^n He_n(s) e^{-s^2/2}.
                          const double t = (x - y) / s.length_scale;
                          return s.variance * std::pow(s.length_scale, -n) * hermite_he(n, t) * std::exp(-0.5 * t * t);
                        },
                        [](const ExponentialKernel&) -> std::optional<double> { return std::nullopt; },
                        [&](const RankKKernel& r) -> std::optional<double> {
                          double acc = 0.0;
                          for (const auto& mode : r.modes) {
                            acc += mode.eigenvalue * cosine_mode(mode.index, x, g) *
                                   cosine_mode_derivative(mode.index, y, n, g);
                          }
                          return acc;
                        },
                    },
                    k);
}

bool is_rough(const Kernel& k) noexcept { return std::holds_alternative<ExponentialKernel>(k); }

Kernel parse_kernel(std::string_view spec) {
  const auto colon = spec.find(':');
  const auto name = spec.substr(0, colon);
  const auto rest = colon == std::string_view::npos ? std::string_view{} : spec.substr(colon + 1);
  if (name == "sqexp" || name == "exp") {
    const auto parts = split(rest, ':');
    if (parts.size() != 2) {
      throw Error(ErrorCode::InvalidSpec, "expected " + std::string(name) + ":<variance>:<ell>, got '" + std::string(spec) + "'");
    }
    const double variance = parse_double(parts[0], "variance");
    const double ell = parse_double(parts[1], "length scale");
    if (name == "sqexp") return SqExpKernel{variance, ell};
    return ExponentialKernel{variance, ell};
  }
  if (name == "rankk") {
    if (rest.empty()) throw Error(ErrorCode::InvalidSpec, "rankk kernel needs at least one <lambda>@<k> term");
    RankKKernel r;
    for (auto term : split(rest, ',')) {
      const auto at = term.find('@');
      if (at == std::string_view::npos) {
        throw Error(ErrorCode::InvalidSpec, "rankk term '" + std::string(term) + "' is not <lambda>@<k>");
      }
      r.modes.push_back({parse_double(term.substr(0, at), "eigenvalue"), parse_int(term.substr(at + 1), "mode index")});
    }
    return r;
  }
  throw Error(ErrorCode::InvalidSpec, "unknown kernel '" + std::string(name) + "' (expected sqexp, exp or rankk)");
}

std::string describe(const Kernel& k) {
  std::ostringstream os;
  os.precision(17);
  std::visit(Overloaded{
                 [&](const SqExpKernel& s) { os << "sqexp:" << s.variance << ':' << s.length_scale; },
                 [&](const ExponentialKernel& e) { os << "exp:" << e.variance << ':' << e.length_scale; },
                 [&](const RankKKernel& r) {
                   os << "rankk:";
                   for (std::size_t i = 0; i < r.modes.size(); ++i) {
                     if (i) os << ',';
                     os << r.modes[i].eigenvalue << '@' << r.modes[i].index;
                   }
                 },
             },
             k);
  return os.str();
}

CovOperator::CovOperator(Grid g, Eigen::MatrixXd kernel_matrix)
    : grid_(std::move(g)), kernel_(std::move(kernel_matrix)), trace_(0.0) {
  const auto m = static_cast<Eigen::Index>(grid_.size());
  if (kernel_.rows() != m || kernel_.cols() != m) {
    throw Error(ErrorCode::LengthMismatch, "kernel matrix shape does not match the grid");
  }
  op_ = grid_.weight() * kernel_;
  trace_ = grid_.weight() * kernel_.diagonal().sum();
}

CovOperator assemble(const Kernel& k, const Grid& g) {
  validate(k, g);
  const auto m = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXd kmat(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double xi = g.point(static_cast<std::size_t>(i));
    kmat(i, i) = evaluate(k, xi, xi, g);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double value = evaluate(k, xi, g.point(static_cast<std::size_t>(j)), g);
      kmat(i, j) = value;
      kmat(j, i) = value;
    }
  }
  CovOperator c(g, std::move(kmat));
  c.source_ = k;
  return c;
}

RealVector point_variance(const CovOperator& c) { return c.kernel_matrix().diagonal(); }

double point_variance_max(const CovOperator& c) { return c.kernel_matrix().diagonal().maxCoeff(); }

FieldVector apply(const CovOperator& c, const FieldVector& phi) {
  if (phi.size() != static_cast<Eigen::Index>(c.size())) {
    throw Error(ErrorCode::LengthMismatch, "vector length does not match the operator");
  }
  FieldVector out(phi.size());
  out.real() = c.matrix() * phi.real();
  out.imag() = c.matrix() * phi.imag();
  return out;
}

RealVector apply(const CovOperator& c, const RealVector& phi) {
  if (phi.size() != static_cast<Eigen::Index>(c.size())) {
    throw Error(ErrorCode::LengthMismatch, "vector length does not match the operator");
  }
  return c.matrix() * phi;
}

FieldVector SqrtFactor::apply(const FieldVector& phi) const {
  if (phi.size() != static_cast<Eigen::Index>(size())) {
    throw Error(ErrorCode::LengthMismatch, "vector length does not match the factor");
  }
  FieldVector out(phi.size());
  out.real() = apply(RealVector(phi.real()));
  out.imag() = apply(RealVector(phi.imag()));
  return out;
}

RealVector SqrtFactor::apply(const RealVector& phi) const {
  if (phi.size() != static_cast<Eigen::Index>(size())) {
    throw Error(ErrorCode::LengthMismatch, "vector length does not match the factor");
  }
  RealVector coeffs = v_.transpose() * phi;
  coeffs.array() *= sqrt_lambda_.array();
  return v_ * coeffs;
}

double SqrtFactor::relative_residual(const CovOperator& c) const {
  return (s_ * s_ - c.matrix()).norm() / c.matrix().norm();
}

SqrtFactor sqrt_factor(const CovOperator& c, double clip_tol) {
  if (!(clip_tol >= 0.0)) throw Error(ErrorCode::InvalidSpec, "clip_tol must be nonnegative");
  const auto& op = c.matrix();
  const double asym = (op - op.transpose()).norm();
  if (asym > 1e-12 * op.norm()) throw Error(ErrorCode::NotPositive, "covariance operator is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(op);
  if (solver.info() != Eigen::Success) throw Error(ErrorCode::NotPositive, "eigendecomposition failed");

  const auto m = op.rows();
  SqrtFactor f(c.grid());
  f.clip_tol_ = clip_tol;
  f.lambda_.resize(m);
  f.sqrt_lambda_.resize(m);
  f.v_.resize(m, m);

  // Eigen sorts ascending; store descending.
  const double lambda_max = std::max(solver.eigenvalues()[m - 1], 0.0);
  for (Eigen::Index k = 0; k < m; ++k) {
    const Eigen::Index src = m - 1 - k;
    double lambda = solver.eigenvalues()[src];
    if (lambda < 0.0) {
      if (lambda < -clip_tol * lambda_max) {
        std::ostringstream os;
        os << "eigenvalue " << lambda << " below the clip window (lambda_max " << lambda_max << ")";
        throw Error(ErrorCode::NotPositive, os.str());
      }
      lambda = 0.0;
      ++f.n_clipped_;
    }
    f.lambda_[k] = lambda;
    f.sqrt_lambda_[k] = std::sqrt(lambda);

    RealVector col = solver.eigenvectors().col(src);
    const double cutoff = 1e-3 * col.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (std::abs(col[i]) > cutoff) {
        if (col[i] < 0.0) col = -col;
        break;
      }
    }
    f.v_.col(k) = col;
  }
  f.s_ = f.v_ * f.sqrt_lambda_.asDiagonal() * f.v_.transpose();
  // Symmetrize away the roundoff of the triple product.
  f.s_ = 0.5 * (f.s_ + f.s_.transpose()).eval();
  return f;
}

}  // namespace condensate
