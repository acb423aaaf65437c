#include <doctest.h>

#include <cmath>
#include <numbers>

#include "condensate/covariance.hpp"
#include "condensate/error.hpp"
#include "condensate/rng.hpp"

using namespace condensate;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an exception");
  return ErrorCode::Io;
}

// e_k sampled on the grid, written out independently of the library.
RealVector cosine_on_grid(const Grid& g, int k) {
  RealVector v(static_cast<Eigen::Index>(g.size()));
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double x = g.point(i);
    v[static_cast<Eigen::Index>(i)] =
        k == 0 ? 1.0 / std::sqrt(g.length())
               : std::sqrt(2.0 / g.length()) * std::cos(k * std::numbers::pi * (x - g.a()) / g.length());
  }
  return v;
}

FieldVector random_field(Stream& rng, std::size_t m) {
  FieldVector v(static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = Complex{rng.normal(), rng.normal()};
  return v;
}

}  // namespace

TEST_CASE("assemble evaluates the kernel on the grid") {
  const Grid g(0.0, 1.0, 64);
  const CovOperator c = assemble(SqExpKernel{1.0, 0.2}, g);
  for (Eigen::Index i = 0; i < 64; ++i) {
    CHECK(c.kernel_matrix()(i, i) == 1.0);
    CHECK(c.matrix()(i, i) == doctest::Approx(1.0 / 64.0));
  }
  CHECK(c.trace() == doctest::Approx(1.0));

  const CovOperator e = assemble(ExponentialKernel{2.0, 0.5}, g);
  for (Eigen::Index i = 0; i < 64; i += 7) {
    for (Eigen::Index j = 0; j < 64; j += 5) {
      const double expected = 2.0 * std::exp(-std::abs(g.point(i) - g.point(j)) / 0.5);
      CHECK(e.kernel_matrix()(i, j) == doctest::Approx(expected).epsilon(1e-15));
      CHECK(e.kernel_matrix()(i, j) == e.kernel_matrix()(j, i));
    }
  }
}

TEST_CASE("assemble rejects invalid kernels") {
  const Grid g(0.0, 1.0, 16);
  CHECK(code_of([&] { assemble(SqExpKernel{-1.0, 0.2}, g); }) == ErrorCode::InvalidKernelParams);
  CHECK(code_of([&] { assemble(ExponentialKernel{1.0, 0.0}, g); }) == ErrorCode::InvalidKernelParams);
  CHECK(code_of([&] { assemble(RankKKernel{{{1.0, 16}}}, g); }) == ErrorCode::InvalidKernelParams);
  CHECK(code_of([&] { assemble(RankKKernel{{{1.0, 2}, {2.0, 2}}}, g); }) == ErrorCode::InvalidKernelParams);
  CHECK(code_of([&] { assemble(RankKKernel{{{0.0, 2}}}, g); }) == ErrorCode::InvalidKernelParams);
}

TEST_CASE("rank-one cosine kernel has the prescribed spectrum") {
  const Grid g(0.0, 1.0, 64);
  // Oracle: direct summation gives w * sum e_1(x_i)^2 = 1, so e_1 is an eigenvector with eigenvalue 4.
  const RealVector e1 = cosine_on_grid(g, 1);
  CHECK(std::abs(g.weight() * e1.squaredNorm() - 1.0) < 1e-12);

  const CovOperator c = assemble(RankKKernel{{{4.0, 1}}}, g);
  const SqrtFactor s = sqrt_factor(c);
  CHECK(std::abs(s.eigenvalues()[0] - 4.0) < 1e-10);
  for (Eigen::Index k = 1; k < 64; ++k) CHECK(s.eigenvalues()[k] < 1e-10);
  CHECK(std::abs(s.sqrt_eigenvalues()[0] - 2.0) < 1e-8);

  const RealVector image = condensate::apply(c, e1);
  CHECK((image - 4.0 * e1).cwiseAbs().maxCoeff() < 1e-10);
  // S acts as 2 on the cosine mode.
  CHECK((s.apply(e1) - 2.0 * e1).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("two-mode ground truth") {
  const Grid g(0.0, 1.0, 128);
  const CovOperator c = assemble(RankKKernel{{{4.0, 1}, {1.0, 3}}}, g);
  const SqrtFactor s = sqrt_factor(c);
  CHECK(std::abs(s.eigenvalues()[0] - 4.0) < 1e-8);
  CHECK(std::abs(s.eigenvalues()[1] - 1.0) < 1e-8);
  for (Eigen::Index k = 2; k < 128; ++k) CHECK(std::abs(s.eigenvalues()[k]) < 1e-10);
}

TEST_CASE("sqrt_factor reproduces the operator") {
  const Grid g(0.0, 1.0, 128);
  const CovOperator c = assemble(SqExpKernel{1.0, 0.2}, g);
  const SqrtFactor s = sqrt_factor(c, 1e-12);
  CHECK(s.relative_residual(c) <= 1e-10);
  CHECK((s.matrix() - s.matrix().transpose()).norm() <= 1e-12 * s.matrix().norm());
  CHECK(s.eigenvalues().minCoeff() >= 0.0);
  for (Eigen::Index k = 1; k < 128; ++k) CHECK(s.eigenvalues()[k] <= s.eigenvalues()[k - 1]);
}

TEST_CASE("sqrt_factor clips roundoff negativity and rejects real negativity") {
  const Grid g(0.0, 1.0, 8);
  const double w = g.weight();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(8, 8);
  for (Eigen::Index i = 0; i < 8; ++i) k(i, i) = (1.0 - 0.1 * static_cast<double>(i)) / w;

  k(7, 7) = -0.1 / w;
  CHECK(code_of([&] { sqrt_factor(CovOperator(g, k)); }) == ErrorCode::NotPositive);

  k(7, 7) = -1e-14 / w;
  const SqrtFactor s = sqrt_factor(CovOperator(g, k), 1e-12);
  CHECK(s.n_clipped() == 1);
  CHECK(s.eigenvalues()[7] == 0.0);

  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(8, 8);
  asym(0, 1) = 0.5;
  CHECK(code_of([&] { sqrt_factor(CovOperator(g, asym)); }) == ErrorCode::NotPositive);
}

TEST_CASE("point variance") {
  const Grid g(0.0, 1.0, 64);
  CHECK(point_variance_max(assemble(SqExpKernel{1.0, 0.3}, g)) == 1.0);
  CHECK(point_variance_max(assemble(ExponentialKernel{3.0, 0.3}, g)) == 3.0);

  double oracle = 0.0;
  for (std::size_t i = 0; i < 64; ++i) {
    const double cx = std::cos(std::numbers::pi * g.point(i));
    oracle = std::max(oracle, 1.0 + 2.0 * cx * cx);
  }
  const CovOperator c = assemble(RankKKernel{{{1.0, 0}, {1.0, 1}}}, g);
  CHECK(point_variance_max(c) == doctest::Approx(oracle).epsilon(1e-13));
  CHECK(point_variance(c).size() == 64);
}

TEST_CASE("apply is linear, self-adjoint and positive") {
  const Grid g(0.0, 1.0, 96);
  Stream rng = Stream::substream(21, 0);
  for (const Kernel& kernel : {Kernel{SqExpKernel{1.0, 0.2}}, Kernel{ExponentialKernel{2.0, 0.5}},
                               Kernel{RankKKernel{{{4.0, 1}, {0.5, 5}}}}}) {
    const CovOperator c = assemble(kernel, g);
    const SqrtFactor s = sqrt_factor(c);
    CHECK(condensate::apply(c, FieldVector(FieldVector::Zero(96))).norm() == 0.0);
    for (int trial = 0; trial < 10; ++trial) {
      const FieldVector phi = random_field(rng, 96);
      const FieldVector psi = random_field(rng, 96);
      const Complex alpha{rng.normal(), rng.normal()};
      const FieldVector lhs = condensate::apply(c, FieldVector(alpha * phi + psi));
      const FieldVector rhs = alpha * condensate::apply(c, phi) + condensate::apply(c, psi);
      CHECK((lhs - rhs).norm() <= 1e-12 * std::max(1.0, rhs.norm()));

      const Complex a = inner(psi, condensate::apply(c, phi), g);
      const Complex b = inner(phi, condensate::apply(c, psi), g);
      CHECK(std::abs(a - std::conj(b)) <= 1e-10 * std::max(std::abs(a), 1e-300) + 1e-14);

      const double energy = inner(phi, condensate::apply(c, phi), g).real();
      CHECK(energy >= -1e-10 * inner(phi, phi, g).real());

      const FieldVector twice = s.apply(s.apply(phi));
      const FieldVector once = condensate::apply(c, phi);
      CHECK((twice - once).norm() <= 1e-9 * once.norm() + 1e-14);
    }
  }
}

TEST_CASE("kernel spec strings") {
  const Kernel a = parse_kernel("sqexp:1:0.2");
  REQUIRE(std::holds_alternative<SqExpKernel>(a));
  CHECK(std::get<SqExpKernel>(a).length_scale == 0.2);
  const Kernel b = parse_kernel("exp:3:0.5");
  REQUIRE(std::holds_alternative<ExponentialKernel>(b));
  CHECK(std::get<ExponentialKernel>(b).variance == 3.0);
  const Kernel r = parse_kernel("rankk:4@1,1@3");
  REQUIRE(std::holds_alternative<RankKKernel>(r));
  CHECK(std::get<RankKKernel>(r).modes.size() == 2);
  CHECK(std::get<RankKKernel>(r).modes[1].index == 3);
  CHECK(describe(r) == "rankk:4@1,1@3");
  CHECK(describe(a) == "sqexp:1:0.20000000000000001");

  CHECK(code_of([] { parse_kernel("matern:1:2"); }) == ErrorCode::InvalidSpec);
  CHECK(code_of([] { parse_kernel("sqexp:1"); }) == ErrorCode::InvalidSpec);
  CHECK(code_of([] { parse_kernel("rankk:4"); }) == ErrorCode::InvalidSpec);
  CHECK(code_of([] { parse_kernel("exp:x:1"); }) == ErrorCode::InvalidSpec);
}

TEST_CASE("closed-form kernel derivatives match finite differences") {
  const Grid g(0.0, 1.0, 16);
  const double h = 1e-4;
  for (const Kernel& kernel : {Kernel{SqExpKernel{1.3, 0.3}}, Kernel{RankKKernel{{{2.0, 1}, {1.0, 2}}}}}) {
    for (double x : {0.1, 0.45, 0.8}) {
      const double y = 0.52;
      const double d1 = (evaluate(kernel, x, y + h, g) - evaluate(kernel, x, y - h, g)) / (2 * h);
      const double d2 =
          (evaluate(kernel, x, y + h, g) - 2 * evaluate(kernel, x, y, g) + evaluate(kernel, x, y - h, g)) / (h * h);
      CHECK(*y_derivative(kernel, x, y, 1, g) == doctest::Approx(d1).epsilon(1e-6));
      CHECK(*y_derivative(kernel, x, y, 2, g) == doctest::Approx(d2).epsilon(1e-4));
    }
  }
  CHECK_FALSE(y_derivative(ExponentialKernel{1.0, 0.5}, 0.1, 0.5, 1, g).has_value());
  CHECK(y_derivative(ExponentialKernel{1.0, 0.5}, 0.1, 0.5, 0, g).has_value());
}
