#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ionpulse/errors.hpp"
#include "ionpulse/linalg.hpp"

using namespace ionpulse;

namespace {

ComplexMatrix random_matrix(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  ComplexMatrix m(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) m(i, j) = Complex(normal(rng), normal(rng));
  }
  return m;
}

ComplexMatrix random_anti_hermitian(int d, double scale, std::mt19937_64& rng) {
  ComplexMatrix m = random_matrix(d, rng);
  ComplexMatrix g = (m - m.adjoint()) / 2.0;
  return g * (scale / std::max(1e-300, max_abs(g)));
}

// Plain 60-term Taylor series; independent oracle for moderate norms.
ComplexMatrix expm_taylor(const ComplexMatrix& a, int terms = 60) {
  ComplexMatrix sum = ComplexMatrix::Identity(a.rows(), a.cols());
  ComplexMatrix term = sum;
  for (int k = 1; k <= terms; ++k) {
    term = term * a / static_cast<double>(k);
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_CASE("FockSpace dimension convention") {
  CHECK(FockSpace(15).dim() == 16);
  CHECK(FockSpace(1).dim() == 2);
  CHECK_THROWS_AS(FockSpace(0), InvalidArgument);
}

TEST_CASE("annihilation operator ladder structure") {
  const FockSpace tiny(1);
  const ComplexMatrix a2 = annihilation(tiny);
  CHECK(a2(0, 1) == Complex(1.0, 0.0));
  CHECK(a2(0, 0) == Complex(0.0, 0.0));
  CHECK(a2(1, 0) == Complex(0.0, 0.0));
  CHECK(a2(1, 1) == Complex(0.0, 0.0));

  const FockSpace space(11);
  const ComplexMatrix a = annihilation(space);
  for (int n = 1; n < space.dim(); ++n) {
    CHECK(std::abs(a(n - 1, n) - std::sqrt(static_cast<double>(n))) < 1e-15);
  }

  // a†a|n> = n|n> exactly at double precision
  const ComplexMatrix num = a.adjoint() * a;
  CHECK(max_abs_diff(num, number_operator(space)) < 1e-12);

  // [a, a†] = I away from the truncation edge
  const ComplexMatrix comm = a * a.adjoint() - a.adjoint() * a;
  for (int n = 0; n < space.dim() - 1; ++n) {
    CHECK(std::abs(comm(n, n) - 1.0) < 1e-12);
  }
}

TEST_CASE("kron identities") {
  CHECK(max_abs_diff(kron(identity(2), identity(3)), identity(6)) == 0.0);

  std::mt19937_64 rng(11);
  const ComplexMatrix a = random_matrix(2, rng), c = random_matrix(2, rng);
  const ComplexMatrix b = random_matrix(3, rng), d = random_matrix(3, rng);
  CHECK(max_abs_diff(kron(a, b) * kron(c, d), kron(a * c, b * d)) < 1e-12);
  CHECK(max_abs_diff(kron(kron(a, b), c), kron(a, kron(b, c))) < 1e-12);

  const ComplexMatrix sx_a = kron(sigma_x(), annihilation(FockSpace(4)));
  for (Eigen::Index i = 0; i < sx_a.rows(); ++i) CHECK(sx_a(i, i) == Complex(0, 0));
}

TEST_CASE("expm basics") {
  CHECK(max_abs_diff(expm(ComplexMatrix::Zero(4, 4)), identity(4)) == 0.0);

  const double theta = 0.7;
  ComplexMatrix gen = Complex(0, theta) * sigma_z();
  ComplexMatrix u = expm(gen);
  CHECK(std::abs(u(0, 0) - std::polar(1.0, theta)) < 1e-14);
  CHECK(std::abs(u(1, 1) - std::polar(1.0, -theta)) < 1e-14);
  CHECK(std::abs(u(0, 1)) < 1e-14);

  ComplexMatrix bad(2, 2);
  bad << 1, 2, 3, std::nan("");
  CHECK_THROWS_AS(expm(bad), NumericError);
  CHECK_THROWS_AS(expm(ComplexMatrix::Zero(2, 3)), InvalidArgument);
}

TEST_CASE("expm matches 60-term Taylor oracle on random anti-Hermitian input") {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 5; ++rep) {
    const ComplexMatrix g = random_anti_hermitian(8, 1.5, rng);
    CHECK(max_abs_diff(expm(g), expm_taylor(g)) < 1e-9);
  }
}

TEST_CASE("expm of anti-Hermitian generators is unitary") {
  std::mt19937_64 rng(31);
  for (const auto& [d, scale] : {std::pair{16, 5.0}, std::pair{64, 50.0}}) {
    const ComplexMatrix g = random_anti_hermitian(d, scale, rng);
    const ComplexMatrix u = expm(g);
    CHECK(max_abs_diff(u.adjoint() * u, identity(d)) < 1e-9);
  }
}

TEST_CASE("expm Pade path handles generic matrices") {
  std::mt19937_64 rng(47);
  const ComplexMatrix a = random_matrix(6, rng) * 0.8;
  CHECK(max_abs_diff(expm(a), expm_taylor(a)) < 1e-9);
  // exp(A)exp(-A) = I for commuting pair
  CHECK(max_abs_diff(expm(a) * expm(-a), identity(6)) < 1e-8);
}

TEST_CASE("displacement operator") {
  const FockSpace space(29);
  CHECK(max_abs_diff(displacement(0.0, space), identity(space.dim())) == 0.0);

  // |<0|D(1)|0>|^2 = e^{-1}
  const ComplexMatrix d1 = displacement(1.0, space);
  CHECK(std::norm(d1(0, 0)) == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));

  const Complex alpha(0.7, -0.3);
  CHECK(max_abs_diff(displacement(alpha, space) * displacement(-alpha, space),
                     identity(space.dim())) < 1e-8);

  CHECK_THROWS_AS(displacement(Complex(std::nan(""), 0), space), InvalidArgument);
}

TEST_CASE("squeezing operator") {
  const FockSpace space(29);
  CHECK(max_abs_diff(squeezing(0.0, space), identity(space.dim())) == 0.0);

  // Var_x(S(0.5)|0>) = e^{-1}/2 in the x = (a+a†)/sqrt(2) convention
  const double r = 0.5;
  ComplexVector vac = ComplexVector::Zero(space.dim());
  vac(0) = 1.0;
  const ComplexVector sq = squeezing(r, space) * vac;
  const ComplexMatrix x = position_operator(space);
  const double mean_x = std::real((sq.adjoint() * (x * sq))(0));
  const double mean_x2 = std::real((sq.adjoint() * (x * x * sq))(0));
  const double var_x = mean_x2 - mean_x * mean_x;
  CHECK(var_x == doctest::Approx(std::exp(-2.0 * r) / 2.0).epsilon(1e-4));

  // r = 0.5 is about 4.34 dB of squeezing
  CHECK(10.0 * std::log10(std::exp(2.0 * r)) == doctest::Approx(4.34).epsilon(1e-2));

  // p quadrature anti-squeezed
  const ComplexMatrix p = momentum_operator(space);
  const double var_p = std::real((sq.adjoint() * (p * p * sq))(0));
  CHECK(var_p == doctest::Approx(std::exp(2.0 * r) / 2.0).epsilon(1e-4));

  CHECK_THROWS_AS(squeezing(Complex(0, INFINITY), space), InvalidArgument);
}

TEST_CASE("quadrature operators are Hermitian with Var_vac = 1/2") {
  const FockSpace space(19);
  CHECK(is_hermitian(position_operator(space)));
  CHECK(is_hermitian(momentum_operator(space)));
  CHECK(is_hermitian(number_operator(space)));

  ComplexVector vac = ComplexVector::Zero(space.dim());
  vac(0) = 1.0;
  const ComplexMatrix x = position_operator(space);
  CHECK(std::real((vac.adjoint() * (x * x * vac))(0)) == doctest::Approx(0.5).epsilon(1e-12));
}
