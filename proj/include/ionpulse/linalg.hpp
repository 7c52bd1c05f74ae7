#pragma once

#include <Eigen/Dense>
#include <complex>

namespace ionpulse {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

/// Truncated Fock space. n_max is the highest representable Fock index, so
/// the oscillator dimension is n_max + 1 (n_max = 15 gives dimension 16).
struct FockSpace {
  explicit FockSpace(int n_max);
  int n_max;
  int dim() const { return n_max + 1; }
};

// --------------------------------------------------------------------------
// Operator constructors. Qubit factor is always the LEFT kron factor
// project-wide: joint dimension = 2 * space.dim().
// --------------------------------------------------------------------------

/// a with a|n> = sqrt(n)|n-1>.
ComplexMatrix annihilation(const FockSpace& space);
ComplexMatrix creation(const FockSpace& space);
ComplexMatrix number_operator(const FockSpace& space);

/// x = (a + a†)/sqrt(2), p = i(a† - a)/sqrt(2); Var_vac = 1/2.
ComplexMatrix position_operator(const FockSpace& space);
ComplexMatrix momentum_operator(const FockSpace& space);

ComplexMatrix identity(int dim);
ComplexMatrix sigma_x();
ComplexMatrix sigma_y();
ComplexMatrix sigma_z();

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Matrix exponential. Hermitian and anti-Hermitian inputs go through an
/// eigendecomposition (anti-Hermitian generators then yield exactly unitary
/// results); everything else through Pade scaling-and-squaring.
ComplexMatrix expm(const ComplexMatrix& a);

/// D(alpha) = exp(alpha a† - alpha* a) on the truncated space.
ComplexMatrix displacement(Complex alpha, const FockSpace& space);

/// S(zeta) = exp[(zeta* a² - zeta a†²)/2]; zeta = r > 0 squeezes x.
ComplexMatrix squeezing(Complex zeta, const FockSpace& space);

bool is_hermitian(const ComplexMatrix& a, double tol = 1e-12);
double max_abs(const ComplexMatrix& a);
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);

}  // namespace ionpulse
