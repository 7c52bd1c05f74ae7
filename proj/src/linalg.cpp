#include "ionpulse/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <cmath>

#include "ionpulse/errors.hpp"

namespace ionpulse {

FockSpace::FockSpace(int n) : n_max(n) {
  if (n_max < 1) {
    throw InvalidArgument("FockSpace needs dimension >= 2 (n_max >= 1), got n_max=" +
                          std::to_string(n_max));
  }
}

ComplexMatrix annihilation(const FockSpace& space) {
  const int d = space.dim();
  ComplexMatrix a = ComplexMatrix::Zero(d, d);
  for (int n = 1; n < d; ++n) {
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  return a;
}

ComplexMatrix creation(const FockSpace& space) { return annihilation(space).adjoint(); }

ComplexMatrix number_operator(const FockSpace& space) {
  const int d = space.dim();
  ComplexMatrix n = ComplexMatrix::Zero(d, d);
  for (int k = 0; k < d; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

ComplexMatrix position_operator(const FockSpace& space) {
  const ComplexMatrix a = annihilation(space);
  return (a + a.adjoint()) / std::sqrt(2.0);
}

ComplexMatrix momentum_operator(const FockSpace& space) {
  const ComplexMatrix a = annihilation(space);
  return Complex(0, 1) * (a.adjoint() - a) / std::sqrt(2.0);
}

ComplexMatrix identity(int dim) { return ComplexMatrix::Identity(dim, dim); }

ComplexMatrix sigma_x() {
  ComplexMatrix s(2, 2);
  s << 0, 1, 1, 0;
  return s;
}

ComplexMatrix sigma_y() {
  ComplexMatrix s(2, 2);
  s << 0, Complex(0, -1), Complex(0, 1), 0;
  return s;
}

ComplexMatrix sigma_z() {
  ComplexMatrix s(2, 2);
  s << 1, 0, 0, -1;
  return s;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

bool is_hermitian(const ComplexMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, max_abs(a));
}

double max_abs(const ComplexMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

namespace {

// Pade-13 scaling and squaring (Higham 2005), for inputs without Hermitian
// structure. Gate generators never take this path, but expm is general.
ComplexMatrix expm_pade(const ComplexMatrix& a) {
  static const double pade_coeffs[14] = {
      64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
      1187353796428800.0,  129060195264000.0,   10559470521600.0,
      670442572800.0,      33522128640.0,       1323241920.0,
      40840800.0,          960960.0,            16380.0,
      182.0,               1.0};
  const double theta13 = 5.371920351148152;
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  }
  const ComplexMatrix as = a / std::pow(2.0, squarings);
  const Eigen::Index d = a.rows();
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  const ComplexMatrix a2 = as * as;
  const ComplexMatrix a4 = a2 * a2;
  const ComplexMatrix a6 = a2 * a4;
  const ComplexMatrix u =
      as * (a6 * (pade_coeffs[13] * a6 + pade_coeffs[11] * a4 + pade_coeffs[9] * a2) +
            pade_coeffs[7] * a6 + pade_coeffs[5] * a4 + pade_coeffs[3] * a2 +
            pade_coeffs[1] * id);
  const ComplexMatrix v =
      a6 * (pade_coeffs[12] * a6 + pade_coeffs[10] * a4 + pade_coeffs[8] * a2) +
      pade_coeffs[6] * a6 + pade_coeffs[4] * a4 + pade_coeffs[2] * a2 +
      pade_coeffs[0] * id;
  ComplexMatrix r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

}  // namespace

ComplexMatrix expm(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw InvalidArgument("expm: matrix must be square");
  if (!a.allFinite()) throw NumericError("expm: non-finite entries");
  if (a.rows() == 0) return a;

  const double scale = std::max(1.0, max_abs(a));
  const double herm_defect = (a - a.adjoint()).cwiseAbs().maxCoeff();
  const double anti_defect = (a + a.adjoint()).cwiseAbs().maxCoeff();

  if (herm_defect <= 1e-12 * scale) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es((a + a.adjoint()) / 2.0);
    return es.eigenvectors() *
           es.eigenvalues().array().exp().matrix().asDiagonal() *
           es.eigenvectors().adjoint();
  }
  if (anti_defect <= 1e-12 * scale) {
    // a = iH with H Hermitian; exp(a) = V exp(i lambda) V† is exactly unitary.
    const ComplexMatrix h = (a - a.adjoint()) * Complex(0, -0.5);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    ComplexVector phases(h.rows());
    for (Eigen::Index k = 0; k < h.rows(); ++k) {
      phases(k) = std::polar(1.0, es.eigenvalues()(k));
    }
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
  }
  return expm_pade(a);
}

ComplexMatrix displacement(Complex alpha, const FockSpace& space) {
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
    throw InvalidArgument("displacement: non-finite alpha");
  }
  const ComplexMatrix a = annihilation(space);
  return expm(alpha * a.adjoint() - std::conj(alpha) * a);
}

ComplexMatrix squeezing(Complex zeta, const FockSpace& space) {
  if (!std::isfinite(zeta.real()) || !std::isfinite(zeta.imag())) {
    throw InvalidArgument("squeezing: non-finite zeta");
  }
  const ComplexMatrix a = annihilation(space);
  const ComplexMatrix a2 = a * a;
  return expm(0.5 * (std::conj(zeta) * a2 - zeta * a2.adjoint()));
}

}  // namespace ionpulse
