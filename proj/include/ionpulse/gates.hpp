#pragma once

#include <map>
#include <string>

#include "ionpulse/linalg.hpp"

namespace ionpulse {

/// Gate type tag plus canonicalized continuous parameters. Complex parameters
/// are always stored as ordered (real, imaginary) pairs under _re/_im keys;
/// the map is keyed lexicographically, which is also the canonical order.
struct GateSpec {
  std::string type;
  std::map<std::string, double> params;
};

/// Builders for the three built-in primitives. All reject non-finite
/// parameters at construction; CR's angle is canonicalized into [0, 4*pi).
GateSpec cd_gate(Complex alpha);
GateSpec cr_gate(double theta);
GateSpec cs_gate(Complex zeta);

Complex cd_alpha(const GateSpec& gate);
double cr_theta(const GateSpec& gate);
Complex cs_zeta(const GateSpec& gate);

double canonical_cr_theta(double theta);

/// Throws CanonicalizationError if any parameter is NaN or infinite.
void require_finite_params(const GateSpec& gate);

// --------------------------------------------------------------------------
// Target unitaries, built as expm of the truncated generator (exactly unitary
// on the truncated space; truncation shows up as physics, not as norm loss).
// --------------------------------------------------------------------------

/// U_CD(alpha) = exp[sigma_x (x) (alpha a† - alpha* a)]
///             = |+><+| (x) D(alpha) + |-><-| (x) D(-alpha).
ComplexMatrix target_unitary_cd(Complex alpha, const FockSpace& space);

/// U_CR(theta) = |0><0| (x) e^{-i theta n} + |1><1| (x) e^{+i theta n}.
ComplexMatrix target_unitary_cr(double theta, const FockSpace& space);

/// U_CS(zeta) = exp[(1/2) sigma_x (x) (zeta* a² - zeta a†²)]
///            = |+><+| (x) S(zeta) + |-><-| (x) S(-zeta).
ComplexMatrix target_unitary_cs(Complex zeta, const FockSpace& space);

}  // namespace ionpulse
