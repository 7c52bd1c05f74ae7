#include "ionpulse/gates.hpp"

#include <cmath>
#include <numbers>

#include "ionpulse/errors.hpp"

namespace ionpulse {

namespace {

void require_finite(double v, const std::string& name) {
  if (!std::isfinite(v)) {
    throw CanonicalizationError("gate parameter '" + name + "' is non-finite");
  }
}

double param(const GateSpec& gate, const std::string& key) {
  auto it = gate.params.find(key);
  if (it == gate.params.end()) {
    throw InvalidArgument("gate '" + gate.type + "' missing parameter '" + key + "'");
  }
  return it->second;
}

}  // namespace

double canonical_cr_theta(double theta) {
  require_finite(theta, "theta");
  const double period = 4.0 * std::numbers::pi;
  double t = std::fmod(theta, period);
  if (t < 0.0) t += period;
  if (t == period) t = 0.0;
  return t;
}

GateSpec cd_gate(Complex alpha) {
  require_finite(alpha.real(), "alpha_re");
  require_finite(alpha.imag(), "alpha_im");
  return {"CD", {{"alpha_im", alpha.imag()}, {"alpha_re", alpha.real()}}};
}

GateSpec cr_gate(double theta) {
  return {"CR", {{"theta", canonical_cr_theta(theta)}}};
}

GateSpec cs_gate(Complex zeta) {
  require_finite(zeta.real(), "zeta_re");
  require_finite(zeta.imag(), "zeta_im");
  return {"CS", {{"zeta_im", zeta.imag()}, {"zeta_re", zeta.real()}}};
}

Complex cd_alpha(const GateSpec& gate) {
  return {param(gate, "alpha_re"), param(gate, "alpha_im")};
}

double cr_theta(const GateSpec& gate) { return param(gate, "theta"); }

Complex cs_zeta(const GateSpec& gate) {
  return {param(gate, "zeta_re"), param(gate, "zeta_im")};
}

void require_finite_params(const GateSpec& gate) {
  for (const auto& [key, value] : gate.params) require_finite(value, key);
}

ComplexMatrix target_unitary_cd(Complex alpha, const FockSpace& space) {
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
    throw InvalidArgument("target_unitary_cd: non-finite alpha");
  }
  const ComplexMatrix a = annihilation(space);
  return expm(kron(sigma_x(), alpha * a.adjoint() - std::conj(alpha) * a));
}

ComplexMatrix target_unitary_cr(double theta, const FockSpace& space) {
  if (!std::isfinite(theta)) throw InvalidArgument("target_unitary_cr: non-finite theta");
  return expm(Complex(0, -theta) * kron(sigma_z(), number_operator(space)));
}

ComplexMatrix target_unitary_cs(Complex zeta, const FockSpace& space) {
  if (!std::isfinite(zeta.real()) || !std::isfinite(zeta.imag())) {
    throw InvalidArgument("target_unitary_cs: non-finite zeta");
  }
  const ComplexMatrix a = annihilation(space);
  const ComplexMatrix a2 = a * a;
  return expm(kron(sigma_x(), 0.5 * (std::conj(zeta) * a2 - zeta * a2.adjoint())));
}

}  // namespace ionpulse
