#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ionpulse/codebook.hpp"
#include "ionpulse/control.hpp"
#include "ionpulse/device.hpp"
#include "ionpulse/gates.hpp"
#include "ionpulse/model.hpp"

namespace ionpulse {

// --------------------------------------------------------------------------
// Spin-motion control Hamiltonians. Dimensionless drives u(t) scale the
// hardware amplitude limit Omega_max; sideband order sets the Lamb-Dicke
// power (eta for the first sideband, eta² for dispersive and second-sideband
// couplings), which is what makes CS need ~13x the CD duration.
//   CD: H_x = (eta Omega_max / 2) sigma_x (x) (a + a†)
//       H_p = (eta Omega_max / 2) sigma_x (x) i(a† - a),  drift Delta (I (x) n)
//   CR: H   = (eta² Omega_max / 2) sigma_z (x) n,          drift 0
//   CS: H_x = (eta² Omega_max / 4) sigma_x (x) (a² + a†²)
//       H_p = (eta² Omega_max / 4) sigma_x (x) i(a†² - a²), drift Delta (I (x) n)
// --------------------------------------------------------------------------

ControlProblem build_hamiltonian_cd(const GateSpec& gate, const DeviceSpec& device,
                                    const ModelSpec& model);
ControlProblem build_hamiltonian_cr(const GateSpec& gate, const DeviceSpec& device,
                                    const ModelSpec& model);
ControlProblem build_hamiltonian_cs(const GateSpec& gate, const DeviceSpec& device,
                                    const ModelSpec& model);

/// H_drift + sum_c u_c[t] H_c for slot t.
ComplexMatrix slot_hamiltonian(const ControlProblem& problem,
                               const std::vector<std::vector<double>>& drives, int t);

/// exp(-i H dt) for Hermitian H via eigendecomposition (exactly unitary).
/// Every propagation in the project goes through this one routine.
ComplexMatrix slot_propagator(const ComplexMatrix& h, double dt);

/// Reorder a waveform map into the problem's channel order.
std::vector<std::vector<double>> drives_for(
    const ControlProblem& problem,
    const std::map<std::string, std::vector<double>>& waveforms);

/// Time-ordered product of per-slot exponentials, channel-indexed drives.
ComplexMatrix propagate(const ControlProblem& problem,
                        const std::vector<std::vector<double>>& drives);

/// Same, with drives keyed by channel name (PulseSpec waveforms).
ComplexMatrix propagate(const ControlProblem& problem,
                        const std::map<std::string, std::vector<double>>& waveforms);

/// Global-phase-invariant process fidelity |Tr(U_target† U)|² / d².
double process_fidelity(const ComplexMatrix& u_target, const ComplexMatrix& u);

struct GrapeResult {
  std::vector<std::vector<double>> drives;  // [channel][slot], clamped to bounds
  double fidelity = 0.0;
  int iterations = 0;
  std::string stop_reason;  // "fid_tol" | "grad_tol" | "max_iter" | "stalled"
};

/// Piecewise-constant GRAPE with exact eigenbasis gradients and a projected
/// quasi-Newton ascent. Deterministic given (problem, seed).
GrapeResult grape_optimize(const ControlProblem& problem, std::uint64_t seed);

/// Gradient of process fidelity w.r.t. every drive sample; exact up to
/// floating point (tests check it against central finite differences).
std::vector<std::vector<double>> grape_gradient(const ControlProblem& problem,
                                                const std::vector<std::vector<double>>& drives);

struct SweepPoint {
  double duration_us = 0.0;
  double infidelity = 1.0;
  std::string key;      // empty if the point failed to reach the caching floor
  std::string status;   // "ok" | "below_floor"
};

/// One fresh synthesis per duration (independent derived seeds); per-point
/// failures are recorded and the sweep continues.
std::vector<SweepPoint> duration_sweep(const GateSpec& gate, const DeviceSpec& device,
                                       const ModelSpec& base_model,
                                       const std::vector<double>& durations_us,
                                       const std::filesystem::path& library_root,
                                       std::uint64_t seed = kDefaultSeed, int jobs = 1);

}  // namespace ionpulse
