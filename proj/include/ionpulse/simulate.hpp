#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <utility>
#include <vector>

#include "ionpulse/codebook.hpp"
#include "ionpulse/control.hpp"
#include "ionpulse/linalg.hpp"

namespace ionpulse {

/// Joint qubit (x) oscillator state vector, qubit factor first. Index 0 of
/// the qubit is |0> = |up>.
struct HybridState {
  ComplexVector amplitudes;
  int osc_dim() const { return static_cast<int>(amplitudes.size()) / 2; }
  double norm() const { return amplitudes.norm(); }
};

HybridState tensor_state(const ComplexVector& qubit, const ComplexVector& osc);
HybridState plus_vacuum(const FockSpace& space);

HybridState apply_unitary(const HybridState& state, const ComplexMatrix& u);

/// Reduced oscillator density matrix Tr_qubit |psi><psi|.
ComplexMatrix reduced_oscillator_density(const HybridState& state);

/// sigma_x basis change on the spin only (ideal, instantaneous).
ComplexMatrix hadamard_on_spin(int osc_dim);

enum class QubitOutcome { up, down };

/// Projects the qubit, returns the renormalized oscillator state and the
/// Born probability. Zero-probability outcomes (p <= 1e-12) are an error.
std::pair<ComplexVector, double> postselect(const HybridState& state, QubitOutcome outcome);

// --------------------------------------------------------------------------
// Motional dephasing trajectories: H_deph(t) = eps(t) (I (x) a†a) with eps
// piecewise constant, i.i.d. Normal(0, 2*gamma/tau_seg) per slot, tau_seg
// equal to the pulse time step.
// --------------------------------------------------------------------------

struct NoiseModel {
  double gamma_hz = 0.0;
  int num_trajectories = 1;
  std::uint64_t rng_seed = kDefaultSeed;
};

/// The per-slot eps draws for one trajectory; deterministic in
/// (rng_seed, traj_index) and independent across indices.
std::vector<double> dephasing_noise_samples(double gamma_hz, double tau_seg_s, int count,
                                            std::uint64_t rng_seed, std::uint64_t traj_index);

/// Full process unitary of one noisy trajectory. gamma = 0 reproduces the
/// closed-system propagator bit for bit (same code path, eps identically 0).
ComplexMatrix sample_dephasing_trajectory(const PulseSpec& pulse, const ControlProblem& problem,
                                          const NoiseModel& noise, std::uint64_t traj_index);

struct NoisyFidelity {
  double mean = 0.0;
  double stddev = 0.0;  // NaN when num_trajectories == 1
  std::vector<double> per_trajectory;
};

/// Ensemble statistics of per-trajectory process fidelity against the
/// problem's target. Deterministic for a fixed seed at any job count.
NoisyFidelity noisy_fidelity(const PulseSpec& pulse, const ControlProblem& problem,
                             const NoiseModel& noise, int jobs = 1);

// --------------------------------------------------------------------------
// Wigner functions, W(x, p) = (1/pi) Tr[D†(alpha) rho D(alpha) Pi] with
// alpha = (x + ip)/sqrt(2); vacuum peaks at 1/pi.
// --------------------------------------------------------------------------

struct WignerOptions {
  double x_min = -5.0, x_max = 5.0;
  double p_min = -5.0, p_max = 5.0;
  int points_per_axis = 201;
};

struct WignerGrid {
  std::vector<double> x_axis, p_axis;
  Eigen::MatrixXd values;  // values(i, j) = W(x_axis[i], p_axis[j])
  bool leak_warning = false;
  double dx = 0.0, dp = 0.0;
  double sum_times_area() const;
};

/// Exact truncated Fock-basis matrix elements <m|D(alpha)|n>. Unlike the
/// expm route this stays accurate for displacements far outside the
/// truncated support, which the far grid corners need.
ComplexMatrix displacement_elements(Complex alpha, int dim);

WignerGrid wigner(const ComplexMatrix& rho_osc, const WignerOptions& options = {});
WignerGrid wigner(const ComplexVector& psi_osc, const WignerOptions& options = {});

/// min(0, min W) over the grid.
double negativity(const WignerGrid& grid);

// --------------------------------------------------------------------------
// Squeezed cat demonstration: CS(r), Hadamard, CD(alpha), post-select up.
// --------------------------------------------------------------------------

struct CatOptions {
  Complex alpha;                 // default sqrt(pi), set in run_cat_circuit
  double squeeze_r = 0.5;
  bool ideal_unitaries = false;  // target unitaries instead of cached pulses
  double gamma_hz = 0.0;         // > 0 with num_trajectories > 0: noisy run
  int num_trajectories = 0;
  std::uint64_t rng_seed = kDefaultSeed;
  int jobs = 1;
  WignerOptions grid;
  CatOptions();
};

struct CatResult {
  WignerGrid stage_squeezed;   // after CS
  WignerGrid stage_entangled;  // after CS, H, CD (reduced motional state)
  WignerGrid stage_cat;        // post-selected on |up>
  double wigner_negativity = 0.0;
  double p_up = 0.0;
  ComplexVector cat_state;               // closed-system post-selected state
  std::uint64_t syntheses_during_run = 0;  // must be 0 on a warm cache
};

CatResult run_cat_circuit(const DeviceSpec& device, const ModelSpec& base_model,
                          const std::filesystem::path& library_root,
                          const CatOptions& options = {});

}  // namespace ionpulse
