#pragma once

#include <string>
#include <vector>

#include "ionpulse/linalg.hpp"

namespace ionpulse {

/// One bounded piecewise-constant control problem:
///   U(u) = prod_{t=N..1} exp(-i (H_drift + sum_c u_c[t] H_c) dt),
/// maximize |Tr(U_target† U)|² / d².
struct ControlProblem {
  ComplexMatrix h_drift;
  std::vector<ComplexMatrix> h_controls;
  std::vector<std::string> channel_names;
  ComplexMatrix u_target;
  double duration_s = 0.0;
  int num_tslots = 0;
  double amp_bound = 1.0;
  double fid_tol = 1e-3;
  double grad_tol = 1e-8;
  int max_iter = 500;

  /// Optional analytic starting waveform from the Hamiltonian builder
  /// (e.g. the resonant rotating-frame drive); the optimizer adds a small
  /// seeded perturbation on top. Empty: seeded low-amplitude random start.
  std::vector<std::vector<double>> initial_guess;

  double dt() const { return duration_s / num_tslots; }
  Eigen::Index dim() const { return u_target.rows(); }

  /// Hermiticity of all Hamiltonians (1e-12), unitarity of the target (1e-9),
  /// positive duration, consistent dimensions.
  void validate() const;
};

}  // namespace ionpulse
