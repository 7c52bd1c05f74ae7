#pragma once

namespace ionpulse {

/// Numerical model for one synthesis: truncation, time grid, and optimizer
/// settings. Part of the hashed (gate, device, model) triple, so any change
/// here keys a new library entry.
struct ModelSpec {
  int n_max = 15;
  int num_tslots = 200;
  double duration_us = 100.0;
  double amp_bound = 1.0;
  double fid_tol = 1e-3;
  double grad_tol = 1e-8;
  int max_iter = 500;

  void validate() const;
};

}  // namespace ionpulse
