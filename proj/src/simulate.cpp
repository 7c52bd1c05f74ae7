#include "ionpulse/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include "ionpulse/errors.hpp"
#include "ionpulse/plugin.hpp"
#include "ionpulse/synth.hpp"
#include "ionpulse/util.hpp"

namespace ionpulse {

HybridState tensor_state(const ComplexVector& qubit, const ComplexVector& osc) {
  if (qubit.size() != 2) throw InvalidArgument("tensor_state: qubit factor must have dim 2");
  HybridState state;
  state.amplitudes.resize(2 * osc.size());
  state.amplitudes.head(osc.size()) = qubit(0) * osc;
  state.amplitudes.tail(osc.size()) = qubit(1) * osc;
  return state;
}

HybridState plus_vacuum(const FockSpace& space) {
  ComplexVector qubit(2);
  qubit << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  ComplexVector vac = ComplexVector::Zero(space.dim());
  vac(0) = 1.0;
  return tensor_state(qubit, vac);
}

HybridState apply_unitary(const HybridState& state, const ComplexMatrix& u) {
  if (u.cols() != state.amplitudes.size()) {
    throw InvalidArgument("apply_unitary: dimension mismatch");
  }
  return {u * state.amplitudes};
}

ComplexMatrix reduced_oscillator_density(const HybridState& state) {
  const int d = state.osc_dim();
  const auto up = state.amplitudes.head(d);
  const auto down = state.amplitudes.tail(d);
  return up * up.adjoint() + down * down.adjoint();
}

ComplexMatrix hadamard_on_spin(int osc_dim) {
  ComplexMatrix h(2, 2);
  h << 1, 1, 1, -1;
  return kron(h / std::sqrt(2.0), identity(osc_dim));
}

std::pair<ComplexVector, double> postselect(const HybridState& state, QubitOutcome outcome) {
  const int d = state.osc_dim();
  const ComplexVector block = outcome == QubitOutcome::up
                                  ? ComplexVector(state.amplitudes.head(d))
                                  : ComplexVector(state.amplitudes.tail(d));
  const double p = block.squaredNorm();
  if (p <= 1e-12) {
    throw InvalidArgument("postselect: outcome has (near-)zero probability");
  }
  return {block / std::sqrt(p), p};
}

// --------------------------------------------------------------------------
// Dephasing trajectories
// --------------------------------------------------------------------------

std::vector<double> dephasing_noise_samples(double gamma_hz, double tau_seg_s, int count,
                                            std::uint64_t rng_seed, std::uint64_t traj_index) {
  if (gamma_hz < 0.0) throw InvalidArgument("dephasing: gamma must be >= 0");
  if (!(tau_seg_s > 0.0)) throw InvalidArgument("dephasing: tau_seg must be > 0");
  const double sigma = std::sqrt(2.0 * gamma_hz / tau_seg_s);
  GaussianSampler gauss(make_rng(rng_seed, traj_index));
  std::vector<double> eps(static_cast<std::size_t>(count));
  for (double& e : eps) e = sigma * gauss.next();
  return eps;
}

namespace {

ComplexMatrix dephasing_operator(Eigen::Index joint_dim) {
  const int d_osc = static_cast<int>(joint_dim) / 2;
  return kron(identity(2), number_operator(FockSpace(d_osc - 1)));
}

/// Propagator product over all slots with per-slot eps added to the
/// Hamiltonian; eps == 0 leaves the slot Hamiltonian bit-identical to the
/// closed-system one.
ComplexMatrix noisy_propagator(const ControlProblem& problem,
                               const std::vector<std::vector<double>>& drives,
                               const std::vector<double>& eps, const ComplexMatrix& deph_op) {
  const double dt = problem.dt();
  ComplexMatrix u = ComplexMatrix::Identity(problem.dim(), problem.dim());
  for (int t = 0; t < problem.num_tslots; ++t) {
    ComplexMatrix h = slot_hamiltonian(problem, drives, t);
    if (eps[static_cast<std::size_t>(t)] != 0.0) {
      h += eps[static_cast<std::size_t>(t)] * deph_op;
    }
    u = slot_propagator(h, dt) * u;
  }
  return u;
}

}  // namespace

ComplexMatrix sample_dephasing_trajectory(const PulseSpec& pulse, const ControlProblem& problem,
                                          const NoiseModel& noise, std::uint64_t traj_index) {
  const auto drives = drives_for(problem, pulse.waveforms);
  const auto eps = dephasing_noise_samples(noise.gamma_hz, problem.dt(), problem.num_tslots,
                                           noise.rng_seed, traj_index);
  return noisy_propagator(problem, drives, eps, dephasing_operator(problem.dim()));
}

NoisyFidelity noisy_fidelity(const PulseSpec& pulse, const ControlProblem& problem,
                             const NoiseModel& noise, int jobs) {
  if (noise.num_trajectories < 1) {
    throw InvalidArgument("noisy_fidelity: need at least one trajectory");
  }
  NoisyFidelity out;
  out.per_trajectory.resize(static_cast<std::size_t>(noise.num_trajectories));

  auto run_traj = [&](std::size_t i) {
    const ComplexMatrix u = sample_dephasing_trajectory(pulse, problem, noise, i);
    out.per_trajectory[i] = process_fidelity(problem.u_target, u);
  };
  if (jobs <= 1 || noise.num_trajectories == 1) {
    for (std::size_t i = 0; i < out.per_trajectory.size(); ++i) run_traj(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const std::size_t nworkers =
        std::min<std::size_t>(static_cast<std::size_t>(jobs), out.per_trajectory.size());
    for (std::size_t w = 0; w < nworkers; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < out.per_trajectory.size();
             i = next.fetch_add(1)) {
          run_traj(i);
        }
      });
    }
    for (auto& t : workers) t.join();
  }

  const auto n = static_cast<double>(out.per_trajectory.size());
  out.mean = pairwise_sum(out.per_trajectory) / n;
  if (out.per_trajectory.size() < 2) {
    out.stddev = std::numeric_limits<double>::quiet_NaN();
  } else {
    std::vector<double> sq(out.per_trajectory.size());
    for (std::size_t i = 0; i < sq.size(); ++i) {
      const double d = out.per_trajectory[i] - out.mean;
      sq[i] = d * d;
    }
    out.stddev = std::sqrt(pairwise_sum(sq) / (n - 1.0));
  }
  return out;
}

// --------------------------------------------------------------------------
// Wigner
// --------------------------------------------------------------------------

ComplexMatrix displacement_elements(Complex alpha, int dim) {
  if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
    throw InvalidArgument("displacement_elements: non-finite alpha");
  }
  ComplexMatrix d = ComplexMatrix::Zero(dim, dim);
  const double x = std::norm(alpha);
  if (x == 0.0) return ComplexMatrix::Identity(dim, dim);

  // <m|D|n> = sqrt(n!/m!) alpha^{m-n} e^{-x/2} L_n^{(m-n)}(x) for m >= n,
  // and the conjugate-reflected form below the diagonal. Associated Laguerre
  // values come from the three-term recurrence in n; magnitudes are assembled
  // in log space to dodge factorial overflow.
  std::vector<std::vector<double>> laguerre(static_cast<std::size_t>(dim));
  for (int k = 0; k < dim; ++k) {
    auto& row = laguerre[static_cast<std::size_t>(k)];  // row[n] = L_n^{(k)}(x)
    row.resize(static_cast<std::size_t>(dim));
    row[0] = 1.0;
    if (dim > 1) row[1] = 1.0 + k - x;
    for (int n = 2; n < dim; ++n) {
      row[static_cast<std::size_t>(n)] =
          ((2.0 * n - 1.0 + k - x) * row[static_cast<std::size_t>(n - 1)] -
           (n - 1.0 + k) * row[static_cast<std::size_t>(n - 2)]) /
          n;
    }
  }

  const double log_abs_alpha = 0.5 * std::log(x);
  const double arg_alpha = std::arg(alpha);
  for (int m = 0; m < dim; ++m) {
    for (int n = 0; n <= m; ++n) {
      const int k = m - n;
      const double log_mag = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(m + 1.0)) +
                             k * log_abs_alpha - 0.5 * x;
      const double lag = laguerre[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)];
      const Complex upper =
          std::polar(std::exp(log_mag) * std::abs(lag), k * arg_alpha) *
          (lag < 0.0 ? -1.0 : 1.0);
      d(m, n) = upper;
      // <n|D(alpha)|m> = (-1)^{m-n} conj(<m|D(alpha)|n>) reflected through D† = D(-alpha).
      d(n, m) = (k % 2 == 0 ? 1.0 : -1.0) * std::conj(upper);
    }
  }
  return d;
}

double WignerGrid::sum_times_area() const { return values.sum() * dx * dp; }

WignerGrid wigner(const ComplexMatrix& rho_osc, const WignerOptions& options) {
  const int d = static_cast<int>(rho_osc.rows());
  if (d < 2 || rho_osc.cols() != d) throw InvalidArgument("wigner: bad density matrix");
  if (options.points_per_axis < 2) throw InvalidArgument("wigner: need >= 2 grid points");

  WignerGrid grid;
  const int np = options.points_per_axis;
  grid.x_axis.resize(static_cast<std::size_t>(np));
  grid.p_axis.resize(static_cast<std::size_t>(np));
  grid.dx = (options.x_max - options.x_min) / (np - 1);
  grid.dp = (options.p_max - options.p_min) / (np - 1);
  for (int i = 0; i < np; ++i) {
    grid.x_axis[static_cast<std::size_t>(i)] = options.x_min + i * grid.dx;
    grid.p_axis[static_cast<std::size_t>(i)] = options.p_min + i * grid.dp;
  }
  grid.values.resize(np, np);
  grid.leak_warning = std::real(rho_osc(d - 1, d - 1)) > 1e-3;

  Eigen::VectorXd parity(d);
  for (int n = 0; n < d; ++n) parity(n) = (n % 2 == 0) ? 1.0 : -1.0;
  const double inv_pi = 1.0 / std::numbers::pi;

  std::vector<std::thread> workers;
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const int rows_per_worker = (np + static_cast<int>(hw) - 1) / static_cast<int>(hw);
  auto run_rows = [&](int row_begin, int row_end) {
    for (int i = row_begin; i < row_end; ++i) {
      for (int j = 0; j < np; ++j) {
        const Complex alpha((grid.x_axis[static_cast<std::size_t>(i)]) / std::sqrt(2.0),
                            (grid.p_axis[static_cast<std::size_t>(j)]) / std::sqrt(2.0));
        const ComplexMatrix disp = displacement_elements(alpha, d);
        const ComplexMatrix shifted = disp.adjoint() * rho_osc * disp;
        double w = 0.0;
        for (int n = 0; n < d; ++n) w += parity(n) * std::real(shifted(n, n));
        grid.values(i, j) = inv_pi * w;
      }
    }
  };
  for (int begin = 0; begin < np; begin += rows_per_worker) {
    workers.emplace_back(run_rows, begin, std::min(np, begin + rows_per_worker));
  }
  for (auto& t : workers) t.join();
  return grid;
}

WignerGrid wigner(const ComplexVector& psi_osc, const WignerOptions& options) {
  return wigner(ComplexMatrix(psi_osc * psi_osc.adjoint()), options);
}

double negativity(const WignerGrid& grid) { return std::min(0.0, grid.values.minCoeff()); }

// --------------------------------------------------------------------------
// Squeezed cat circuit
// --------------------------------------------------------------------------

CatOptions::CatOptions() : alpha(std::sqrt(std::numbers::pi), 0.0) {}

namespace {

struct GateStage {
  PulseSpec pulse;
  ControlProblem problem;
  std::vector<std::vector<double>> drives;
  ComplexMatrix closed_unitary;
};

GateStage prepare_stage(const GateSpec& gate, const DeviceSpec& device, ModelSpec model,
                        const std::filesystem::path& root, bool ideal,
                        std::uint64_t seed) {
  const GatePlugin& plugin = global_registry().require(gate.type);
  GateStage stage;
  if (ideal) {
    stage.closed_unitary = plugin.target_unitary(gate, FockSpace(model.n_max));
    return stage;
  }
  stage.pulse = compile_pulse(gate, device, model, Strategy::hybrid, root, seed);
  stage.problem = plugin.build_hamiltonian(stage.pulse.gate, device, stage.pulse.model);
  stage.drives = drives_for(stage.problem, stage.pulse.waveforms);
  stage.closed_unitary = propagate(stage.problem, stage.drives);
  return stage;
}

HybridState evolve_noisy(const HybridState& state, const GateStage& stage,
                         GaussianSampler& gauss, double gamma_hz,
                         const ComplexMatrix& deph_op) {
  const double dt = stage.problem.dt();
  const double sigma = std::sqrt(2.0 * gamma_hz / dt);
  ComplexVector psi = state.amplitudes;
  for (int t = 0; t < stage.problem.num_tslots; ++t) {
    const double eps = sigma * gauss.next();
    ComplexMatrix h = slot_hamiltonian(stage.problem, stage.drives, t);
    if (eps != 0.0) h += eps * deph_op;
    psi = slot_propagator(h, dt) * psi;
  }
  return {psi};
}

}  // namespace

CatResult run_cat_circuit(const DeviceSpec& device, const ModelSpec& base_model,
                          const std::filesystem::path& library_root,
                          const CatOptions& options) {
  if (options.ideal_unitaries && options.gamma_hz > 0.0 && options.num_trajectories > 0) {
    throw InvalidArgument("cat circuit: noisy runs require pulse-level gates");
  }
  const std::uint64_t syntheses_before = synthesis_invocations();

  ModelSpec cs_model = base_model;
  cs_model.duration_us = 1300.0;
  cs_model.fid_tol = 1e-5;
  ModelSpec cd_model = base_model;
  cd_model.duration_us = 100.0;

  const GateStage cs = prepare_stage(cs_gate(Complex(options.squeeze_r, 0.0)), device,
                                     cs_model, library_root, options.ideal_unitaries,
                                     options.rng_seed);
  const GateStage cd = prepare_stage(cd_gate(options.alpha), device, cd_model, library_root,
                                     options.ideal_unitaries, options.rng_seed);

  const FockSpace space(base_model.n_max);
  const ComplexMatrix hadamard = hadamard_on_spin(space.dim());
  const HybridState initial = plus_vacuum(space);

  CatResult result;
  result.syntheses_during_run = synthesis_invocations() - syntheses_before;

  // Closed-system pass (also the reference when running noisy).
  const HybridState after_cs = apply_unitary(initial, cs.closed_unitary);
  const HybridState after_cd =
      apply_unitary(apply_unitary(after_cs, hadamard), cd.closed_unitary);
  auto [cat_closed, p_up_closed] = postselect(after_cd, QubitOutcome::up);
  result.cat_state = cat_closed;

  const bool noisy = options.gamma_hz > 0.0 && options.num_trajectories > 0;
  if (!noisy) {
    result.stage_squeezed = wigner(reduced_oscillator_density(after_cs), options.grid);
    result.stage_entangled = wigner(reduced_oscillator_density(after_cd), options.grid);
    result.stage_cat = wigner(cat_closed, options.grid);
    result.wigner_negativity = negativity(result.stage_cat);
    result.p_up = p_up_closed;
    return result;
  }

  const int ntraj = options.num_trajectories;
  const ComplexMatrix deph_op = dephasing_operator(2 * space.dim());
  std::vector<ComplexMatrix> rho_a(static_cast<std::size_t>(ntraj));
  std::vector<ComplexMatrix> rho_b(static_cast<std::size_t>(ntraj));
  std::vector<ComplexMatrix> rho_c(static_cast<std::size_t>(ntraj));
  std::vector<double> p_up(static_cast<std::size_t>(ntraj));

  auto run_traj = [&](std::size_t i) {
    GaussianSampler gauss(make_rng(options.rng_seed, i));
    const HybridState a = evolve_noisy(initial, cs, gauss, options.gamma_hz, deph_op);
    const HybridState b =
        evolve_noisy(apply_unitary(a, hadamard), cd, gauss, options.gamma_hz, deph_op);
    auto [cat, p] = postselect(b, QubitOutcome::up);
    rho_a[i] = reduced_oscillator_density(a);
    rho_b[i] = reduced_oscillator_density(b);
    rho_c[i] = p * (cat * cat.adjoint());
    p_up[i] = p;
  };
  if (options.jobs <= 1) {
    for (std::size_t i = 0; i < static_cast<std::size_t>(ntraj); ++i) run_traj(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const std::size_t nworkers =
        std::min<std::size_t>(static_cast<std::size_t>(options.jobs),
                              static_cast<std::size_t>(ntraj));
    for (std::size_t w = 0; w < nworkers; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < static_cast<std::size_t>(ntraj);
             i = next.fetch_add(1)) {
          run_traj(i);
        }
      });
    }
    for (auto& t : workers) t.join();
  }

  // Index-ordered reduction keeps results independent of the job count.
  ComplexMatrix avg_a = ComplexMatrix::Zero(space.dim(), space.dim());
  ComplexMatrix avg_b = avg_a, avg_c = avg_a;
  for (int i = 0; i < ntraj; ++i) {
    avg_a += rho_a[static_cast<std::size_t>(i)];
    avg_b += rho_b[static_cast<std::size_t>(i)];
    avg_c += rho_c[static_cast<std::size_t>(i)];
  }
  const double p_total = pairwise_sum(p_up);
  avg_a /= ntraj;
  avg_b /= ntraj;
  avg_c /= p_total;

  result.stage_squeezed = wigner(avg_a, options.grid);
  result.stage_entangled = wigner(avg_b, options.grid);
  result.stage_cat = wigner(avg_c, options.grid);
  result.wigner_negativity = negativity(result.stage_cat);
  result.p_up = p_total / ntraj;
  return result;
}

}  // namespace ionpulse
