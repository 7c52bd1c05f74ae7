#include "ionpulse/synth.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <numbers>
#include <thread>

#include "ionpulse/errors.hpp"
#include "ionpulse/plugin.hpp"
#include "ionpulse/util.hpp"

namespace ionpulse {

void ControlProblem::validate() const {
  if (num_tslots < 1) throw InvalidArgument("control problem: num_tslots must be >= 1");
  if (!(duration_s > 0.0)) throw InvalidArgument("control problem: duration must be > 0");
  if (!(amp_bound > 0.0)) throw InvalidArgument("control problem: amp_bound must be > 0");
  if (h_controls.empty()) throw InvalidArgument("control problem: no control Hamiltonians");
  if (h_controls.size() != channel_names.size()) {
    throw InvalidArgument("control problem: channel name/operator count mismatch");
  }
  const Eigen::Index d = u_target.rows();
  if (u_target.cols() != d) throw InvalidArgument("control problem: target not square");
  auto check_hermitian = [d](const ComplexMatrix& h, const std::string& what) {
    if (h.rows() != d || h.cols() != d) {
      throw InvalidArgument("control problem: " + what + " dimension mismatch");
    }
    if (!is_hermitian(h, 1e-12)) {
      throw InvalidArgument("control problem: " + what + " is not Hermitian");
    }
  };
  check_hermitian(h_drift, "drift");
  for (std::size_t c = 0; c < h_controls.size(); ++c) {
    check_hermitian(h_controls[c], "control '" + channel_names[c] + "'");
  }
  const double unitary_defect =
      max_abs(u_target.adjoint() * u_target - ComplexMatrix::Identity(d, d));
  if (unitary_defect > 1e-9) {
    throw InvalidArgument("control problem: target is not unitary (defect " +
                          std::to_string(unitary_defect) + ")");
  }
  if (!initial_guess.empty()) {
    if (initial_guess.size() != h_controls.size()) {
      throw InvalidArgument("control problem: initial guess channel count mismatch");
    }
    for (const auto& ch : initial_guess) {
      if (ch.size() != static_cast<std::size_t>(num_tslots)) {
        throw InvalidArgument("control problem: initial guess length mismatch");
      }
      for (double u : ch) {
        if (!std::isfinite(u)) throw InvalidArgument("control problem: non-finite guess");
      }
    }
  }
}

// --------------------------------------------------------------------------
// Hamiltonian builders
// --------------------------------------------------------------------------

namespace {

struct Operators {
  FockSpace space;
  ComplexMatrix a, ad, n, i2;
};

Operators make_operators(const ModelSpec& model) {
  FockSpace space(model.n_max);
  Operators ops{space, annihilation(space), {}, number_operator(space), identity(2)};
  ops.ad = ops.a.adjoint();
  return ops;
}

void fill_model(ControlProblem& p, const ModelSpec& model) {
  p.duration_s = model.duration_us * 1e-6;
  p.num_tslots = model.num_tslots;
  p.amp_bound = model.amp_bound;
  p.fid_tol = model.fid_tol;
  p.grad_tol = model.grad_tol;
  p.max_iter = model.max_iter;
}

/// Two-channel rotating drive u_x + i u_p = envelope(t) sampled at slot
/// midpoints, clamped into the amplitude box.
std::vector<std::vector<double>> rotating_guess(const ModelSpec& model,
                                                const std::function<Complex(double)>& envelope) {
  const std::size_t n = static_cast<std::size_t>(model.num_tslots);
  const double dt = model.duration_us * 1e-6 / model.num_tslots;
  std::vector<std::vector<double>> guess(2, std::vector<double>(n));
  for (std::size_t t = 0; t < n; ++t) {
    const Complex v = envelope((static_cast<double>(t) + 0.5) * dt);
    guess[0][t] = std::clamp(v.real(), -model.amp_bound, model.amp_bound);
    guess[1][t] = std::clamp(v.imag(), -model.amp_bound, model.amp_bound);
  }
  return guess;
}

}  // namespace

ControlProblem build_hamiltonian_cd(const GateSpec& gate, const DeviceSpec& device,
                                    const ModelSpec& model) {
  device.validate();
  model.validate();
  const Complex alpha = cd_alpha(gate);
  const Operators ops = make_operators(model);
  const double pref = resolve_eta(device, 0, 0) * device.omega_max / 2.0;

  ControlProblem p;
  p.h_drift = device.delta * kron(ops.i2, ops.n);
  p.h_controls = {pref * kron(sigma_x(), ops.a + ops.ad),
                  pref * kron(sigma_x(), Complex(0, 1) * (ops.ad - ops.a))};
  p.channel_names = {"Omega_x", "Omega_p"};
  p.u_target = target_unitary_cd(alpha, ops.space);
  fill_model(p, model);
  // Resonant rotating start: u_x + i u_p = i (alpha / (pref T)) e^{-i Delta t}
  // accumulates exactly D(+/-alpha) per sigma_x branch in the drift frame.
  const double duration = p.duration_s;
  p.initial_guess = rotating_guess(model, [&](double t) {
    return Complex(0, 1) * (alpha / (pref * duration)) *
           std::polar(1.0, -device.delta * t);
  });
  p.validate();
  return p;
}

ControlProblem build_hamiltonian_cr(const GateSpec& gate, const DeviceSpec& device,
                                    const ModelSpec& model) {
  device.validate();
  model.validate();
  const double theta = cr_theta(gate);
  const Operators ops = make_operators(model);
  const double eta_eff = resolve_eta(device, 0, 0);
  const double pref = eta_eff * eta_eff * device.omega_max / 2.0;

  ControlProblem p;
  p.h_drift = ComplexMatrix::Zero(2 * ops.space.dim(), 2 * ops.space.dim());
  p.h_controls = {pref * kron(sigma_z(), ops.n)};
  p.channel_names = {"Omega"};
  p.u_target = target_unitary_cr(theta, ops.space);
  fill_model(p, model);
  // Constant drive reaching the 2pi-equivalent angle of least magnitude.
  double theta_eff = std::fmod(theta, 2.0 * std::numbers::pi);
  if (theta_eff > std::numbers::pi) theta_eff -= 2.0 * std::numbers::pi;
  const double u0 = std::clamp(theta_eff / (pref * p.duration_s), -model.amp_bound,
                               model.amp_bound);
  p.initial_guess = {std::vector<double>(static_cast<std::size_t>(model.num_tslots), u0)};
  p.validate();
  return p;
}

ControlProblem build_hamiltonian_cs(const GateSpec& gate, const DeviceSpec& device,
                                    const ModelSpec& model) {
  device.validate();
  model.validate();
  const Complex zeta = cs_zeta(gate);
  const Operators ops = make_operators(model);
  const double eta_eff = resolve_eta(device, 0, 0);
  const double pref = eta_eff * eta_eff * device.omega_max / 4.0;
  const ComplexMatrix a2 = ops.a * ops.a;
  const ComplexMatrix ad2 = a2.adjoint();

  ControlProblem p;
  p.h_drift = device.delta * kron(ops.i2, ops.n);
  p.h_controls = {pref * kron(sigma_x(), a2 + ad2),
                  pref * kron(sigma_x(), Complex(0, 1) * (ad2 - a2))};
  p.channel_names = {"Omega_x", "Omega_p"};
  p.u_target = target_unitary_cs(zeta, ops.space);
  fill_model(p, model);
  // Second sideband rotates at 2 Delta: u_x + i u_p = w0 e^{-2i Delta t} with
  // w0 = -i zeta / (2 pref T) integrates to S(+/-zeta) per branch.
  const double duration = p.duration_s;
  const Complex w0 = Complex(0, -1) * zeta / (2.0 * pref * duration);
  p.initial_guess = rotating_guess(model, [&](double t) {
    return w0 * std::polar(1.0, -2.0 * device.delta * t);
  });
  p.validate();
  return p;
}

// --------------------------------------------------------------------------
// Propagation
// --------------------------------------------------------------------------

namespace {

struct SlotEig {
  Eigen::VectorXd lam;
  ComplexMatrix vec;
};

SlotEig eig_slot(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
  if (es.info() != Eigen::Success) throw NumericError("slot eigendecomposition failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

ComplexMatrix slot_propagator_from(const SlotEig& e, double dt) {
  ComplexVector phases(e.lam.size());
  for (Eigen::Index k = 0; k < e.lam.size(); ++k) {
    phases(k) = std::polar(1.0, -e.lam(k) * dt);
  }
  return e.vec * phases.asDiagonal() * e.vec.adjoint();
}

void check_drives(const ControlProblem& p, const std::vector<std::vector<double>>& drives) {
  if (drives.size() != p.h_controls.size()) {
    throw InvalidArgument("drives: expected " + std::to_string(p.h_controls.size()) +
                          " channels, got " + std::to_string(drives.size()));
  }
  for (std::size_t c = 0; c < drives.size(); ++c) {
    if (drives[c].size() != static_cast<std::size_t>(p.num_tslots)) {
      throw InvalidArgument("drives: channel '" + p.channel_names[c] + "' has " +
                            std::to_string(drives[c].size()) + " samples, expected " +
                            std::to_string(p.num_tslots));
    }
    for (double u : drives[c]) {
      if (!std::isfinite(u) || std::abs(u) > p.amp_bound * (1.0 + 1e-12)) {
        throw InvalidArgument("drives: sample out of amplitude bounds");
      }
    }
  }
}

}  // namespace

ComplexMatrix slot_hamiltonian(const ControlProblem& problem,
                               const std::vector<std::vector<double>>& drives, int t) {
  ComplexMatrix h = problem.h_drift;
  for (std::size_t c = 0; c < problem.h_controls.size(); ++c) {
    h += drives[c][static_cast<std::size_t>(t)] * problem.h_controls[c];
  }
  return h;
}

ComplexMatrix slot_propagator(const ComplexMatrix& h, double dt) {
  return slot_propagator_from(eig_slot(h), dt);
}

std::vector<std::vector<double>> drives_for(
    const ControlProblem& problem,
    const std::map<std::string, std::vector<double>>& waveforms) {
  std::vector<std::vector<double>> drives;
  for (const auto& name : problem.channel_names) {
    auto it = waveforms.find(name);
    if (it == waveforms.end()) {
      throw InvalidArgument("waveforms missing channel '" + name + "'");
    }
    drives.push_back(it->second);
  }
  return drives;
}

ComplexMatrix propagate(const ControlProblem& problem,
                        const std::vector<std::vector<double>>& drives) {
  check_drives(problem, drives);
  const double dt = problem.dt();
  ComplexMatrix u = ComplexMatrix::Identity(problem.dim(), problem.dim());
  for (int t = 0; t < problem.num_tslots; ++t) {
    u = slot_propagator_from(eig_slot(slot_hamiltonian(problem, drives, t)), dt) * u;
  }
  return u;
}

ComplexMatrix propagate(const ControlProblem& problem,
                        const std::map<std::string, std::vector<double>>& waveforms) {
  return propagate(problem, drives_for(problem, waveforms));
}

double process_fidelity(const ComplexMatrix& u_target, const ComplexMatrix& u) {
  if (u_target.rows() != u.rows() || u_target.cols() != u.cols()) {
    throw InvalidArgument("process_fidelity: dimension mismatch");
  }
  const Complex m = (u_target.adjoint() * u).trace();
  const double d = static_cast<double>(u_target.rows());
  return std::norm(m) / (d * d);
}

// --------------------------------------------------------------------------
// GRAPE
// --------------------------------------------------------------------------

namespace {

using Drives = std::vector<std::vector<double>>;

struct Evaluation {
  double fidelity = 0.0;
  Complex trace_m{0.0, 0.0};
  std::vector<SlotEig> slots;        // per-slot eigensystems
  std::vector<ComplexMatrix> props;  // per-slot propagators
};

Evaluation evaluate(const ControlProblem& p, const Drives& drives) {
  Evaluation ev;
  const double dt = p.dt();
  const Eigen::Index d = p.dim();
  ev.slots.reserve(static_cast<std::size_t>(p.num_tslots));
  ev.props.reserve(static_cast<std::size_t>(p.num_tslots));
  ComplexMatrix u = ComplexMatrix::Identity(d, d);
  for (int t = 0; t < p.num_tslots; ++t) {
    ev.slots.push_back(eig_slot(slot_hamiltonian(p, drives, t)));
    ev.props.push_back(slot_propagator_from(ev.slots.back(), dt));
    u = ev.props.back() * u;
  }
  ev.trace_m = (p.u_target.adjoint() * u).trace();
  ev.fidelity = std::norm(ev.trace_m) / static_cast<double>(d * d);
  return ev;
}

// d exp(-iH dt)/du through the eigenbasis: dP = V (Gamma o (V† H_c V)) V†
// with Gamma_jk = -i dt e^{-i(l_j+l_k)dt/2} sinc((l_j-l_k)dt/2), which is the
// exact divided difference of the phase factors.
Drives gradient_from(const ControlProblem& p, const Evaluation& ev) {
  const double dt = p.dt();
  const Eigen::Index d = p.dim();
  const std::size_t nc = p.h_controls.size();
  Drives grad(nc, std::vector<double>(static_cast<std::size_t>(p.num_tslots), 0.0));

  // Forward partial products X_t = P_t ... P_1 (X_0 = I).
  std::vector<ComplexMatrix> fwd(static_cast<std::size_t>(p.num_tslots) + 1);
  fwd[0] = ComplexMatrix::Identity(d, d);
  for (int t = 0; t < p.num_tslots; ++t) {
    fwd[static_cast<std::size_t>(t) + 1] = ev.props[static_cast<std::size_t>(t)] * fwd[static_cast<std::size_t>(t)];
  }

  const double scale = 2.0 / static_cast<double>(d * d);
  const Complex m_conj = std::conj(ev.trace_m);

  ComplexMatrix rear = p.u_target.adjoint();  // U_target† P_N ... P_{t+1}
  Eigen::MatrixXcd gamma(d, d);
  for (int t = p.num_tslots - 1; t >= 0; --t) {
    const SlotEig& e = ev.slots[static_cast<std::size_t>(t)];
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index k = 0; k < d; ++k) {
        const double sum = (e.lam(j) + e.lam(k)) * dt * 0.5;
        const double diff = (e.lam(j) - e.lam(k)) * dt * 0.5;
        const double sinc = std::abs(diff) < 1e-30 ? 1.0 : std::sin(diff) / diff;
        gamma(j, k) = Complex(0, -dt) * std::polar(1.0, -sum) * sinc;
      }
    }
    const ComplexMatrix g_mat = fwd[static_cast<std::size_t>(t)] * rear;  // X_{t-1} R_t
    const ComplexMatrix k_mat = e.vec.adjoint() * g_mat * e.vec;
    for (std::size_t c = 0; c < nc; ++c) {
      const ComplexMatrix w = e.vec.adjoint() * p.h_controls[c] * e.vec;
      // Tr(R dP X) = sum_{jk} Gamma_jk W_jk K_kj
      Complex tm(0, 0);
      for (Eigen::Index j = 0; j < d; ++j) {
        for (Eigen::Index k = 0; k < d; ++k) {
          tm += gamma(j, k) * w(j, k) * k_mat(k, j);
        }
      }
      grad[c][static_cast<std::size_t>(t)] = scale * std::real(m_conj * tm);
    }
    rear = rear * ev.props[static_cast<std::size_t>(t)];
  }
  return grad;
}

double dot(const Drives& a, const Drives& b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    for (std::size_t t = 0; t < a[c].size(); ++t) s += a[c][t] * b[c][t];
  }
  return s;
}

Drives clamp_drives(const Drives& u, double bound) {
  Drives out = u;
  for (auto& ch : out) {
    for (double& v : ch) v = std::clamp(v, -bound, bound);
  }
  return out;
}

Drives axpy(const Drives& u, double a, const Drives& d) {
  Drives out = u;
  for (std::size_t c = 0; c < u.size(); ++c) {
    for (std::size_t t = 0; t < u[c].size(); ++t) out[c][t] += a * d[c][t];
  }
  return out;
}

Drives sub(const Drives& a, const Drives& b) {
  Drives out = a;
  for (std::size_t c = 0; c < a.size(); ++c) {
    for (std::size_t t = 0; t < a[c].size(); ++t) out[c][t] -= b[c][t];
  }
  return out;
}

/// Seeded smooth waveform (a few low harmonics) normalized to `peak`.
Drives smooth_random(const ControlProblem& p, std::uint64_t seed, double peak) {
  const std::size_t n = static_cast<std::size_t>(p.num_tslots);
  Drives u(p.h_controls.size(), std::vector<double>(n, 0.0));
  for (std::size_t c = 0; c < u.size(); ++c) {
    GaussianSampler gauss(make_rng(seed, c));
    double coeff_sin[4], coeff_cos[4];
    for (int k = 0; k < 4; ++k) {
      coeff_sin[k] = gauss.next();
      coeff_cos[k] = gauss.next();
    }
    double max_v = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double x = (static_cast<double>(t) + 0.5) / static_cast<double>(n);
      double v = 0.0;
      for (int k = 0; k < 4; ++k) {
        v += coeff_sin[k] * std::sin(std::numbers::pi * (k + 1) * x) +
             coeff_cos[k] * std::cos(std::numbers::pi * (k + 1) * x);
      }
      u[c][t] = v;
      max_v = std::max(max_v, std::abs(v));
    }
    if (max_v > 0.0) {
      const double s = peak / max_v;
      for (double& v : u[c]) v *= s;
    }
  }
  return u;
}

/// Builder guess plus a small seeded perturbation, or a low-amplitude seeded
/// start when no guess is available.
Drives initial_drives(const ControlProblem& p, std::uint64_t seed) {
  if (p.initial_guess.empty()) {
    return smooth_random(p, seed, 0.1 * p.amp_bound);
  }
  Drives u = p.initial_guess;
  const Drives noise = smooth_random(p, seed, 0.02 * p.amp_bound);
  for (std::size_t c = 0; c < u.size(); ++c) {
    for (std::size_t t = 0; t < u[c].size(); ++t) {
      u[c][t] = std::clamp(u[c][t] + noise[c][t], -p.amp_bound, p.amp_bound);
    }
  }
  return u;
}

}  // namespace

std::vector<std::vector<double>> grape_gradient(const ControlProblem& problem,
                                                const std::vector<std::vector<double>>& drives) {
  problem.validate();
  check_drives(problem, drives);
  return gradient_from(problem, evaluate(problem, drives));
}

GrapeResult grape_optimize(const ControlProblem& problem, std::uint64_t seed) {
  problem.validate();
  const double bound = problem.amp_bound;
  Drives u = initial_drives(problem, seed);
  Evaluation ev = evaluate(problem, u);
  Drives g = gradient_from(problem, ev);

  // L-BFGS history in minimization convention on f = -F.
  constexpr std::size_t kHistory = 10;
  std::vector<Drives> hist_s, hist_y;
  std::vector<double> hist_rho;

  auto lbfgs_direction = [&](const Drives& grad_ascent) {
    Drives q = grad_ascent;
    for (auto& ch : q) {
      for (double& v : ch) v = -v;  // grad of f
    }
    const std::size_t m = hist_s.size();
    std::vector<double> alpha(m);
    for (std::size_t i = m; i-- > 0;) {
      alpha[i] = hist_rho[i] * dot(hist_s[i], q);
      q = axpy(q, -alpha[i], hist_y[i]);
    }
    if (m > 0) {
      const double yy = dot(hist_y[m - 1], hist_y[m - 1]);
      if (yy > 0) {
        const double gamma = dot(hist_s[m - 1], hist_y[m - 1]) / yy;
        for (auto& ch : q) {
          for (double& v : ch) v *= gamma;
        }
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double beta = hist_rho[i] * dot(hist_y[i], q);
      q = axpy(q, alpha[i] - beta, hist_s[i]);
    }
    for (auto& ch : q) {
      for (double& v : ch) v = -v;  // back to ascent
    }
    return q;
  };

  GrapeResult result;
  result.stop_reason = "max_iter";
  int iter = 0;
  for (; iter < problem.max_iter; ++iter) {
    if (1.0 - ev.fidelity <= problem.fid_tol) {
      result.stop_reason = "fid_tol";
      break;
    }
    const Drives pg = sub(clamp_drives(axpy(u, 1.0, g), bound), u);
    if (std::sqrt(dot(pg, pg)) <= problem.grad_tol) {
      result.stop_reason = "grad_tol";
      break;
    }

    bool accepted = false;
    Drives u_next;
    Evaluation ev_next;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      const Drives dir = attempt == 0 && !hist_s.empty() ? lbfgs_direction(g) : g;
      double step = attempt == 0 && !hist_s.empty() ? 1.0 : 1.0 / std::max(1.0, std::sqrt(dot(g, g)));
      for (int backtrack = 0; backtrack < 40; ++backtrack, step *= 0.5) {
        Drives cand = clamp_drives(axpy(u, step, dir), bound);
        const double ascent = dot(g, sub(cand, u));
        if (ascent <= 0.0) continue;
        Evaluation cand_ev = evaluate(problem, cand);
        if (cand_ev.fidelity >= ev.fidelity + 1e-4 * ascent) {
          u_next = std::move(cand);
          ev_next = std::move(cand_ev);
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      result.stop_reason = "stalled";
      break;
    }

    Drives g_next = gradient_from(problem, ev_next);
    // Curvature pair in minimization convention: y = grad_f_next - grad_f = -(g_next - g).
    Drives s = sub(u_next, u);
    Drives y = sub(g, g_next);
    const double sy = dot(s, y);
    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
      hist_s.push_back(std::move(s));
      hist_y.push_back(std::move(y));
      hist_rho.push_back(1.0 / sy);
      if (hist_s.size() > kHistory) {
        hist_s.erase(hist_s.begin());
        hist_y.erase(hist_y.begin());
        hist_rho.erase(hist_rho.begin());
      }
    }
    u = std::move(u_next);
    ev = std::move(ev_next);
    g = std::move(g_next);
  }

  result.drives = clamp_drives(u, bound);
  result.fidelity = ev.fidelity;
  result.iterations = iter;
  return result;
}

// --------------------------------------------------------------------------
// Duration sweep
// --------------------------------------------------------------------------

std::vector<SweepPoint> duration_sweep(const GateSpec& gate, const DeviceSpec& device,
                                       const ModelSpec& base_model,
                                       const std::vector<double>& durations_us,
                                       const std::filesystem::path& library_root,
                                       std::uint64_t seed, int jobs) {
  if (durations_us.empty()) throw InvalidArgument("sweep: no durations");
  for (std::size_t i = 0; i < durations_us.size(); ++i) {
    if (!(durations_us[i] > 0.0)) throw InvalidArgument("sweep: durations must be > 0");
    if (i > 0 && durations_us[i] < durations_us[i - 1]) {
      throw InvalidArgument("sweep: durations must be sorted ascending");
    }
  }

  std::vector<SweepPoint> points(durations_us.size());
  auto run_point = [&](std::size_t i) {
    ModelSpec model = base_model;
    model.duration_us = durations_us[i];
    SweepPoint& pt = points[i];
    pt.duration_us = durations_us[i];
    try {
      const PulseSpec pulse = compile_pulse(gate, device, model, Strategy::synthesize,
                                            library_root, splitmix64(seed ^ i));
      pt.infidelity = 1.0 - pulse.achieved_fidelity;
      pt.key = pulse.key;
      pt.status = "ok";
    } catch (const SynthesisError& e) {
      pt.infidelity = 1.0 - e.best_fidelity;
      pt.status = "below_floor";
    }
  };

  if (jobs <= 1 || points.size() <= 1) {
    for (std::size_t i = 0; i < points.size(); ++i) run_point(i);
  } else {
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next{0};
    const std::size_t nworkers = std::min<std::size_t>(static_cast<std::size_t>(jobs), points.size());
    for (std::size_t w = 0; w < nworkers; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < points.size(); i = next.fetch_add(1)) {
          run_point(i);
        }
      });
    }
    for (auto& t : workers) t.join();
  }
  return points;
}

}  // namespace ionpulse
