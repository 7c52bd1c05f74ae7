#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "ionpulse/codebook.hpp"
#include "ionpulse/control.hpp"
#include "ionpulse/device.hpp"
#include "ionpulse/gates.hpp"
#include "ionpulse/model.hpp"

namespace ionpulse {

enum class MatchMode { exact, fuzzy };

/// Lazy user-facing handle: stores the specs at construction, defers all
/// computation to pulse()/unitary(), and memoizes both. fuzzy match mode
/// falls back from the exact hash to the highest-fidelity cached pulse for
/// the same gate physics and device before synthesizing.
class CompiledGate {
 public:
  CompiledGate(GateSpec gate, DeviceSpec device, ModelSpec model,
               std::filesystem::path library_root, MatchMode match = MatchMode::fuzzy,
               Strategy strategy = Strategy::hybrid, std::uint64_t seed = kDefaultSeed);

  /// Builders that start from the plugin's default model; call sites override
  /// fields on the returned gate via with_model() when needed.
  static CompiledGate cd(Complex alpha, const DeviceSpec& device,
                         const std::filesystem::path& library_root);
  static CompiledGate cr(double theta, const DeviceSpec& device,
                         const std::filesystem::path& library_root);
  static CompiledGate cs(Complex zeta, const DeviceSpec& device,
                         const std::filesystem::path& library_root);

  CompiledGate& with_model(const ModelSpec& model);
  CompiledGate& with_match(MatchMode match);
  CompiledGate& with_strategy(Strategy strategy);
  CompiledGate& with_seed(std::uint64_t seed);

  const GateSpec& gate() const { return gate_; }
  const DeviceSpec& device() const { return device_; }
  const ModelSpec& model() const { return model_; }

  /// Resolve the pulse: exact hash, then (fuzzy) best cached match, then
  /// synthesis under the configured strategy. Memoized; concurrent first use
  /// computes at most once.
  const PulseSpec& pulse();

  /// Propagate the resolved waveform through the spin-motion Hamiltonian;
  /// memoized separately from pulse().
  const ComplexMatrix& unitary();

 private:
  GateSpec gate_;
  DeviceSpec device_;
  ModelSpec model_;
  std::filesystem::path root_;
  MatchMode match_;
  Strategy strategy_;
  std::uint64_t seed_;
  std::mutex mutex_;
  std::optional<PulseSpec> pulse_;
  std::optional<ComplexMatrix> unitary_;
};

/// omega_L = omega_q - omega_m + delta; ExportError when omega_q is absent.
double laser_frequency(const DeviceSpec& device);

struct ScheduleEntry {
  std::string gate_id;  // gate type, or marker name for ideal entries
  bool ideal = false;
  GateSpec gate;  // empty params for ideal markers
  double t_start_us = 0.0;
  double duration_us = 0.0;
  double omega_l_rad_s = 0.0;  // 0 for ideal markers
  std::vector<std::string> channels;
  std::map<std::string, std::vector<double>> waveforms;
};

struct Schedule {
  std::string name;
  DeviceSpec device;
  ModelSpec model;  // base numerics (n_max etc.); per-entry durations differ
  double buffer_us = 1.0;
  std::vector<ScheduleEntry> entries;

  /// Sum of entry durations plus one buffer between adjacent entries.
  double total_duration_us() const;
};

bool schedules_equal(const Schedule& a, const Schedule& b);

/// One circuit element: a pulsed gate or an ideal single-qubit marker.
struct CircuitOp {
  bool ideal = false;
  std::string ideal_name;  // "H"
  GateSpec gate;
  std::optional<ModelSpec> model;  // defaults to the plugin's model otherwise
};

/// JSON circuit description (format_version 1) used by the CLI.
std::vector<CircuitOp> load_circuit_file(const std::filesystem::path& path);

/// Resolve every gate through the hybrid strategy and concatenate waveforms
/// with buffer_us gaps. Fails with the index of the offending gate.
Schedule assemble(const std::string& name, const DeviceSpec& device, const ModelSpec& model,
                  const std::vector<CircuitOp>& ops, double buffer_us,
                  const std::filesystem::path& library_root,
                  std::uint64_t seed = kDefaultSeed);

/// Product of per-entry unitaries (pulse entries re-propagated from their
/// stored waveforms, ideal markers applied exactly), later entries leftmost.
ComplexMatrix simulate_schedule(const Schedule& schedule);

// Export backends. Both are deterministic byte-for-byte for an identical
// schedule and parse back to an equal schedule.
std::filesystem::path export_artiq_like(const Schedule& schedule,
                                        const std::filesystem::path& out_dir);
std::filesystem::path export_jaqal_like(const Schedule& schedule,
                                        const std::filesystem::path& out_dir);
Schedule parse_artiq_like(const std::filesystem::path& path);
Schedule parse_jaqal_like(const std::filesystem::path& path);

}  // namespace ionpulse
