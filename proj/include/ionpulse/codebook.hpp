#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ionpulse/canonical.hpp"
#include "ionpulse/device.hpp"
#include "ionpulse/gates.hpp"
#include "ionpulse/model.hpp"

namespace ionpulse {

class PluginRegistry;

inline constexpr std::uint64_t kDefaultSeed = 1;

/// Synthesized pulses below this closed-system fidelity are reported as
/// failures instead of being cached.
inline constexpr double kCacheFidelityFloor = 0.98;

/// Stored artifact: optimized piecewise-constant waveforms plus everything
/// needed to re-simulate and export them.
struct PulseSpec {
  std::string key;  // 64-hex SHA-256 of (gate, device, model)
  GateSpec gate;
  DeviceSpec device;
  ModelSpec model;
  double duration_us = 0.0;
  std::vector<std::string> channels;
  std::map<std::string, std::vector<double>> waveforms;
  double achieved_fidelity = 0.0;
  std::string created_at;
  std::uint64_t seed = 0;
  int iterations = 0;
  std::string stop_reason;

  /// Checks waveform lengths, amplitude bounds, and that the stored key
  /// matches the recomputed hash of the embedded snapshots.
  void validate() const;
};

/// $PULSE_LIBRARY_ROOT if set, else ./library.
std::filesystem::path default_library_root();

/// library_root/<key[0:2]>/<key>.json
std::filesystem::path pulse_path(const std::filesystem::path& root, const std::string& key);

/// Canonical byte form of a pulse record (integrity digest included unless
/// excluded for computing that digest).
std::string pulse_to_json(const PulseSpec& pulse, bool include_integrity = true);

/// Atomic, idempotent write under the pulse's hash path.
std::filesystem::path store(const PulseSpec& pulse, const std::filesystem::path& root);

/// Reads and verifies a stored pulse; throws CorruptEntry if the content was
/// tampered with or the filename key does not match the embedded specs.
PulseSpec load_pulse(const std::filesystem::path& path);

std::optional<PulseSpec> lookup_exact(const GateSpec& gate, const DeviceSpec& device,
                                      const ModelSpec& model,
                                      const std::filesystem::path& root);

/// Highest-fidelity cached pulse for the same gate physics and device
/// content, regardless of model; exact matches are preferred upstream.
/// Unreadable or corrupt entries are skipped, never deleted.
std::optional<PulseSpec> fuzzy_lookup(const GateSpec& gate, const DeviceSpec& device,
                                      const std::filesystem::path& root);

/// All readable entries in the library (corrupt files are skipped).
std::vector<PulseSpec> list_entries(const std::filesystem::path& root);

enum class Strategy { lookup, synthesize, hybrid };

Strategy parse_strategy(const std::string& name);
std::string strategy_name(Strategy strategy);

/// The central pipeline call. lookup: cached pulse or LookupMiss.
/// synthesize: always run the optimizer and store the result. hybrid
/// (default): lookup first, synthesize and cache on miss.
PulseSpec compile_pulse(const GateSpec& gate, const DeviceSpec& device,
                        const ModelSpec& model, Strategy strategy,
                        const std::filesystem::path& root,
                        std::uint64_t seed = kDefaultSeed,
                        const PluginRegistry* registry = nullptr);

/// Process-wide count of optimizer dispatches made by compile_pulse; tests
/// and the assembler use deltas of this to assert cache behaviour.
std::uint64_t synthesis_invocations();

}  // namespace ionpulse
