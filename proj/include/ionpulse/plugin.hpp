#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ionpulse/codebook.hpp"
#include "ionpulse/control.hpp"
#include "ionpulse/device.hpp"
#include "ionpulse/gates.hpp"
#include "ionpulse/model.hpp"

namespace ionpulse {

/// Everything a gate type must provide to be first-class: parameter
/// canonicalization, codebook keying, Hamiltonian construction, and
/// synthesis. Registered plugins are automatically supported by the
/// codebook, assembler, and exporters.
class GatePlugin {
 public:
  virtual ~GatePlugin() = default;

  virtual std::string gate_type() const = 0;

  /// Validated, canonical parameter map; must be idempotent.
  virtual std::map<std::string, double> validate_and_normalize(
      const std::map<std::string, double>& params) const = 0;

  /// Codebook key; default is the canonical (gate, device, model) hash.
  virtual std::string pulse_lookup_key(const GateSpec& gate, const DeviceSpec& device,
                                       const ModelSpec& model) const;

  virtual std::vector<std::string> channels() const = 0;

  /// Gate-appropriate defaults (duration, tolerances).
  virtual ModelSpec default_model() const { return {}; }

  virtual ControlProblem build_hamiltonian(const GateSpec& gate, const DeviceSpec& device,
                                           const ModelSpec& model) const = 0;

  virtual ComplexMatrix target_unitary(const GateSpec& gate, const FockSpace& space) const = 0;

  /// Default: GRAPE on build_hamiltonian(), wrapped into a PulseSpec.
  /// Retries with derived seeds while below the caching floor.
  virtual PulseSpec synthesize(const GateSpec& gate, const DeviceSpec& device,
                               const ModelSpec& model, std::uint64_t seed) const;
};

/// Write-once-at-startup, read-many plugin table.
class PluginRegistry {
 public:
  void register_plugin(std::shared_ptr<const GatePlugin> plugin);
  const GatePlugin& require(const std::string& gate_type) const;
  std::shared_ptr<const GatePlugin> find(const std::string& gate_type) const;
  std::vector<std::string> registered_types() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const GatePlugin>> plugins_;
};

/// Process-wide registry with the CD/CR/CS builtins pre-registered.
PluginRegistry& global_registry();

}  // namespace ionpulse
