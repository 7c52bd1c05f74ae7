#include "ionpulse/plugin.hpp"

#include <cmath>

#include "ionpulse/errors.hpp"
#include "ionpulse/synth.hpp"
#include "ionpulse/util.hpp"

namespace ionpulse {

std::string GatePlugin::pulse_lookup_key(const GateSpec& gate, const DeviceSpec& device,
                                         const ModelSpec& model) const {
  return request_hash(gate, device, model);
}

PulseSpec GatePlugin::synthesize(const GateSpec& gate, const DeviceSpec& device,
                                 const ModelSpec& model, std::uint64_t seed) const {
  const ControlProblem problem = build_hamiltonian(gate, device, model);

  GrapeResult best = grape_optimize(problem, seed);
  std::uint64_t used_seed = seed;
  // Local optima below the caching floor get a couple of fresh seeded starts.
  for (int restart = 1; restart <= 2 && best.fidelity < kCacheFidelityFloor; ++restart) {
    const std::uint64_t retry_seed = splitmix64(seed ^ static_cast<std::uint64_t>(restart));
    GrapeResult retry = grape_optimize(problem, retry_seed);
    if (retry.fidelity > best.fidelity) {
      best = std::move(retry);
      used_seed = retry_seed;
    }
  }

  PulseSpec pulse;
  pulse.key = pulse_lookup_key(gate, device, model);
  pulse.gate = gate;
  pulse.device = device;
  pulse.model = model;
  pulse.duration_us = model.duration_us;
  pulse.channels = channels();
  for (std::size_t c = 0; c < pulse.channels.size(); ++c) {
    pulse.waveforms[pulse.channels[c]] = best.drives[c];
  }
  pulse.achieved_fidelity = best.fidelity;
  pulse.created_at = iso8601_now_utc();
  pulse.seed = used_seed;
  pulse.iterations = best.iterations;
  pulse.stop_reason = best.stop_reason;
  return pulse;
}

namespace {

void require_exact_keys(const std::map<std::string, double>& params,
                        std::initializer_list<const char*> keys,
                        const std::string& gate_type) {
  for (const char* key : keys) {
    if (!params.count(key)) {
      throw InvalidArgument(gate_type + ": missing parameter '" + std::string(key) + "'");
    }
  }
  if (params.size() != keys.size()) {
    throw InvalidArgument(gate_type + ": unexpected extra parameters");
  }
  for (const auto& [key, value] : params) {
    if (!std::isfinite(value)) {
      throw CanonicalizationError(gate_type + ": parameter '" + key + "' is non-finite");
    }
  }
}

class CdPlugin final : public GatePlugin {
 public:
  std::string gate_type() const override { return "CD"; }

  std::map<std::string, double> validate_and_normalize(
      const std::map<std::string, double>& params) const override {
    require_exact_keys(params, {"alpha_im", "alpha_re"}, "CD");
    return params;
  }

  std::vector<std::string> channels() const override { return {"Omega_x", "Omega_p"}; }

  ModelSpec default_model() const override {
    ModelSpec m;
    m.duration_us = 100.0;
    return m;
  }

  ControlProblem build_hamiltonian(const GateSpec& gate, const DeviceSpec& device,
                                   const ModelSpec& model) const override {
    return build_hamiltonian_cd(gate, device, model);
  }

  ComplexMatrix target_unitary(const GateSpec& gate, const FockSpace& space) const override {
    return target_unitary_cd(cd_alpha(gate), space);
  }
};

class CrPlugin final : public GatePlugin {
 public:
  std::string gate_type() const override { return "CR"; }

  std::map<std::string, double> validate_and_normalize(
      const std::map<std::string, double>& params) const override {
    require_exact_keys(params, {"theta"}, "CR");
    return {{"theta", canonical_cr_theta(params.at("theta"))}};
  }

  std::vector<std::string> channels() const override { return {"Omega"}; }

  ModelSpec default_model() const override {
    ModelSpec m;
    m.duration_us = 300.0;
    return m;
  }

  ControlProblem build_hamiltonian(const GateSpec& gate, const DeviceSpec& device,
                                   const ModelSpec& model) const override {
    return build_hamiltonian_cr(gate, device, model);
  }

  ComplexMatrix target_unitary(const GateSpec& gate, const FockSpace& space) const override {
    return target_unitary_cr(cr_theta(gate), space);
  }
};

class CsPlugin final : public GatePlugin {
 public:
  std::string gate_type() const override { return "CS"; }

  std::map<std::string, double> validate_and_normalize(
      const std::map<std::string, double>& params) const override {
    require_exact_keys(params, {"zeta_im", "zeta_re"}, "CS");
    return params;
  }

  std::vector<std::string> channels() const override { return {"Omega_x", "Omega_p"}; }

  ModelSpec default_model() const override {
    ModelSpec m;
    m.duration_us = 1300.0;
    m.fid_tol = 1e-5;  // second sideband converges deep; match that
    return m;
  }

  ControlProblem build_hamiltonian(const GateSpec& gate, const DeviceSpec& device,
                                   const ModelSpec& model) const override {
    return build_hamiltonian_cs(gate, device, model);
  }

  ComplexMatrix target_unitary(const GateSpec& gate, const FockSpace& space) const override {
    return target_unitary_cs(cs_zeta(gate), space);
  }
};

}  // namespace

void PluginRegistry::register_plugin(std::shared_ptr<const GatePlugin> plugin) {
  if (!plugin) throw InvalidArgument("register_plugin: null plugin");
  const std::string type = plugin->gate_type();
  std::lock_guard lock(mutex_);
  if (plugins_.count(type)) {
    throw ConflictError("gate type '" + type + "' is already registered");
  }
  plugins_.emplace(type, std::move(plugin));
}

const GatePlugin& PluginRegistry::require(const std::string& gate_type) const {
  std::lock_guard lock(mutex_);
  auto it = plugins_.find(gate_type);
  if (it == plugins_.end()) {
    throw InvalidArgument("no plugin registered for gate type '" + gate_type + "'");
  }
  return *it->second;
}

std::shared_ptr<const GatePlugin> PluginRegistry::find(const std::string& gate_type) const {
  std::lock_guard lock(mutex_);
  auto it = plugins_.find(gate_type);
  return it == plugins_.end() ? nullptr : it->second;
}

std::vector<std::string> PluginRegistry::registered_types() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> types;
  for (const auto& [type, plugin] : plugins_) types.push_back(type);
  return types;
}

PluginRegistry& global_registry() {
  static PluginRegistry* registry = [] {
    auto* r = new PluginRegistry();
    r->register_plugin(std::make_shared<CdPlugin>());
    r->register_plugin(std::make_shared<CrPlugin>());
    r->register_plugin(std::make_shared<CsPlugin>());
    return r;
  }();
  return *registry;
}

}  // namespace ionpulse
