#include "ionpulse/codebook.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <sstream>

#include "ionpulse/errors.hpp"
#include "ionpulse/plugin.hpp"
#include "ionpulse/util.hpp"

namespace ionpulse {

namespace {
std::atomic<std::uint64_t> g_synthesis_invocations{0};
}

std::uint64_t synthesis_invocations() { return g_synthesis_invocations.load(); }

void ModelSpec::validate() const {
  auto bad = [](const std::string& why) { throw InvalidArgument("model: " + why); };
  if (n_max < 2) bad("n_max must be >= 2");
  if (num_tslots < 1) bad("num_tslots must be >= 1");
  if (!std::isfinite(duration_us) || duration_us <= 0.0) bad("duration_us must be > 0");
  if (!std::isfinite(amp_bound) || amp_bound <= 0.0) bad("amp_bound must be > 0");
  if (!std::isfinite(fid_tol) || fid_tol <= 0.0) bad("fid_tol must be > 0");
  if (!std::isfinite(grad_tol) || grad_tol <= 0.0) bad("grad_tol must be > 0");
  if (max_iter < 1) bad("max_iter must be >= 1");
}

void PulseSpec::validate() const {
  if (channels.empty()) throw InvalidArgument("pulse: no channels");
  if (duration_us != model.duration_us) {
    throw InvalidArgument("pulse: duration does not match model");
  }
  if (waveforms.size() != channels.size()) {
    throw InvalidArgument("pulse: waveform/channel count mismatch");
  }
  for (const auto& name : channels) {
    auto it = waveforms.find(name);
    if (it == waveforms.end()) throw InvalidArgument("pulse: missing waveform '" + name + "'");
    if (it->second.size() != static_cast<std::size_t>(model.num_tslots)) {
      throw InvalidArgument("pulse: waveform '" + name + "' length != num_tslots");
    }
    for (double u : it->second) {
      if (!std::isfinite(u) || std::abs(u) > model.amp_bound * (1.0 + 1e-12)) {
        throw InvalidArgument("pulse: sample outside +/-amp_bound on '" + name + "'");
      }
    }
  }
  if (!std::isfinite(achieved_fidelity) || achieved_fidelity < 0.0 || achieved_fidelity > 1.0) {
    throw InvalidArgument("pulse: achieved_fidelity outside [0, 1]");
  }
  if (key != request_hash(gate, device, model)) {
    throw CorruptEntry("pulse: stored key does not match recomputed (gate, device, model) hash");
  }
}

std::filesystem::path default_library_root() {
  if (const char* env = std::getenv("PULSE_LIBRARY_ROOT"); env && *env) {
    return env;
  }
  return "library";
}

std::filesystem::path pulse_path(const std::filesystem::path& root, const std::string& key) {
  if (key.size() != 64) throw InvalidArgument("pulse key must be 64 hex chars");
  return root / key.substr(0, 2) / (key + ".json");
}

std::string pulse_to_json(const PulseSpec& pulse, bool include_integrity) {
  std::ostringstream out;
  out << "{\"achieved_fidelity\":" << json_float(pulse.achieved_fidelity);
  out << ",\"channels\":[";
  for (std::size_t i = 0; i < pulse.channels.size(); ++i) {
    if (i) out << ',';
    out << '"' << json_escape(pulse.channels[i]) << '"';
  }
  out << "],\"created_at\":\"" << json_escape(pulse.created_at) << '"';
  out << ",\"device\":" << canonical_device_json(pulse.device);
  out << ",\"duration_us\":" << json_float(pulse.duration_us);
  out << ",\"format_version\":1";
  out << ",\"gate\":" << canonical_gate_json(pulse.gate);
  if (include_integrity) {
    out << ",\"integrity_sha256\":\"" << sha256_hex(pulse_to_json(pulse, false)) << '"';
  }
  out << ",\"iterations\":" << pulse.iterations;
  out << ",\"key\":\"" << json_escape(pulse.key) << '"';
  out << ",\"model\":" << canonical_model_json(pulse.model);
  out << ",\"seed\":" << pulse.seed;
  out << ",\"stop_reason\":\"" << json_escape(pulse.stop_reason) << '"';
  out << ",\"waveforms\":{";
  bool first = true;
  for (const auto& [name, samples] : pulse.waveforms) {
    if (!first) out << ',';
    first = false;
    out << '"' << json_escape(name) << "\":" << json_float_array(samples);
  }
  out << "}}";
  return out.str();
}

std::filesystem::path store(const PulseSpec& pulse, const std::filesystem::path& root) {
  pulse.validate();
  const auto path = pulse_path(root, pulse.key);
  std::filesystem::create_directories(path.parent_path());
  atomic_write_file(path, pulse_to_json(pulse));
  return path;
}

namespace {

GateSpec gate_from_json(const nlohmann::json& j) {
  GateSpec gate;
  gate.type = j.at("type").get<std::string>();
  for (const auto& [key, value] : j.at("params").items()) {
    gate.params[key] = value.get<double>();
  }
  return gate;
}

DeviceSpec device_from_json(const nlohmann::json& j) {
  DeviceSpec d;
  d.name = j.at("name").get<std::string>();
  d.eta = j.at("eta").get<double>();
  d.omega_m = j.at("omega_m_rad_s").get<double>();
  d.omega_j = j.at("omega_j_rad_s").get<double>();
  d.delta = j.at("delta_rad_s").get<double>();
  d.omega_max = j.at("omega_max_rad_s").get<double>();
  if (!j.at("omega_q_rad_s").is_null()) {
    d.omega_q = j.at("omega_q_rad_s").get<double>();
  }
  for (const auto& row : j.at("participation")) {
    d.participation.push_back(row.get<std::vector<double>>());
  }
  for (const auto& [key, value] : j.at("coherence").items()) {
    d.coherence[key] = value.get<double>();
  }
  return d;
}

ModelSpec model_from_json(const nlohmann::json& j) {
  ModelSpec m;
  m.n_max = j.at("n_max").get<int>();
  m.num_tslots = j.at("num_tslots").get<int>();
  m.duration_us = j.at("duration_us").get<double>();
  m.amp_bound = j.at("amp_bound").get<double>();
  m.fid_tol = j.at("fid_tol").get<double>();
  m.grad_tol = j.at("grad_tol").get<double>();
  m.max_iter = j.at("max_iter").get<int>();
  return m;
}

}  // namespace

PulseSpec load_pulse(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw CorruptEntry("unparseable pulse file " + path.string() + ": " + e.what());
  }

  PulseSpec pulse;
  try {
    if (j.at("format_version").get<int>() != 1) {
      throw CorruptEntry("unsupported pulse format_version in " + path.string());
    }
    pulse.key = j.at("key").get<std::string>();
    pulse.gate = gate_from_json(j.at("gate"));
    pulse.device = device_from_json(j.at("device"));
    pulse.model = model_from_json(j.at("model"));
    pulse.duration_us = j.at("duration_us").get<double>();
    pulse.channels = j.at("channels").get<std::vector<std::string>>();
    for (const auto& [name, samples] : j.at("waveforms").items()) {
      pulse.waveforms[name] = samples.get<std::vector<double>>();
    }
    pulse.achieved_fidelity = j.at("achieved_fidelity").get<double>();
    pulse.created_at = j.at("created_at").get<std::string>();
    pulse.seed = j.at("seed").get<std::uint64_t>();
    pulse.iterations = j.at("iterations").get<int>();
    pulse.stop_reason = j.at("stop_reason").get<std::string>();

    const std::string stored_digest = j.at("integrity_sha256").get<std::string>();
    if (stored_digest != sha256_hex(pulse_to_json(pulse, false))) {
      throw CorruptEntry("integrity digest mismatch in " + path.string());
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptEntry("malformed pulse file " + path.string() + ": " + e.what());
  }

  if (path.filename().string() != pulse.key + ".json") {
    throw CorruptEntry("filename does not match stored key: " + path.string());
  }
  pulse.validate();  // also recomputes the (gate, device, model) key
  return pulse;
}

std::optional<PulseSpec> lookup_exact(const GateSpec& gate, const DeviceSpec& device,
                                      const ModelSpec& model,
                                      const std::filesystem::path& root) {
  const auto path = pulse_path(root, request_hash(gate, device, model));
  if (!std::filesystem::exists(path)) return std::nullopt;
  return load_pulse(path);
}

std::vector<PulseSpec> list_entries(const std::filesystem::path& root) {
  std::vector<PulseSpec> entries;
  if (!std::filesystem::exists(root)) return entries;
  for (const auto& shard : std::filesystem::directory_iterator(root)) {
    if (!shard.is_directory()) continue;
    for (const auto& file : std::filesystem::directory_iterator(shard.path())) {
      if (file.path().extension() != ".json") continue;
      try {
        entries.push_back(load_pulse(file.path()));
      } catch (const Error&) {
        // Unreadable or tampered entries are skipped, never deleted.
      }
    }
  }
  return entries;
}

std::optional<PulseSpec> fuzzy_lookup(const GateSpec& gate, const DeviceSpec& device,
                                      const std::filesystem::path& root) {
  const std::string device_identity = canonical_device_json(device);
  std::optional<PulseSpec> best;
  for (auto& entry : list_entries(root)) {
    if (entry.gate.type != gate.type || entry.gate.params != gate.params) continue;
    if (canonical_device_json(entry.device) != device_identity) continue;
    if (!best || entry.achieved_fidelity > best->achieved_fidelity ||
        (entry.achieved_fidelity == best->achieved_fidelity && entry.key < best->key)) {
      best = std::move(entry);
    }
  }
  return best;
}

Strategy parse_strategy(const std::string& name) {
  if (name == "lookup") return Strategy::lookup;
  if (name == "synthesize") return Strategy::synthesize;
  if (name == "hybrid") return Strategy::hybrid;
  throw InvalidArgument("unknown strategy '" + name + "' (lookup|synthesize|hybrid)");
}

std::string strategy_name(Strategy strategy) {
  switch (strategy) {
    case Strategy::lookup: return "lookup";
    case Strategy::synthesize: return "synthesize";
    case Strategy::hybrid: return "hybrid";
  }
  return "?";
}

PulseSpec compile_pulse(const GateSpec& gate, const DeviceSpec& device,
                        const ModelSpec& model, Strategy strategy,
                        const std::filesystem::path& root, std::uint64_t seed,
                        const PluginRegistry* registry) {
  const PluginRegistry& reg = registry ? *registry : global_registry();
  const GatePlugin& plugin = reg.require(gate.type);

  GateSpec canonical = gate;
  canonical.params = plugin.validate_and_normalize(gate.params);
  device.validate();
  model.validate();

  if (strategy == Strategy::lookup || strategy == Strategy::hybrid) {
    if (auto hit = lookup_exact(canonical, device, model, root)) {
      return *hit;
    }
    if (strategy == Strategy::lookup) {
      throw LookupMiss("no cached pulse for " + canonical.type + " key " +
                       request_hash(canonical, device, model));
    }
  }

  g_synthesis_invocations.fetch_add(1);
  PulseSpec pulse = plugin.synthesize(canonical, device, model, seed);
  if (pulse.achieved_fidelity < kCacheFidelityFloor) {
    throw SynthesisError("synthesis for " + canonical.type + " stopped below caching floor (F=" +
                             std::to_string(pulse.achieved_fidelity) + ")",
                         pulse.achieved_fidelity);
  }
  store(pulse, root);
  return pulse;
}

}  // namespace ionpulse
