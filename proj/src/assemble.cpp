#include "ionpulse/assemble.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

#include "ionpulse/errors.hpp"
#include "ionpulse/plugin.hpp"
#include "ionpulse/simulate.hpp"
#include "ionpulse/synth.hpp"
#include "ionpulse/util.hpp"

namespace ionpulse {

// --------------------------------------------------------------------------
// CompiledGate
// --------------------------------------------------------------------------

CompiledGate::CompiledGate(GateSpec gate, DeviceSpec device, ModelSpec model,
                           std::filesystem::path library_root, MatchMode match,
                           Strategy strategy, std::uint64_t seed)
    : gate_(std::move(gate)),
      device_(std::move(device)),
      model_(model),
      root_(std::move(library_root)),
      match_(match),
      strategy_(strategy),
      seed_(seed) {
  const GatePlugin& plugin = global_registry().require(gate_.type);
  gate_.params = plugin.validate_and_normalize(gate_.params);
  device_.validate();
  model_.validate();
}

CompiledGate CompiledGate::cd(Complex alpha, const DeviceSpec& device,
                              const std::filesystem::path& library_root) {
  return {cd_gate(alpha), device, global_registry().require("CD").default_model(),
          library_root};
}

CompiledGate CompiledGate::cr(double theta, const DeviceSpec& device,
                              const std::filesystem::path& library_root) {
  return {cr_gate(theta), device, global_registry().require("CR").default_model(),
          library_root};
}

CompiledGate CompiledGate::cs(Complex zeta, const DeviceSpec& device,
                              const std::filesystem::path& library_root) {
  return {cs_gate(zeta), device, global_registry().require("CS").default_model(),
          library_root};
}

CompiledGate& CompiledGate::with_model(const ModelSpec& model) {
  model.validate();
  model_ = model;
  return *this;
}

CompiledGate& CompiledGate::with_match(MatchMode match) {
  match_ = match;
  return *this;
}

CompiledGate& CompiledGate::with_strategy(Strategy strategy) {
  strategy_ = strategy;
  return *this;
}

CompiledGate& CompiledGate::with_seed(std::uint64_t seed) {
  seed_ = seed;
  return *this;
}

const PulseSpec& CompiledGate::pulse() {
  std::lock_guard lock(mutex_);
  if (pulse_) return *pulse_;
  if (auto exact = lookup_exact(gate_, device_, model_, root_)) {
    pulse_ = std::move(*exact);
    return *pulse_;
  }
  if (match_ == MatchMode::fuzzy) {
    if (auto best = fuzzy_lookup(gate_, device_, root_)) {
      pulse_ = std::move(*best);
      return *pulse_;
    }
  }
  pulse_ = compile_pulse(gate_, device_, model_, strategy_, root_, seed_);
  return *pulse_;
}

const ComplexMatrix& CompiledGate::unitary() {
  const PulseSpec& p = pulse();
  std::lock_guard lock(mutex_);
  if (unitary_) return *unitary_;
  const GatePlugin& plugin = global_registry().require(p.gate.type);
  const ControlProblem problem = plugin.build_hamiltonian(p.gate, device_, p.model);
  unitary_ = propagate(problem, p.waveforms);
  return *unitary_;
}

// --------------------------------------------------------------------------
// Schedules
// --------------------------------------------------------------------------

double laser_frequency(const DeviceSpec& device) {
  if (!device.omega_q) {
    throw ExportError("device '" + device.name +
                      "' has no omega_q; add it to the calibration file to export "
                      "laser frequencies");
  }
  return *device.omega_q - device.omega_m + device.delta;
}

double Schedule::total_duration_us() const {
  double total = 0.0;
  for (const auto& entry : entries) total += entry.duration_us;
  if (entries.size() > 1) total += buffer_us * static_cast<double>(entries.size() - 1);
  return total;
}

bool schedules_equal(const Schedule& a, const Schedule& b) {
  if (a.name != b.name || a.buffer_us != b.buffer_us) return false;
  if (canonical_device_json(a.device) != canonical_device_json(b.device)) return false;
  if (canonical_model_json(a.model) != canonical_model_json(b.model)) return false;
  if (a.entries.size() != b.entries.size()) return false;
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const auto& x = a.entries[i];
    const auto& y = b.entries[i];
    if (x.gate_id != y.gate_id || x.ideal != y.ideal) return false;
    if (x.gate.type != y.gate.type || x.gate.params != y.gate.params) return false;
    if (x.t_start_us != y.t_start_us || x.duration_us != y.duration_us) return false;
    if (x.omega_l_rad_s != y.omega_l_rad_s) return false;
    if (x.channels != y.channels || x.waveforms != y.waveforms) return false;
  }
  return true;
}

std::vector<CircuitOp> load_circuit_file(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("circuit file " + path.string() + ": " + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != 1) {
      throw InvalidArgument("circuit file: unsupported format_version");
    }
    std::vector<CircuitOp> ops;
    for (const auto& item : j.at("ops")) {
      CircuitOp op;
      if (item.contains("ideal")) {
        op.ideal = true;
        op.ideal_name = item.at("ideal").get<std::string>();
      } else {
        op.gate.type = item.at("gate").get<std::string>();
        for (const auto& [key, value] : item.at("params").items()) {
          op.gate.params[key] = value.get<double>();
        }
        if (item.contains("duration_us")) {
          ModelSpec m;  // filled against the plugin default at assembly time
          m.duration_us = item.at("duration_us").get<double>();
          op.model = m;
        }
      }
      ops.push_back(std::move(op));
    }
    return ops;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("circuit file " + path.string() + ": " + e.what());
  }
}

Schedule assemble(const std::string& name, const DeviceSpec& device, const ModelSpec& model,
                  const std::vector<CircuitOp>& ops, double buffer_us,
                  const std::filesystem::path& library_root, std::uint64_t seed) {
  if (name.empty() || name.find_first_of(" \t\n") != std::string::npos) {
    throw InvalidArgument("schedule name must be a non-empty token");
  }
  if (ops.empty()) throw InvalidArgument("assemble: need at least one gate");
  if (!(buffer_us >= 0.0)) throw InvalidArgument("assemble: buffer must be >= 0");

  Schedule schedule;
  schedule.name = name;
  schedule.device = device;
  schedule.model = model;
  schedule.buffer_us = buffer_us;

  const double omega_l = laser_frequency(device);
  double t = 0.0;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const CircuitOp& op = ops[i];
    ScheduleEntry entry;
    entry.t_start_us = t;
    if (op.ideal) {
      entry.ideal = true;
      entry.gate_id = op.ideal_name;
    } else {
      try {
        const GatePlugin& plugin = global_registry().require(op.gate.type);
        ModelSpec gate_model = plugin.default_model();
        gate_model.n_max = model.n_max;
        gate_model.num_tslots = model.num_tslots;
        gate_model.amp_bound = model.amp_bound;
        if (op.model) gate_model.duration_us = op.model->duration_us;
        CompiledGate cg(op.gate, device, gate_model, library_root, MatchMode::fuzzy,
                        Strategy::hybrid, seed);
        const PulseSpec& pulse = cg.pulse();
        entry.gate_id = pulse.gate.type;
        entry.gate = pulse.gate;
        entry.duration_us = pulse.duration_us;
        entry.omega_l_rad_s = omega_l;
        entry.channels = pulse.channels;
        entry.waveforms = pulse.waveforms;
      } catch (const Error& e) {
        throw Error("assemble: gate " + std::to_string(i) + " (" + op.gate.type +
                    ") failed: " + e.what());
      }
    }
    t += entry.duration_us + buffer_us;
    schedule.entries.push_back(std::move(entry));
  }
  return schedule;
}

ComplexMatrix simulate_schedule(const Schedule& schedule) {
  const FockSpace space(schedule.model.n_max);
  const int joint = 2 * space.dim();
  ComplexMatrix u = ComplexMatrix::Identity(joint, joint);
  for (const auto& entry : schedule.entries) {
    if (entry.ideal) {
      if (entry.gate_id != "H") {
        throw InvalidArgument("simulate_schedule: unknown ideal marker '" + entry.gate_id + "'");
      }
      u = hadamard_on_spin(space.dim()) * u;
      continue;
    }
    const GatePlugin& plugin = global_registry().require(entry.gate.type);
    ModelSpec model = schedule.model;
    model.duration_us = entry.duration_us;
    model.num_tslots = static_cast<int>(entry.waveforms.begin()->second.size());
    const ControlProblem problem = plugin.build_hamiltonian(entry.gate, schedule.device, model);
    u = propagate(problem, entry.waveforms) * u;
  }
  return u;
}

// --------------------------------------------------------------------------
// Export: ARTIQ/DAX-like JSON
// --------------------------------------------------------------------------

namespace {

std::string entry_to_json(const ScheduleEntry& e) {
  std::ostringstream out;
  out << "{\"channels\":{";
  bool first = true;
  for (const auto& name : e.channels) {
    if (!first) out << ',';
    first = false;
    out << '"' << json_escape(name) << "\":" << json_float_array(e.waveforms.at(name));
  }
  out << "},\"duration_us\":" << json_float(e.duration_us);
  out << ",\"gate\":" << canonical_gate_json(e.gate);
  out << ",\"gate_id\":\"" << json_escape(e.gate_id) << '"';
  out << ",\"ideal\":" << (e.ideal ? "true" : "false");
  out << ",\"omega_l_rad_s\":" << json_float(e.omega_l_rad_s);
  out << ",\"t_start_us\":" << json_float(e.t_start_us) << '}';
  return out.str();
}

}  // namespace

std::filesystem::path export_artiq_like(const Schedule& schedule,
                                        const std::filesystem::path& out_dir) {
  std::ostringstream out;
  out << "{\"buffer_us\":" << json_float(schedule.buffer_us);
  out << ",\"device\":" << canonical_device_json(schedule.device);
  out << ",\"entries\":[";
  for (std::size_t i = 0; i < schedule.entries.size(); ++i) {
    if (i) out << ',';
    out << entry_to_json(schedule.entries[i]);
  }
  out << "],\"format\":\"artiq-dax-like\",\"format_version\":1";
  out << ",\"model\":" << canonical_model_json(schedule.model);
  out << ",\"name\":\"" << json_escape(schedule.name) << "\"}";

  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / (schedule.name + ".artiq.json");
  atomic_write_file(path, out.str());
  return path;
}

Schedule parse_artiq_like(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IoError("schedule file " + path.string() + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "artiq-dax-like" ||
        j.at("format_version").get<int>() != 1) {
      throw IoError("schedule file " + path.string() + ": unknown format");
    }
    Schedule s;
    s.name = j.at("name").get<std::string>();
    s.buffer_us = j.at("buffer_us").get<double>();
    const auto& d = j.at("device");
    s.device.name = d.at("name").get<std::string>();
    s.device.eta = d.at("eta").get<double>();
    s.device.omega_m = d.at("omega_m_rad_s").get<double>();
    s.device.omega_j = d.at("omega_j_rad_s").get<double>();
    s.device.delta = d.at("delta_rad_s").get<double>();
    s.device.omega_max = d.at("omega_max_rad_s").get<double>();
    if (!d.at("omega_q_rad_s").is_null()) s.device.omega_q = d.at("omega_q_rad_s").get<double>();
    for (const auto& row : d.at("participation")) {
      s.device.participation.push_back(row.get<std::vector<double>>());
    }
    for (const auto& [key, value] : d.at("coherence").items()) {
      s.device.coherence[key] = value.get<double>();
    }
    const auto& m = j.at("model");
    s.model.n_max = m.at("n_max").get<int>();
    s.model.num_tslots = m.at("num_tslots").get<int>();
    s.model.duration_us = m.at("duration_us").get<double>();
    s.model.amp_bound = m.at("amp_bound").get<double>();
    s.model.fid_tol = m.at("fid_tol").get<double>();
    s.model.grad_tol = m.at("grad_tol").get<double>();
    s.model.max_iter = m.at("max_iter").get<int>();
    for (const auto& je : j.at("entries")) {
      ScheduleEntry e;
      e.gate_id = je.at("gate_id").get<std::string>();
      e.ideal = je.at("ideal").get<bool>();
      e.gate.type = je.at("gate").at("type").get<std::string>();
      for (const auto& [key, value] : je.at("gate").at("params").items()) {
        e.gate.params[key] = value.get<double>();
      }
      e.t_start_us = je.at("t_start_us").get<double>();
      e.duration_us = je.at("duration_us").get<double>();
      e.omega_l_rad_s = je.at("omega_l_rad_s").get<double>();
      for (const auto& [name, samples] : je.at("channels").items()) {
        e.channels.push_back(name);
        e.waveforms[name] = samples.get<std::vector<double>>();
      }
      s.entries.push_back(std::move(e));
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("schedule file " + path.string() + ": " + e.what());
  }
}

// --------------------------------------------------------------------------
// Export: JaqalPaw-like text
// --------------------------------------------------------------------------

std::filesystem::path export_jaqal_like(const Schedule& schedule,
                                        const std::filesystem::path& out_dir) {
  std::ostringstream out;
  out << "# jaqal-like pulse schedule\n";
  out << "format_version 1\n";
  out << "schedule " << schedule.name << '\n';
  out << "buffer_us " << format_float17(schedule.buffer_us) << '\n';
  const DeviceSpec& d = schedule.device;
  out << "device.name " << d.name << '\n';
  out << "device.eta " << format_float17(d.eta) << '\n';
  out << "device.omega_m_rad_s " << format_float17(d.omega_m) << '\n';
  out << "device.omega_j_rad_s " << format_float17(d.omega_j) << '\n';
  out << "device.delta_rad_s " << format_float17(d.delta) << '\n';
  out << "device.omega_max_rad_s " << format_float17(d.omega_max) << '\n';
  out << "device.omega_q_rad_s " << (d.omega_q ? format_float17(*d.omega_q) : "none") << '\n';
  out << "device.participation ";
  for (std::size_t k = 0; k < d.participation.size(); ++k) {
    if (k) out << "; ";
    for (std::size_t i = 0; i < d.participation[k].size(); ++i) {
      if (i) out << ' ';
      out << format_float17(d.participation[k][i]);
    }
  }
  out << '\n';
  for (const auto& [key, value] : d.coherence) {
    out << "device.coherence." << key << ' ' << format_float17(value) << '\n';
  }
  const ModelSpec& m = schedule.model;
  out << "model.n_max " << m.n_max << '\n';
  out << "model.num_tslots " << m.num_tslots << '\n';
  out << "model.duration_us " << format_float17(m.duration_us) << '\n';
  out << "model.amp_bound " << format_float17(m.amp_bound) << '\n';
  out << "model.fid_tol " << format_float17(m.fid_tol) << '\n';
  out << "model.grad_tol " << format_float17(m.grad_tol) << '\n';
  out << "model.max_iter " << m.max_iter << '\n';

  for (const auto& e : schedule.entries) {
    if (e.ideal) {
      out << "ideal " << e.gate_id << ' ' << format_float17(e.t_start_us) << '\n';
      continue;
    }
    out << "pulse " << e.gate_id << ' ' << format_float17(e.t_start_us) << ' '
        << format_float17(e.duration_us) << ' ' << format_float17(e.omega_l_rad_s) << '\n';
    for (const auto& [key, value] : e.gate.params) {
      out << "  gparam " << key << ' ' << format_float17(value) << '\n';
    }
    for (const auto& name : e.channels) {
      out << "  channel " << name;
      for (double v : e.waveforms.at(name)) out << ' ' << format_float17(v);
      out << '\n';
    }
  }
  out << "end\n";

  std::filesystem::create_directories(out_dir);
  const auto path = out_dir / (schedule.name + ".jaqal");
  atomic_write_file(path, out.str());
  return path;
}

Schedule parse_jaqal_like(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  Schedule s;
  ScheduleEntry* current = nullptr;
  std::string line;
  bool saw_end = false;
  int line_no = 0;
  auto fail = [&](const std::string& why) {
    throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "format_version") {
      int v;
      ls >> v;
      if (v != 1) fail("unsupported format_version");
    } else if (tok == "schedule") {
      ls >> s.name;
    } else if (tok == "buffer_us") {
      std::string v;
      ls >> v;
      s.buffer_us = parse_float(v);
    } else if (tok == "device.name") {
      ls >> s.device.name;
    } else if (tok == "device.eta") {
      std::string v;
      ls >> v;
      s.device.eta = parse_float(v);
    } else if (tok == "device.omega_m_rad_s") {
      std::string v;
      ls >> v;
      s.device.omega_m = parse_float(v);
    } else if (tok == "device.omega_j_rad_s") {
      std::string v;
      ls >> v;
      s.device.omega_j = parse_float(v);
    } else if (tok == "device.delta_rad_s") {
      std::string v;
      ls >> v;
      s.device.delta = parse_float(v);
    } else if (tok == "device.omega_max_rad_s") {
      std::string v;
      ls >> v;
      s.device.omega_max = parse_float(v);
    } else if (tok == "device.omega_q_rad_s") {
      std::string v;
      ls >> v;
      if (v != "none") s.device.omega_q = parse_float(v);
    } else if (tok == "device.participation") {
      std::string rest;
      std::getline(ls, rest);
      std::stringstream rows(rest);
      std::string row_text;
      while (std::getline(rows, row_text, ';')) {
        std::vector<double> row;
        std::stringstream es(row_text);
        std::string v;
        while (es >> v) row.push_back(parse_float(v));
        if (!row.empty()) s.device.participation.push_back(std::move(row));
      }
    } else if (tok.rfind("device.coherence.", 0) == 0) {
      std::string v;
      ls >> v;
      s.device.coherence[tok.substr(17)] = parse_float(v);
    } else if (tok == "model.n_max") {
      ls >> s.model.n_max;
    } else if (tok == "model.num_tslots") {
      ls >> s.model.num_tslots;
    } else if (tok == "model.duration_us") {
      std::string v;
      ls >> v;
      s.model.duration_us = parse_float(v);
    } else if (tok == "model.amp_bound") {
      std::string v;
      ls >> v;
      s.model.amp_bound = parse_float(v);
    } else if (tok == "model.fid_tol") {
      std::string v;
      ls >> v;
      s.model.fid_tol = parse_float(v);
    } else if (tok == "model.grad_tol") {
      std::string v;
      ls >> v;
      s.model.grad_tol = parse_float(v);
    } else if (tok == "model.max_iter") {
      ls >> s.model.max_iter;
    } else if (tok == "pulse") {
      ScheduleEntry e;
      std::string t_start, duration, omega_l;
      ls >> e.gate_id >> t_start >> duration >> omega_l;
      e.gate.type = e.gate_id;
      e.t_start_us = parse_float(t_start);
      e.duration_us = parse_float(duration);
      e.omega_l_rad_s = parse_float(omega_l);
      s.entries.push_back(std::move(e));
      current = &s.entries.back();
    } else if (tok == "ideal") {
      ScheduleEntry e;
      e.ideal = true;
      std::string t_start;
      ls >> e.gate_id >> t_start;
      e.t_start_us = parse_float(t_start);
      s.entries.push_back(std::move(e));
      current = nullptr;
    } else if (tok == "gparam") {
      if (!current) fail("gparam outside a pulse block");
      std::string key, v;
      ls >> key >> v;
      current->gate.params[key] = parse_float(v);
    } else if (tok == "channel") {
      if (!current) fail("channel outside a pulse block");
      std::string name, v;
      ls >> name;
      std::vector<double> samples;
      while (ls >> v) samples.push_back(parse_float(v));
      current->channels.push_back(name);
      current->waveforms[name] = std::move(samples);
    } else if (tok == "end") {
      saw_end = true;
    } else {
      fail("unknown directive '" + tok + "'");
    }
  }
  if (!saw_end) throw IoError(path.string() + ": truncated file (no 'end')");
  return s;
}

}  // namespace ionpulse
