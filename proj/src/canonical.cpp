#include "ionpulse/canonical.hpp"

#include <cmath>
#include <sstream>

#include "ionpulse/errors.hpp"
#include "ionpulse/util.hpp"

namespace ionpulse {

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

std::string json_float(double v) { return format_float17(v); }

std::string json_float_array(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += json_float(values[i]);
  }
  return out + "]";
}

std::string canonical_gate_json(const GateSpec& gate) {
  require_finite_params(gate);
  std::ostringstream out;
  out << "{\"params\":{";
  bool first = true;
  for (const auto& [key, value] : gate.params) {  // std::map: sorted keys
    if (!first) out << ',';
    first = false;
    out << '"' << json_escape(key) << "\":" << json_float(value);
  }
  out << "},\"type\":\"" << json_escape(gate.type) << "\"}";
  return out.str();
}

std::string canonical_device_json(const DeviceSpec& device) {
  device.validate();  // validate() rejects non-finite numeric fields
  std::ostringstream out;
  out << "{\"coherence\":{";
  bool first = true;
  for (const auto& [key, value] : device.coherence) {
    if (!std::isfinite(value)) {
      throw CanonicalizationError("device coherence '" + key + "' is non-finite");
    }
    if (!first) out << ',';
    first = false;
    out << '"' << json_escape(key) << "\":" << json_float(value);
  }
  out << "},\"delta_rad_s\":" << json_float(device.delta);
  out << ",\"eta\":" << json_float(device.eta);
  out << ",\"name\":\"" << json_escape(device.name) << '"';
  out << ",\"omega_j_rad_s\":" << json_float(device.omega_j);
  out << ",\"omega_m_rad_s\":" << json_float(device.omega_m);
  out << ",\"omega_max_rad_s\":" << json_float(device.omega_max);
  out << ",\"omega_q_rad_s\":";
  if (device.omega_q) {
    out << json_float(*device.omega_q);
  } else {
    out << "null";
  }
  out << ",\"participation\":[";
  for (std::size_t k = 0; k < device.participation.size(); ++k) {
    if (k) out << ',';
    out << json_float_array(device.participation[k]);
  }
  out << "]}";
  return out.str();
}

std::string canonical_model_json(const ModelSpec& model) {
  model.validate();
  std::ostringstream out;
  out << "{\"amp_bound\":" << json_float(model.amp_bound);
  out << ",\"duration_us\":" << json_float(model.duration_us);
  out << ",\"fid_tol\":" << json_float(model.fid_tol);
  out << ",\"grad_tol\":" << json_float(model.grad_tol);
  out << ",\"max_iter\":" << model.max_iter;
  out << ",\"n_max\":" << model.n_max;
  out << ",\"num_tslots\":" << model.num_tslots << "}";
  return out.str();
}

std::string canonical_serialize(const GateSpec& gate, const DeviceSpec& device,
                                const ModelSpec& model) {
  return "{\"device\":" + canonical_device_json(device) +
         ",\"gate\":" + canonical_gate_json(gate) +
         ",\"model\":" + canonical_model_json(model) + "}";
}

std::string request_hash(const GateSpec& gate, const DeviceSpec& device,
                         const ModelSpec& model) {
  return sha256_hex(canonical_serialize(gate, device, model));
}

}  // namespace ionpulse
