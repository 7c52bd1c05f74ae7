#pragma once

#include <string>

#include "ionpulse/device.hpp"
#include "ionpulse/gates.hpp"
#include "ionpulse/model.hpp"

namespace ionpulse {

// Canonical byte form used for hashing: minified JSON with keys sorted
// lexicographically at every level, floats as 17-significant-digit
// scientific literals, integers as plain decimals, complex parameters as
// (real, imaginary) component keys. Non-finite values throw
// CanonicalizationError instead of producing a silently wrong hash.

std::string canonical_gate_json(const GateSpec& gate);
std::string canonical_device_json(const DeviceSpec& device);
std::string canonical_model_json(const ModelSpec& model);

/// {"device":...,"gate":...,"model":...} over the canonical forms above.
/// Identical physical specs produce identical bytes on any machine.
std::string canonical_serialize(const GateSpec& gate, const DeviceSpec& device,
                                const ModelSpec& model);

/// k = SHA256(serialize(G, D, M)), lowercase hex.
std::string request_hash(const GateSpec& gate, const DeviceSpec& device,
                         const ModelSpec& model);

// Small helpers shared with the file writers (same grammar everywhere).
std::string json_escape(const std::string& s);
std::string json_float(double v);
std::string json_float_array(const std::vector<double>& values);

}  // namespace ionpulse
