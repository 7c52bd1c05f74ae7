#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ionpulse {

/// Hardware calibration snapshot. All angular frequencies in rad/s, gamma-like
/// coherence entries in Hz. participation[k][j] is the normalized factor
/// b_kj = eta_kj / eta_k of ion j in mode k.
struct DeviceSpec {
  std::string name;
  double eta = 0.0;
  double omega_m = 0.0;
  double omega_j = 0.0;
  double delta = 0.0;
  double omega_max = 0.0;
  std::optional<double> omega_q;
  std::vector<std::vector<double>> participation;
  std::map<std::string, double> coherence;

  /// Motional dephasing rate from the coherence map ("gamma", Hz); 0 if absent.
  double gamma() const;

  void validate() const;
};

/// Parse and validate a device calibration file (documented in the bundled
/// devices/sydney_gkp_v1.device). Key = value lines; angular-frequency fields
/// accept the 2pi*<x>[k|M|G] shorthand; participation rows are ';'-separated.
DeviceSpec load_device(const std::filesystem::path& path);

/// Effective Lamb-Dicke parameter b_kj * eta for (ion j, mode k).
double resolve_eta(const DeviceSpec& device, int ion, int mode);

/// Uniform interface handed to the synthesis layer: (ion, mode) -> eta_kj.
class CalibrationResolver {
 public:
  virtual ~CalibrationResolver() = default;
  virtual double resolve(int ion, int mode) const = 0;
};

/// Resolver backed by a DeviceSpec participation matrix.
class ParticipationResolver : public CalibrationResolver {
 public:
  explicit ParticipationResolver(DeviceSpec device) : device_(std::move(device)) {}
  double resolve(int ion, int mode) const override {
    return resolve_eta(device_, ion, mode);
  }

 private:
  DeviceSpec device_;
};

}  // namespace ionpulse
