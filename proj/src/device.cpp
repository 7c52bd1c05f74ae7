#include "ionpulse/device.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "ionpulse/errors.hpp"
#include "ionpulse/util.hpp"

namespace ionpulse {

double DeviceSpec::gamma() const {
  auto it = coherence.find("gamma");
  return it == coherence.end() ? 0.0 : it->second;
}

void DeviceSpec::validate() const {
  auto bad = [this](const std::string& why) {
    throw InvalidArgument("device '" + name + "': " + why);
  };
  if (name.empty()) bad("name is empty");
  if (!std::isfinite(eta) || eta <= 0.0 || eta >= 1.0) bad("eta must be in (0, 1)");
  if (!std::isfinite(omega_m) || omega_m <= 0.0) bad("omega_m must be > 0");
  if (!std::isfinite(omega_j) || omega_j <= 0.0) bad("omega_j must be > 0");
  if (!std::isfinite(omega_max) || omega_max <= 0.0) bad("omega_max must be > 0");
  if (!std::isfinite(delta)) bad("delta must be finite");
  if (omega_q && (!std::isfinite(*omega_q) || *omega_q <= 0.0)) {
    bad("omega_q must be finite and > 0 when present");
  }
  if (participation.empty()) bad("participation matrix is empty");
  const std::size_t ions = participation.front().size();
  for (const auto& row : participation) {
    if (row.empty() || row.size() != ions) bad("participation rows must be rectangular");
    for (double b : row) {
      if (!std::isfinite(b)) bad("participation entry is non-finite");
    }
  }
  for (const auto& [key, value] : coherence) {
    if (!std::isfinite(value)) bad("coherence '" + key + "' is non-finite");
  }
  if (gamma() < 0.0) bad("coherence gamma must be >= 0");
}

double resolve_eta(const DeviceSpec& device, int ion, int mode) {
  if (mode < 0 || static_cast<std::size_t>(mode) >= device.participation.size()) {
    throw InvalidArgument("mode index " + std::to_string(mode) + " out of range on '" +
                          device.name + "'");
  }
  const auto& row = device.participation[static_cast<std::size_t>(mode)];
  if (ion < 0 || static_cast<std::size_t>(ion) >= row.size()) {
    throw InvalidArgument("ion index " + std::to_string(ion) + " out of range on '" +
                          device.name + "'");
  }
  return row[static_cast<std::size_t>(ion)] * device.eta;
}

namespace {

std::vector<std::vector<double>> parse_participation(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream row_stream(text);
  std::string row_text;
  while (std::getline(row_stream, row_text, ';')) {
    std::vector<double> row;
    std::stringstream entry_stream(row_text);
    std::string entry;
    while (entry_stream >> entry) row.push_back(parse_float(entry));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

DeviceSpec load_device(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("device file not found: " + path.string());

  DeviceSpec device;
  std::set<std::string> seen;
  bool have_version = false;
  std::string line;
  int line_no = 0;

  auto fail = [&](const std::string& why) {
    throw InvalidArgument(path.string() + ":" + std::to_string(line_no) + ": " + why);
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos) fail("expected 'key = value'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) fail("empty key or value");
    if (!seen.insert(key).second) fail("duplicate key '" + key + "'");

    try {
      if (key == "format_version") {
        if (parse_float(value) != 1.0) fail("unsupported format_version " + value);
        have_version = true;
      } else if (key == "name") {
        device.name = value;
      } else if (key == "eta") {
        device.eta = parse_float(value);
      } else if (key == "omega_m") {
        device.omega_m = parse_angular_frequency(value);
      } else if (key == "omega_j") {
        device.omega_j = parse_angular_frequency(value);
      } else if (key == "delta") {
        device.delta = parse_angular_frequency(value);
      } else if (key == "omega_max") {
        device.omega_max = parse_angular_frequency(value);
      } else if (key == "omega_q") {
        device.omega_q = parse_angular_frequency(value);
      } else if (key == "participation") {
        device.participation = parse_participation(value);
      } else if (key.rfind("coherence.", 0) == 0) {
        device.coherence[key.substr(10)] = parse_float(value);
      } else {
        fail("unknown key '" + key + "'");
      }
    } catch (const InvalidArgument&) {
      throw;
    } catch (const Error& e) {
      fail(e.what());
    }
  }

  if (!have_version) {
    throw InvalidArgument(path.string() + ": missing format_version");
  }
  for (const char* required : {"name", "eta", "omega_m", "omega_j", "omega_max"}) {
    if (!seen.count(required)) {
      throw InvalidArgument(path.string() + ": missing required key '" +
                            std::string(required) + "'");
    }
  }
  if (device.participation.empty()) device.participation = {{1.0}};
  device.validate();
  return device;
}

}  // namespace ionpulse
