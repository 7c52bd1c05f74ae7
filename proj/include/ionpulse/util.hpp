#pragma once

#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace ionpulse {

/// Serialize a finite double at 17 significant digits in scientific form.
/// This is the one float grammar used for hashing and file formats; any
/// IEEE-754 double round-trips bit-exactly through it.
std::string format_float17(double value);

/// Inverse of format_float17 (plain strtod; accepts any C float literal).
double parse_float(const std::string& text);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

/// Angular-frequency flag grammar: plain rad/s, or "2pi*<x>" with optional
/// k/M/G suffix, e.g. "2pi*10k" = 2*pi*1e4 rad/s. Suffixes also work without
/// the 2pi* prefix.
double parse_angular_frequency(const std::string& text);

/// Complex flag grammar "re+imj", e.g. "0.5+0.5j", "1.2-0.3j", "2", "1j".
/// nan/inf tokens parse; rejection happens at canonicalization.
std::complex<double> parse_complex(const std::string& text);

/// Comma-separated list of doubles.
std::vector<double> parse_double_list(const std::string& text);

/// Current UTC time, ISO-8601 with seconds.
std::string iso8601_now_utc();

/// Order-stable pairwise summation.
double pairwise_sum(std::span<const double> values);

/// splitmix64 step; used to derive per-stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Deterministic engine for (seed, stream) pairs, portable across platforms.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Portable standard normal via Box-Muller (std::normal_distribution is not
/// bit-stable across standard libraries).
class GaussianSampler {
 public:
  explicit GaussianSampler(std::mt19937_64 engine) : engine_(std::move(engine)) {}
  double next();

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Write via temp file in the same directory plus atomic rename.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

}  // namespace ionpulse
