#include "ionpulse/util.hpp"

#include <openssl/evp.h>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ionpulse/errors.hpp"

namespace ionpulse {

std::string format_float17(double value) {
  if (!std::isfinite(value)) {
    throw CanonicalizationError("cannot serialize non-finite float");
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", value);
  return buf;
}

double parse_float(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin) {
    throw InvalidArgument("not a number: '" + text + "'");
  }
  while (*end == ' ') ++end;
  if (*end != '\0') {
    throw InvalidArgument("trailing characters in number: '" + text + "'");
  }
  return v;
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericError("SHA-256 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

double parse_angular_frequency(const std::string& text) {
  std::string s = text;
  double factor = 1.0;
  if (s.rfind("2pi*", 0) == 0) {
    factor = 2.0 * std::numbers::pi;
    s = s.substr(4);
  }
  if (s.empty()) throw InvalidArgument("empty frequency: '" + text + "'");
  double suffix = 1.0;
  switch (s.back()) {
    case 'k': suffix = 1e3; s.pop_back(); break;
    case 'M': suffix = 1e6; s.pop_back(); break;
    case 'G': suffix = 1e9; s.pop_back(); break;
    default: break;
  }
  return factor * suffix * parse_float(s);
}

std::complex<double> parse_complex(const std::string& text) {
  std::string s = text;
  s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
  if (s.empty()) throw InvalidArgument("empty complex literal");
  // Pure imaginary or pure real.
  auto parse_part = [](const std::string& t) -> double {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return parse_float(t);
  };
  if (s.back() == 'j' || s.back() == 'i') {
    // Find the split between real and imaginary parts: the last +/- that is
    // not an exponent sign and not the leading sign.
    std::string body = s.substr(0, s.size() - 1);
    for (std::size_t k = body.size(); k-- > 1;) {
      char c = body[k];
      if ((c == '+' || c == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
        return {parse_float(body.substr(0, k)), parse_part(body.substr(k))};
      }
    }
    return {0.0, parse_part(body)};
  }
  return {parse_float(s), 0.0};
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(parse_float(item));
  }
  return out;
}

std::string iso8601_now_utc() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(seed ^ splitmix64(stream + 1)));
}

double GaussianSampler::next() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Map engine output into (0,1]; u1 must stay away from zero for the log.
  auto uniform = [this]() {
    return (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
  };
  double u1 = uniform();
  double u2 = uniform();
  double mag = std::sqrt(-2.0 * std::log(u1));
  double ang = 2.0 * std::numbers::pi * u2;
  spare_ = mag * std::sin(ang);
  have_spare_ = true;
  return mag * std::cos(ang);
}

void atomic_write_file(const std::filesystem::path& path, std::string_view content) {
  static std::atomic<std::uint64_t> counter{0};
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid()) + "." +
         std::to_string(counter.fetch_add(1));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("short write: " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("rename failed: " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ionpulse
