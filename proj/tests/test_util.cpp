#include <doctest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>

#include "ionpulse/errors.hpp"
#include "ionpulse/util.hpp"

using namespace ionpulse;

TEST_CASE("float17 round-trips doubles bit-exactly") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> mant(-1.0, 1.0);
  std::uniform_int_distribution<int> expo(-300, 300);
  for (int i = 0; i < 20000; ++i) {
    const double x = std::ldexp(mant(rng), expo(rng));
    const double y = parse_float(format_float17(x));
    CHECK(std::memcmp(&x, &y, sizeof(double)) == 0);
  }
  const double z = parse_float(format_float17(-0.0));
  CHECK(std::signbit(z));
}

TEST_CASE("float17 rejects non-finite values") {
  CHECK_THROWS_AS(format_float17(std::nan("")), CanonicalizationError);
  CHECK_THROWS_AS(format_float17(INFINITY), CanonicalizationError);
}

TEST_CASE("sha256 matches published test vectors") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("angular frequency grammar") {
  CHECK(parse_angular_frequency("10") == doctest::Approx(10.0));
  CHECK(parse_angular_frequency("2pi*1") == doctest::Approx(2 * std::numbers::pi));
  CHECK(parse_angular_frequency("2pi*10k") == doctest::Approx(2 * std::numbers::pi * 1e4));
  CHECK(parse_angular_frequency("2pi*1.33M") ==
        doctest::Approx(2 * std::numbers::pi * 1.33e6));
  CHECK(parse_angular_frequency("3.5k") == doctest::Approx(3500.0));
  CHECK(parse_angular_frequency("2pi*12.642812G") ==
        doctest::Approx(2 * std::numbers::pi * 12.642812e9));
  CHECK_THROWS_AS(parse_angular_frequency("2pi*"), InvalidArgument);
  CHECK_THROWS_AS(parse_angular_frequency("abc"), InvalidArgument);
}

TEST_CASE("complex flag grammar") {
  CHECK(parse_complex("0.5+0.5j") == std::complex<double>(0.5, 0.5));
  CHECK(parse_complex("1.2-0.3j") == std::complex<double>(1.2, -0.3));
  CHECK(parse_complex("2") == std::complex<double>(2.0, 0.0));
  CHECK(parse_complex("1j") == std::complex<double>(0.0, 1.0));
  CHECK(parse_complex("-j") == std::complex<double>(0.0, -1.0));
  CHECK(parse_complex("1e-3+2e-4j") == std::complex<double>(1e-3, 2e-4));
  const auto nan_val = parse_complex("nan+0j");
  CHECK(std::isnan(nan_val.real()));
  CHECK(nan_val.imag() == 0.0);
  CHECK_THROWS_AS(parse_complex("foo"), InvalidArgument);
}

TEST_CASE("gaussian sampler is deterministic per (seed, stream)") {
  GaussianSampler a(make_rng(7, 3));
  GaussianSampler b(make_rng(7, 3));
  GaussianSampler c(make_rng(7, 4));
  bool any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const double va = a.next();
    CHECK(va == b.next());
    if (va != c.next()) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("pairwise sum is order-stable and accurate") {
  std::vector<double> v(10001, 0.1);
  CHECK(pairwise_sum(v) == doctest::Approx(1000.1).epsilon(1e-12));
}
