#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "doctest.h"
#include "ppcate/rng.hpp"

using ppcate::Rng;
using ppcate::derive_seed;
using ppcate::mix64;

// Frozen outputs of an independent reimplementation of the documented
// protocol (plain-integer arithmetic, no shared code). The seed-0 sequence
// also matches the published splitmix64 reference vectors.
TEST_CASE("u64 stream known answers") {
  {
    Rng r(0);
    const std::uint64_t want[5] = {0xE220A8397B1DCDAFULL, 0x6E789E6AA1B965F4ULL,
                                   0x06C45D188009454FULL, 0xF88BB8A8724C81ECULL,
                                   0x1B39896A51A8749BULL};
    for (const std::uint64_t w : want) CHECK(r.next_u64() == w);
  }
  {
    Rng r(42);
    const std::uint64_t want[5] = {0xBDD732262FEB6E95ULL, 0x28EFE333B266F103ULL,
                                   0x47526757130F9F52ULL, 0x581CE1FF0E4AE394ULL,
                                   0x09BC585A244823F2ULL};
    for (const std::uint64_t w : want) CHECK(r.next_u64() == w);
  }
}

TEST_CASE("mix64 equals one generator step") {
  for (const std::uint64_t s : {0ULL, 1ULL, 42ULL, 0xDEADBEEFULL}) {
    Rng r(s);
    CHECK(mix64(s) == r.next_u64());
  }
}

TEST_CASE("uniform01 known answers and range") {
  Rng r(7);
  // (u64 >> 11) * 2^-53 is exact, so these are bit-for-bit.
  CHECK(r.uniform01() == 0.3898297483912715);
  CHECK(r.uniform01() == 0.01678829452815611);
  CHECK(r.uniform01() == 0.9007606806068834);
  CHECK(r.uniform01() == 0.5829302930280781);

  Rng s(123);
  for (int i = 0; i < 10000; ++i) {
    const double u = s.uniform01();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal consumes exactly two uniforms, Box-Muller values") {
  Rng r(7);
  for (int i = 0; i < 4; ++i) r.next_u64();
  // Frozen from the independent reimplementation; libm rounding gets slack.
  CHECK(r.normal() == doctest::Approx(0.0039202072151893405).epsilon(1e-12));
  CHECK(r.normal() == doctest::Approx(-0.5292707004741914).epsilon(1e-12));
  CHECK(r.normal() == doctest::Approx(-0.45896961774086253).epsilon(1e-12));

  // Draw-count bookkeeping: normal() must advance the state by exactly two.
  Rng a(99), b(99);
  a.normal();
  b.next_u64();
  b.next_u64();
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform, bernoulli, uniform_int follow the documented mapping") {
  Rng a(5), b(5), c(5);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform01();
    CHECK(b.uniform(-2.0, 3.0) == -2.0 + u * 5.0);
    CHECK(c.bernoulli(0.25) == (u < 0.25));
  }
  Rng d(5), e(5);
  for (int i = 0; i < 100; ++i) {
    const int v = d.uniform_int(17);
    CHECK(v == static_cast<int>(e.uniform01() * 17.0));
    CHECK(v >= 0);
    CHECK(v < 17);
  }
}

TEST_CASE("shuffle is a seeded permutation") {
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[static_cast<std::size_t>(i)] = i;
  std::vector<int> w = v;
  Rng r1(11), r2(11);
  r1.shuffle(v);
  r2.shuffle(w);
  CHECK(v == w);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("sample_with_replacement bounds and determinism") {
  Rng r1(3), r2(3);
  const auto a = r1.sample_with_replacement(10, 200);
  const auto b = r2.sample_with_replacement(10, 200);
  CHECK(a == b);
  CHECK(a.size() == 200);
  for (const int v : a) {
    CHECK(v >= 0);
    CHECK(v < 10);
  }
}

TEST_CASE("derive_seed frozen values") {
  CHECK(derive_seed(1, "bootstrap", 0) == 0x498C753F701B7C8AULL);
  CHECK(derive_seed(1, "bootstrap", 1) == 0xB29CB4B744B2A802ULL);
  CHECK(derive_seed(2, "bootstrap", 0) == 0x4F303A57DAB5500FULL);
  CHECK(derive_seed(1, "trial", 3) == 0xF285DEA5CE7C8FC8ULL);
  CHECK(derive_seed(0, "", 0) == 0xA6BBC8DCBE30928CULL);
}

// Regression guard: nearby (master, index) pairs must never alias. An early
// version combined them additively, which made benchmark runs at master
// seeds 1, 2, 3 share 19 of 20 trials.
TEST_CASE("derive_seed separates master, label and index") {
  std::set<std::uint64_t> seen;
  std::size_t count = 0;
  for (const char* label : {"trial", "bootstrap", "fit", ""}) {
    for (std::uint64_t master = 0; master < 40; ++master) {
      for (std::uint64_t index = 0; index < 40; ++index) {
        seen.insert(derive_seed(master, label, index));
        ++count;
      }
    }
  }
  CHECK(seen.size() == count);
  CHECK(derive_seed(1, "a", 0) != derive_seed(1, "b", 0));
  CHECK(derive_seed(1, "trial") == derive_seed(1, "trial", 0));
}
