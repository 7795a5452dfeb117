#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace rieszlab {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

/// Seed used by the CLI and the acceptance suite when none is given.
inline constexpr std::uint64_t kDefaultSeed = 12648430;

/// Pairwise (cascade) summation; deterministic and stable for long sums.
double pairwise_sum(std::span<const double> terms);

/// Row-major odometer over mixed radices. Returns false after the last tuple.
inline bool next_index(std::span<int> idx, std::span<const int> radix) {
  for (int a = static_cast<int>(idx.size()) - 1; a >= 0; --a) {
    if (++idx[a] < radix[a]) return true;
    idx[a] = 0;
  }
  return false;
}

/// FNV-1a 64-bit over raw bytes.
std::uint64_t fnv1a(const void* data, std::size_t nbytes);

/// Hex digest of a complex vector (hashes the raw double pairs).
std::string digest_hex(std::span<const cplx> v);

/// Seedable generator with derived per-stream instances (stream = seed + index).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return unif_(eng_); }           // [0, 1)
  double normal() { return norm_(eng_); }
  cplx complex_normal() {
    const double re = norm_(eng_);
    const double im = norm_(eng_);
    return {re, im};
  }
  CVec complex_normal_vec(std::size_t n) {
    CVec v(n);
    for (auto& z : v) z = complex_normal();
    return v;
  }
  std::vector<double> normal_vec(std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = normal();
    return v;
  }

 private:
  std::mt19937_64 eng_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace rieszlab
