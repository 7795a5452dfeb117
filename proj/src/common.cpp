#include "rieszlab/common.hpp"

#include <cstring>

namespace rieszlab {

namespace {

double pairwise_rec(const double* p, std::size_t n) {
  if (n <= 32) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += p[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_rec(p, h) + pairwise_rec(p + h, n - h);
}

}  // namespace

double pairwise_sum(std::span<const double> terms) {
  return pairwise_rec(terms.data(), terms.size());
}

std::uint64_t fnv1a(const void* data, std::size_t nbytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < nbytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string digest_hex(std::span<const cplx> v) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const cplx& z : v) {
    double pair[2] = {z.real(), z.imag()};
    unsigned char buf[sizeof pair];
    std::memcpy(buf, pair, sizeof pair);
    for (unsigned char b : buf) {
      h ^= b;
      h *= 0x100000001b3ull;
    }
  }
  char out[17];
  std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
  return std::string(out);
}

}  // namespace rieszlab
