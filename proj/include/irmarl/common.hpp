#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace irmarl {

// Tolerances used across the library: exact algebraic identities get 1e-10,
// bounds accumulated over sums get 1e-9.
inline constexpr double kExactTol = 1e-10;
inline constexpr double kSumTol = 1e-9;

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

inline bool is_probability_vector(std::span<const double> p, double tol = 1e-12) {
  double sum = 0.0;
  for (double v : p) {
    if (v < 0.0) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tol;
}

// FNV-1a over bytes; used for dataset/config provenance hashes.
inline std::uint64_t fnv1a(std::span<const char> bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

inline std::string hex_hash(const std::string& text) {
  std::uint64_t h = fnv1a(std::span<const char>(text.data(), text.size()));
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace irmarl
