#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw 2011).
// Every draw is a pure function of (master seed, stream id, step), so the
// same increment is produced no matter how work is split across threads or
// in what order jobs run. One 128-bit block yields two double-precision
// normals, enough for a d <= 2 increment of one particle at one step.
//
// Stream id packing: purpose (8 bits) | replica (16 bits) | particle (40
// bits). Idiosyncratic-noise and initial-sample streams are keyed by
// (replica, particle) only, not by ensemble size, so a sweep over N reuses
// the same driving noise for the particles the ensembles share (common
// random numbers across the N axis).

namespace mfl::rng {

struct Block {
  std::uint32_t x[4];
};

namespace detail {

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace detail

inline Block philox(std::uint64_t key, std::uint64_t ctr_hi, std::uint64_t ctr_lo) {
  std::uint32_t c0 = static_cast<std::uint32_t>(ctr_lo);
  std::uint32_t c1 = static_cast<std::uint32_t>(ctr_lo >> 32);
  std::uint32_t c2 = static_cast<std::uint32_t>(ctr_hi);
  std::uint32_t c3 = static_cast<std::uint32_t>(ctr_hi >> 32);
  std::uint32_t k0 = static_cast<std::uint32_t>(key);
  std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
  for (int r = 0; r < 10; ++r) {
    std::uint32_t hi0, lo0, hi1, lo1;
    detail::mulhilo(0xD2511F53u, c0, hi0, lo0);
    detail::mulhilo(0xCD9E8D57u, c2, hi1, lo1);
    std::uint32_t n0 = hi1 ^ c1 ^ k0;
    std::uint32_t n1 = lo1;
    std::uint32_t n2 = hi0 ^ c3 ^ k1;
    std::uint32_t n3 = lo0;
    c0 = n0;
    c1 = n1;
    c2 = n2;
    c3 = n3;
    k0 += 0x9E3779B9u;
    k1 += 0xBB67AE85u;
  }
  return Block{{c0, c1, c2, c3}};
}

enum class Purpose : std::uint64_t {
  CommonNoise = 1,
  Idiosyncratic = 2,
  InitialSample = 3,
  Bootstrap = 4,
};

inline std::uint64_t stream_id(Purpose p, std::uint32_t replica, std::uint64_t particle) {
  return (static_cast<std::uint64_t>(p) << 56) | (static_cast<std::uint64_t>(replica & 0xFFFFu) << 40) |
         (particle & 0xFFFFFFFFFFull);
}

// 53-bit uniform in (0, 1]: never 0, so log(u) is always finite.
inline double u53(std::uint32_t hi, std::uint32_t lo) {
  std::uint64_t mant = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 11;
  return static_cast<double>(mant + 1) * 0x1p-53;
}

// Box-Muller pair from one block.
inline void normal_pair(std::uint64_t key, std::uint64_t stream, std::uint64_t step, double& z0,
                        double& z1) {
  Block b = philox(key, stream, step);
  double u1 = u53(b.x[0], b.x[1]);
  double u2 = u53(b.x[2], b.x[3]);
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  z0 = r * std::cos(a);
  z1 = r * std::sin(a);
}

// slot in {0,1}: two independent uniforms per (stream, step).
inline double uniform(std::uint64_t key, std::uint64_t stream, std::uint64_t step, int slot) {
  Block b = philox(key, stream, step);
  return slot == 0 ? u53(b.x[0], b.x[1]) : u53(b.x[2], b.x[3]);
}

}  // namespace mfl::rng
