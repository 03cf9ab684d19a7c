#pragma once

#include <cstddef>
#include <cstdint>

// Deterministic sampling kernels: a counter-based generator (Philox4x32-10)
// feeding a rational inverse-CDF Gaussian conversion. Every arithmetic step
// is an exactly-rounded IEEE operation in a fixed order, so the output is
// bit-identical across platforms and across the scalar/AVX2 backends.

namespace quasim::kernels {

enum class Backend { scalar, avx2 };

// Backend selection. Auto-detects at first use; honours the
// QUASIM_FORCE_SCALAR environment variable. set_backend throws
// std::runtime_error if the requested backend is unavailable.
Backend active_backend();
void set_backend(Backend backend);
bool avx2_supported();
const char* backend_name(Backend backend);

struct PhiloxBlock {
  std::uint32_t x[4];
};

// One 10-round Philox4x32 block. Counter words (c0..c3), key words (k0,k1).
PhiloxBlock philox4x32_10(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                          std::uint32_t c3, std::uint32_t k0, std::uint32_t k1);

// Maps 64 random bits to the open interval (0,1): (r>>12)*2^-52 + 2^-53.
double u01_from_bits(std::uint64_t r);

// Natural log for normal positive doubles, fixed rational reduction
// (no libm), identical on every platform. Precondition: x normal, x > 0.
double portable_log(double x);

// Inverse standard normal CDF (Wichura's PPND16 rational approximation).
// Throws std::domain_error unless p is in (0,1).
double normal_icdf(double p);

// Fills out[0..count) with independent N(0, scale^2) draws. Value j is
// derived from Philox block j/2 of the (seed, stream) counter stream, so
// any subrange can be regenerated independently.
void generate_normals(std::uint64_t seed, std::uint64_t stream,
                      std::size_t count, double scale, double* out);

// Backend-pinned variants, primarily for the equivalence tests. The AVX2
// variant throws std::runtime_error when the backend is unavailable.
void generate_normals_scalar(std::uint64_t seed, std::uint64_t stream,
                             std::size_t count, double scale, double* out);
void generate_normals_avx2(std::uint64_t seed, std::uint64_t stream,
                           std::size_t count, double scale, double* out);

}  // namespace quasim::kernels
