#include "quasim/kernels.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace quasim::kernels {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

}  // namespace

PhiloxBlock philox4x32_10(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                          std::uint32_t c3, std::uint32_t k0, std::uint32_t k1) {
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * c0;
    const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * c2;
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    const std::uint32_t n0 = hi1 ^ c1 ^ k0;
    const std::uint32_t n2 = hi0 ^ c3 ^ k1;
    c0 = n0;
    c1 = lo1;
    c2 = n2;
    c3 = lo0;
    k0 += kPhiloxW0;
    k1 += kPhiloxW1;
  }
  return PhiloxBlock{{c0, c1, c2, c3}};
}

double u01_from_bits(std::uint64_t r) {
  return static_cast<double>(r >> 12) * 0x1p-52 + 0x1p-53;
}

namespace {

// fdlibm-style log: reduce to m in (sqrt(1/2), sqrt(2)], then the
// atanh-series rational polynomial. Valid for normal positive doubles.
constexpr double kLg1 = 6.666666666666735130e-01;
constexpr double kLg2 = 3.999999999940941908e-01;
constexpr double kLg3 = 2.857142874366239149e-01;
constexpr double kLg4 = 2.222219843214978396e-01;
constexpr double kLg5 = 1.818357216161805012e-01;
constexpr double kLg6 = 1.531383769920937332e-01;
constexpr double kLg7 = 1.479819860511658591e-01;
constexpr double kLn2Hi = 6.93147180369123816490e-01;
constexpr double kLn2Lo = 1.90821492927058770002e-10;
constexpr double kSqrt2 = 1.41421356237309514547462185873883;

inline double log_impl(double x) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  double k = static_cast<double>(static_cast<std::int64_t>(bits >> 52)) - 1023.0;
  double m = std::bit_cast<double>((bits & 0x000FFFFFFFFFFFFFull) | 0x3FF0000000000000ull);
  if (m > kSqrt2) {
    m *= 0.5;
    k += 1.0;
  }
  const double f = m - 1.0;
  const double s = f / (2.0 + f);
  const double z = s * s;
  const double w = z * z;
  const double t1 = w * (kLg2 + w * (kLg4 + w * kLg6));
  const double t2 = z * (kLg1 + w * (kLg3 + w * (kLg5 + w * kLg7)));
  const double r = t2 + t1;
  const double hfsq = 0.5 * f * f;
  return k * kLn2Hi - ((hfsq - (s * (hfsq + r) + k * kLn2Lo)) - f);
}

// Wichura's PPND16 coefficients (AS 241).
constexpr double kA0 = 3.3871328727963666080e0;
constexpr double kA1 = 1.3314166789178437745e2;
constexpr double kA2 = 1.9715909503065514427e3;
constexpr double kA3 = 1.3731693765509461125e4;
constexpr double kA4 = 4.5921953931549871457e4;
constexpr double kA5 = 6.7265770927008700853e4;
constexpr double kA6 = 3.3430575583588128105e4;
constexpr double kA7 = 2.5090809287301226727e3;
constexpr double kB1 = 4.2313330701600911252e1;
constexpr double kB2 = 6.8718700749205790830e2;
constexpr double kB3 = 5.3941960214247511077e3;
constexpr double kB4 = 2.1213794301586595867e4;
constexpr double kB5 = 3.9307895800092710610e4;
constexpr double kB6 = 2.8729085735721942674e4;
constexpr double kB7 = 5.2264952788528545610e3;
constexpr double kC0 = 1.42343711074968357734e0;
constexpr double kC1 = 4.63033784615654529590e0;
constexpr double kC2 = 5.76949722146069140550e0;
constexpr double kC3 = 3.64784832476320460504e0;
constexpr double kC4 = 1.27045825245236838258e0;
constexpr double kC5 = 2.41780725177450611770e-1;
constexpr double kC6 = 2.27238449892691845833e-2;
constexpr double kC7 = 7.74545014278341407640e-4;
constexpr double kD1 = 2.05319162663775882187e0;
constexpr double kD2 = 1.67638483018380384940e0;
constexpr double kD3 = 6.89767334985100004550e-1;
constexpr double kD4 = 1.48103976427480074590e-1;
constexpr double kD5 = 1.51986665636164571966e-2;
constexpr double kD6 = 5.47593808499534494600e-4;
constexpr double kD7 = 1.05075007164441684324e-9;
constexpr double kE0 = 6.65790464350110377720e0;
constexpr double kE1 = 5.46378491116411436990e0;
constexpr double kE2 = 1.78482653991729133580e0;
constexpr double kE3 = 2.96560571828504891230e-1;
constexpr double kE4 = 2.65321895265761230930e-2;
constexpr double kE5 = 1.24266094738807843860e-3;
constexpr double kE6 = 2.71155556874348757815e-5;
constexpr double kE7 = 2.01033439929228813265e-7;
constexpr double kF1 = 5.99832206555887937690e-1;
constexpr double kF2 = 1.36929880922735805310e-1;
constexpr double kF3 = 1.48753612908506148525e-2;
constexpr double kF4 = 7.86869131145613259100e-4;
constexpr double kF5 = 1.84631831751005468180e-5;
constexpr double kF6 = 1.42151175831644588870e-7;
constexpr double kF7 = 2.04426310338993978564e-15;

// Branch-free except for lane selection: both the central and tail
// candidates are evaluated for every input, mirroring the vector path,
// so the AVX2 backend reproduces this bit-for-bit.
inline double icdf_impl(double p) {
  const double q = p - 0.5;

  const double rc = 0.180625 - q * q;
  const double cnum =
      (((((((kA7 * rc + kA6) * rc + kA5) * rc + kA4) * rc + kA3) * rc + kA2) * rc + kA1) * rc +
       kA0);
  const double cden =
      (((((((kB7 * rc + kB6) * rc + kB5) * rc + kB4) * rc + kB3) * rc + kB2) * rc + kB1) * rc +
       1.0);
  const double central = q * cnum / cden;

  const double rt = (q < 0.0) ? p : 1.0 - p;
  const double s = std::sqrt(-log_impl(rt));
  const double tm = s - 1.6;
  const double mnum =
      (((((((kC7 * tm + kC6) * tm + kC5) * tm + kC4) * tm + kC3) * tm + kC2) * tm + kC1) * tm +
       kC0);
  const double mden =
      (((((((kD7 * tm + kD6) * tm + kD5) * tm + kD4) * tm + kD3) * tm + kD2) * tm + kD1) * tm +
       1.0);
  const double tf = s - 5.0;
  const double fnum =
      (((((((kE7 * tf + kE6) * tf + kE5) * tf + kE4) * tf + kE3) * tf + kE2) * tf + kE1) * tf +
       kE0);
  const double fden =
      (((((((kF7 * tf + kF6) * tf + kF5) * tf + kF4) * tf + kF3) * tf + kF2) * tf + kF1) * tf +
       1.0);
  const double tail_mid = mnum / mden;
  const double tail_far = fnum / fden;
  const double tail_mag = (s <= 5.0) ? tail_mid : tail_far;
  const double tail = (q < 0.0) ? -tail_mag : tail_mag;

  const double aq = (q < 0.0) ? -q : q;
  return (aq <= 0.425) ? central : tail;
}

}  // namespace

double portable_log(double x) { return log_impl(x); }

double normal_icdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_icdf: p must lie strictly inside (0,1)");
  }
  return icdf_impl(p);
}

void generate_normals_scalar(std::uint64_t seed, std::uint64_t stream,
                             std::size_t count, double scale, double* out) {
  const auto k0 = static_cast<std::uint32_t>(seed);
  const auto k1 = static_cast<std::uint32_t>(seed >> 32);
  const auto s0 = static_cast<std::uint32_t>(stream);
  const auto s1 = static_cast<std::uint32_t>(stream >> 32);
  for (std::uint64_t block = 0; 2 * block < count; ++block) {
    const PhiloxBlock b = philox4x32_10(static_cast<std::uint32_t>(block),
                                        static_cast<std::uint32_t>(block >> 32), s0, s1, k0, k1);
    const std::uint64_t r0 = b.x[0] | (static_cast<std::uint64_t>(b.x[1]) << 32);
    const std::uint64_t r1 = b.x[2] | (static_cast<std::uint64_t>(b.x[3]) << 32);
    out[2 * block] = icdf_impl(u01_from_bits(r0)) * scale;
    if (2 * block + 1 < count) {
      out[2 * block + 1] = icdf_impl(u01_from_bits(r1)) * scale;
    }
  }
}

#if !defined(QUASIM_AVX2_TU)
void generate_normals_avx2(std::uint64_t, std::uint64_t, std::size_t, double, double*) {
  throw std::runtime_error("AVX2 backend not compiled into this build");
}
bool avx2_cpu_supported() { return false; }
#else
bool avx2_cpu_supported();  // defined in kernels_avx2.cpp
#endif

bool avx2_supported() { return avx2_cpu_supported(); }

namespace {

Backend detect_backend() {
  if (std::getenv("QUASIM_FORCE_SCALAR") != nullptr) return Backend::scalar;
  return avx2_supported() ? Backend::avx2 : Backend::scalar;
}

std::atomic<Backend>& backend_slot() {
  static std::atomic<Backend> slot{detect_backend()};
  return slot;
}

}  // namespace

Backend active_backend() { return backend_slot().load(std::memory_order_relaxed); }

void set_backend(Backend backend) {
  if (backend == Backend::avx2 && !avx2_supported()) {
    throw std::runtime_error("AVX2 backend requested but not supported on this host");
  }
  backend_slot().store(backend, std::memory_order_relaxed);
}

const char* backend_name(Backend backend) {
  return backend == Backend::avx2 ? "avx2" : "scalar";
}

void generate_normals(std::uint64_t seed, std::uint64_t stream, std::size_t count,
                      double scale, double* out) {
  if (active_backend() == Backend::avx2) {
    generate_normals_avx2(seed, stream, count, scale, out);
  } else {
    generate_normals_scalar(seed, stream, count, scale, out);
  }
}

}  // namespace quasim::kernels
