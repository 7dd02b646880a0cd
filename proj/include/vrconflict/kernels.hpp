#pragma once

#include <cstddef>
#include <span>

// Low-level array kernels used by the signal chain.  Every operation has a
// scalar reference implementation (namespace scalar) and, on x86-64 builds, an
// AVX2 variant; the unqualified entry points dispatch once at load time based
// on what the CPU supports.  Elementwise kernels are bit-exact across
// backends (same operation order, no FMA contraction); the reductions are
// allowed to reassociate and only agree to rounding error.

namespace vrconflict::kernels {

// One second-order filter section, direct form II transposed:
//   y[n] = b0*x[n] + s1;  s1 = b1*x[n] - a1*y[n] + s2;  s2 = b2*x[n] - a2*y[n]
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

inline constexpr std::size_t biquad_lanes = 4;  // frame width of biquad_forward_x4

bool avx2_available();
const char* active_backend();  // "avx2" or "scalar"

// dst[i] += src[i]
void add(std::span<double> dst, std::span<const double> src);
// dst[i] = a[i] - b[i]
void subtract(std::span<double> dst, std::span<const double> a, std::span<const double> b);
// x[i] *= c
void scale(std::span<double> x, double c);
// x[i] += c
void shift(std::span<double> x, double c);
// y[i] += a * x[i]
void axpy(std::span<double> y, double a, std::span<const double> x);
double sum(std::span<const double> x);
double sumsq(std::span<const double> x);
double max_abs(std::span<const double> x);
// x[i] *= c (float path used by the noise synthesiser)
void scale_f32(std::span<float> x, float c);

// Cascade of biquad sections run forward over frames of `biquad_lanes`
// interleaved channels; data.size() must be a multiple of biquad_lanes.
// States start at zero.  Lanes are independent, so scalar and AVX2 agree
// bit-for-bit.
void biquad_forward_x4(std::span<double> data, std::span<const Biquad> sections);

namespace scalar {
void add(std::span<double> dst, std::span<const double> src);
void subtract(std::span<double> dst, std::span<const double> a, std::span<const double> b);
void scale(std::span<double> x, double c);
void shift(std::span<double> x, double c);
void axpy(std::span<double> y, double a, std::span<const double> x);
double sum(std::span<const double> x);
double sumsq(std::span<const double> x);
double max_abs(std::span<const double> x);
void scale_f32(std::span<float> x, float c);
void biquad_forward_x4(std::span<double> data, std::span<const Biquad> sections);
}  // namespace scalar

}  // namespace vrconflict::kernels
