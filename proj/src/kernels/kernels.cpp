#include "vrconflict/kernels.hpp"

#include <cassert>
#include <cmath>
#include <cstdlib>

namespace vrconflict::kernels {

namespace scalar {

void add(std::span<double> dst, std::span<const double> src) {
  assert(dst.size() == src.size());
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void subtract(std::span<double> dst, std::span<const double> a, std::span<const double> b) {
  assert(dst.size() == a.size() && dst.size() == b.size());
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = a[i] - b[i];
}

void scale(std::span<double> x, double c) {
  for (double& v : x) v *= c;
}

void shift(std::span<double> x, double c) {
  for (double& v : x) v += c;
}

void axpy(std::span<double> y, double a, std::span<const double> x) {
  assert(y.size() == x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

double sum(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc;
}

double sumsq(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

double max_abs(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

void scale_f32(std::span<float> x, float c) {
  for (float& v : x) v *= c;
}

void biquad_forward_x4(std::span<double> data, std::span<const Biquad> sections) {
  assert(data.size() % biquad_lanes == 0);
  const std::size_t n_frames = data.size() / biquad_lanes;
  const std::size_t n_sec = sections.size();
  assert(n_sec <= 16);
  double s1[16][biquad_lanes] = {};
  double s2[16][biquad_lanes] = {};
  for (std::size_t t = 0; t < n_frames; ++t) {
    double* frame = data.data() + t * biquad_lanes;
    for (std::size_t k = 0; k < n_sec; ++k) {
      const Biquad& q = sections[k];
      for (std::size_t l = 0; l < biquad_lanes; ++l) {
        const double x = frame[l];
        const double y = q.b0 * x + s1[k][l];
        s1[k][l] = (q.b1 * x - q.a1 * y) + s2[k][l];
        s2[k][l] = q.b2 * x - q.a2 * y;
        frame[l] = y;
      }
    }
  }
}

}  // namespace scalar

#ifdef VRCONFLICT_HAVE_AVX2
namespace avx2 {
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
}  // namespace avx2
#endif

bool avx2_available() {
#if defined(VRCONFLICT_HAVE_AVX2) && defined(__GNUC__)
  if (std::getenv("VRCONFLICT_FORCE_SCALAR") != nullptr) return false;
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

namespace {
const bool g_use_avx2 = avx2_available();
}

const char* active_backend() { return g_use_avx2 ? "avx2" : "scalar"; }

#ifdef VRCONFLICT_HAVE_AVX2
#define VRC_DISPATCH(fn, ...) \
  do { if (g_use_avx2) return avx2::fn(__VA_ARGS__); return scalar::fn(__VA_ARGS__); } while (0)
#else
#define VRC_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

void add(std::span<double> dst, std::span<const double> src) { VRC_DISPATCH(add, dst, src); }
void subtract(std::span<double> dst, std::span<const double> a, std::span<const double> b) {
  VRC_DISPATCH(subtract, dst, a, b);
}
void scale(std::span<double> x, double c) { VRC_DISPATCH(scale, x, c); }
void shift(std::span<double> x, double c) { VRC_DISPATCH(shift, x, c); }
void axpy(std::span<double> y, double a, std::span<const double> x) { VRC_DISPATCH(axpy, y, a, x); }
double sum(std::span<const double> x) { VRC_DISPATCH(sum, x); }
double sumsq(std::span<const double> x) { VRC_DISPATCH(sumsq, x); }
double max_abs(std::span<const double> x) { VRC_DISPATCH(max_abs, x); }
void scale_f32(std::span<float> x, float c) { VRC_DISPATCH(scale_f32, x, c); }
void biquad_forward_x4(std::span<double> data, std::span<const Biquad> sections) {
  VRC_DISPATCH(biquad_forward_x4, data, sections);
}

#undef VRC_DISPATCH

}  // namespace vrconflict::kernels
