// AVX2 kernel variants.  Compiled with -mavx2 and -ffp-contract=off only; no
// FMA, so the elementwise operations round exactly like the scalar reference.

#include <immintrin.h>

#include <cassert>
#include <cmath>

#include "vrconflict/kernels.hpp"

namespace vrconflict::kernels::avx2 {

void add(std::span<double> dst, std::span<const double> src) {
  assert(dst.size() == src.size());
  std::size_t i = 0;
  const std::size_t n = dst.size();
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_loadu_pd(dst.data() + i);
    __m256d s = _mm256_loadu_pd(src.data() + i);
    _mm256_storeu_pd(dst.data() + i, _mm256_add_pd(d, s));
  }
  for (; i < n; ++i) dst[i] += src[i];
}

void subtract(std::span<double> dst, std::span<const double> a, std::span<const double> b) {
  assert(dst.size() == a.size() && dst.size() == b.size());
  std::size_t i = 0;
  const std::size_t n = dst.size();
  for (; i + 4 <= n; i += 4) {
    __m256d va = _mm256_loadu_pd(a.data() + i);
    __m256d vb = _mm256_loadu_pd(b.data() + i);
    _mm256_storeu_pd(dst.data() + i, _mm256_sub_pd(va, vb));
  }
  for (; i < n; ++i) dst[i] = a[i] - b[i];
}

void scale(std::span<double> x, double c) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  const std::size_t n = x.size();
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x.data() + i, _mm256_mul_pd(_mm256_loadu_pd(x.data() + i), vc));
  for (; i < n; ++i) x[i] *= c;
}

void shift(std::span<double> x, double c) {
  const __m256d vc = _mm256_set1_pd(c);
  std::size_t i = 0;
  const std::size_t n = x.size();
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x.data() + i, _mm256_add_pd(_mm256_loadu_pd(x.data() + i), vc));
  for (; i < n; ++i) x[i] += c;
}

void axpy(std::span<double> y, double a, std::span<const double> x) {
  assert(y.size() == x.size());
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  const std::size_t n = y.size();
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y.data() + i);
    __m256d vx = _mm256_loadu_pd(x.data() + i);
    _mm256_storeu_pd(y.data() + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

double sum(std::span<const double> x) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  const std::size_t n = x.size();
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x.data() + i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += x[i];
  return s;
}

double sumsq(std::span<const double> x) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  const std::size_t n = x.size();
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x.data() + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(v, v));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

double max_abs(std::span<const double> x) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  const std::size_t n = x.size();
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_andnot_pd(sign_mask, _mm256_loadu_pd(x.data() + i));
    acc = _mm256_max_pd(acc, v);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double m = std::max(std::max(lanes[0], lanes[1]), std::max(lanes[2], lanes[3]));
  for (; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

void scale_f32(std::span<float> x, float c) {
  const __m256 vc = _mm256_set1_ps(c);
  std::size_t i = 0;
  const std::size_t n = x.size();
  for (; i + 8 <= n; i += 8)
    _mm256_storeu_ps(x.data() + i, _mm256_mul_ps(_mm256_loadu_ps(x.data() + i), vc));
  for (; i < n; ++i) x[i] *= c;
}

void biquad_forward_x4(std::span<double> data, std::span<const Biquad> sections) {
  assert(data.size() % biquad_lanes == 0);
  const std::size_t n_frames = data.size() / biquad_lanes;
  const std::size_t n_sec = sections.size();
  assert(n_sec <= 16);
  __m256d s1[16], s2[16], b0[16], b1[16], b2[16], a1[16], a2[16];
  for (std::size_t k = 0; k < n_sec; ++k) {
    s1[k] = _mm256_setzero_pd();
    s2[k] = _mm256_setzero_pd();
    b0[k] = _mm256_set1_pd(sections[k].b0);
    b1[k] = _mm256_set1_pd(sections[k].b1);
    b2[k] = _mm256_set1_pd(sections[k].b2);
    a1[k] = _mm256_set1_pd(sections[k].a1);
    a2[k] = _mm256_set1_pd(sections[k].a2);
  }
  double* p = data.data();
  for (std::size_t t = 0; t < n_frames; ++t, p += biquad_lanes) {
    __m256d x = _mm256_loadu_pd(p);
    for (std::size_t k = 0; k < n_sec; ++k) {
      const __m256d y = _mm256_add_pd(_mm256_mul_pd(b0[k], x), s1[k]);
      s1[k] = _mm256_add_pd(
          _mm256_sub_pd(_mm256_mul_pd(b1[k], x), _mm256_mul_pd(a1[k], y)), s2[k]);
      s2[k] = _mm256_sub_pd(_mm256_mul_pd(b2[k], x), _mm256_mul_pd(a2[k], y));
      x = y;
    }
    _mm256_storeu_pd(p, x);
  }
  _mm256_zeroupper();
}

}  // namespace vrconflict::kernels::avx2
