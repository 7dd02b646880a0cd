#include "vrconflict/rng.hpp"

#include <cmath>
#include <numbers>

namespace vrconflict {

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer (Steele, Lea, Flood 2014)
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t a,
                          std::uint64_t b) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ (tag * 0xff51afd7ed558ccdULL));
  h = mix64(h ^ (a * 0xc4ceb9fe1a85ec53ULL));
  h = mix64(h ^ (b * 0x2545f4914f6cdd1dULL));
  return h;
}

std::uint64_t derive_seed(std::uint64_t master, SeedStream tag, std::uint64_t a,
                          std::uint64_t b) {
  return derive_seed(master, static_cast<std::uint64_t>(tag), a, b);
}

double Rng::uniform() {
  return std::ldexp(static_cast<double>(next_u64() >> 11), -53);
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  // rejection sampling on the top range multiple, no modulo bias
  const std::uint64_t limit = n * (UINT64_MAX / n);
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 pulled away from 0 so the log stays finite
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  have_spare_ = true;
  return r * std::cos(angle);
}

double Rng::normal(double mean, double sd) { return mean + sd * normal(); }

}  // namespace vrconflict
