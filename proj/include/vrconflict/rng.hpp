#pragma once

#include <cstdint>
#include <random>
#include <vector>

// Deterministic randomness.  All value streams (uniform, normal, shuffles)
// are produced by our own transforms over mt19937_64 rather than the
// std::*_distribution classes, whose output is implementation-defined; the
// artifacts this tool writes must not depend on the standard library build.

namespace vrconflict {

// splitmix64 finalizer
std::uint64_t mix64(std::uint64_t x);

// Derives an independent stream seed from a master seed plus up to three
// stream tags (e.g. purpose, participant, session).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag,
                          std::uint64_t a = 0, std::uint64_t b = 0);

// Stream tags used throughout the pipeline; kept in one place so the staged
// CLI path and the in-memory path derive identical seeds.
enum class SeedStream : std::uint64_t {
  blocked_schedule = 1,
  blocked_trials = 2,
  blocked_markers = 3,
  oddball_trials = 4,
  oddball_markers = 5,
  noise = 6,
  noise_channel = 7,
  trial_match = 8,
};

std::uint64_t derive_seed(std::uint64_t master, SeedStream tag,
                          std::uint64_t a = 0, std::uint64_t b = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // [0, 1), 53-bit resolution
  double uniform();
  // [lo, hi)
  double uniform(double lo, double hi);
  // unbiased integer in [0, n), n > 0
  std::uint64_t uniform_index(std::uint64_t n);
  // standard normal via Box-Muller (one spare cached)
  double normal();
  double normal(double mean, double sd);

  // Fisher-Yates
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace vrconflict
