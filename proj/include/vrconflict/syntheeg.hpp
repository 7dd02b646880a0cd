#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "vrconflict/signal.hpp"

namespace vrconflict {

enum class NoiseKind { White, Pink };

struct NoiseSpec {
  NoiseKind kind = NoiseKind::Pink;
  double sd_uv = 10.0;   // per-channel standard deviation after shaping
  std::uint64_t seed = 0;
};

// Background noise, one independent stream per channel (seed derived from
// spec.seed and the channel index).  Pink noise is white Gaussian shaped by
// 1/sqrt(f) in the frequency domain (DC removed), rescaled to sd_uv exactly.
EegRecording gen_noise(const ChannelLayout& layout, std::size_t n_samples,
                       const NoiseSpec& spec, double sample_rate_hz = 1000.0);

// Smallest 5-smooth (2^a 3^b 5^c) length >= n.  Spectral shaping of a
// prime-length recording is several times slower, so callers that control
// the recording length should round up to this before calling gen_noise.
std::size_t fft_friendly_length(std::size_t n);

// Feedback-locked component: Gaussian bump of the given width centred at
// peak_latency_ms after the marker, scaled per channel by channel_weights
// (channels not listed get 0).
struct ErpTemplate {
  double peak_amplitude_uv = -5.0;
  double peak_latency_ms = 170.0;
  double width_ms = 25.0;
  std::map<std::string, double> channel_weights;

  static ErpTemplate frontal_default();
  void validate() const;
};

struct TemplateWaveform {
  double sample_rate_hz = 1000.0;
  std::vector<double> kernel;        // peak_amplitude * gaussian, from t=0 to latency + 4*width
  std::vector<double> channel_gain;  // per layout channel
};

TemplateWaveform render_template(const ErpTemplate& tmpl, double sample_rate_hz,
                                 const ChannelLayout& layout);

// Per-(style, d_level) amplitude scaling of the injected template.
// Pairs not present scale to 0.
struct ScenarioSpec {
  struct Key {
    HandStyle style;
    DLevel d_level;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, double> scales;

  // realistic hand full response, abstract hand reduced, arrow none;
  // no response to the expected level
  static ScenarioSpec default_scales();
  double scale_for(const Condition& cond) const;
};

// Adds the scaled template at every FeedbackOnset marker; events whose scale
// is zero leave the data untouched bit-for-bit.  Template tails are clipped
// at the end of the recording.
EegRecording inject(const EegRecording& rec, std::span<const EventMarker> markers,
                    const ErpTemplate& tmpl, const ScenarioSpec& scenario);

}  // namespace vrconflict
