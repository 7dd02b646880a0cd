#include "vrconflict/syntheeg.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "vrconflict/kernels.hpp"
#include "vrconflict/rng.hpp"

namespace vrconflict {

namespace {

// White Gaussian, drawn in float so the on-disk f32 round trip is lossless.
void fill_white(std::vector<float>& buf, Rng& rng, double sd) {
  for (float& v : buf) v = static_cast<float>(rng.normal(0.0, sd));
}

struct FftwPlans {
  std::size_t n;
  float* real;
  fftwf_complex* spec;
  fftwf_plan fwd;
  fftwf_plan inv;

  explicit FftwPlans(std::size_t n_samples) : n(n_samples) {
    real = fftwf_alloc_real(n);
    spec = fftwf_alloc_complex(n / 2 + 1);
    fwd = fftwf_plan_dft_r2c_1d(static_cast<int>(n), real, spec, FFTW_ESTIMATE);
    inv = fftwf_plan_dft_c2r_1d(static_cast<int>(n), spec, real, FFTW_ESTIMATE);
    if (fwd == nullptr || inv == nullptr) throw std::runtime_error("fftw plan failed");
  }
  ~FftwPlans() {
    fftwf_destroy_plan(inv);
    fftwf_destroy_plan(fwd);
    fftwf_free(spec);
    fftwf_free(real);
  }
  FftwPlans(const FftwPlans&) = delete;
  FftwPlans& operator=(const FftwPlans&) = delete;
};

// In-place 1/sqrt(f) spectral shaping and rescale to the exact target sd.
void shape_pink(std::vector<float>& x, FftwPlans& plans, double fs, double sd_uv) {
  const std::size_t n = x.size();
  std::copy(x.begin(), x.end(), plans.real);
  fftwf_execute(plans.fwd);

  plans.spec[0][0] = 0.0f;  // drop DC
  plans.spec[0][1] = 0.0f;
  for (std::size_t k = 1; k <= n / 2; ++k) {
    const double f = static_cast<double>(k) * fs / static_cast<double>(n);
    const float g = static_cast<float>(1.0 / std::sqrt(f));
    plans.spec[k][0] *= g;
    plans.spec[k][1] *= g;
  }
  fftwf_execute(plans.inv);

  // normalize the unscaled FFTW round trip, then pin the sd
  const float inv_n = 1.0f / static_cast<float>(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = plans.real[i] * inv_n;

  double mean = 0.0;
  for (float v : x) mean += v;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (float v : x) {
    const double d = v - mean;
    var += d * d;
  }
  var /= static_cast<double>(n);
  const double sd = std::sqrt(var);
  if (sd > 0.0) kernels::scale_f32(x, static_cast<float>(sd_uv / sd));
}

}  // namespace

EegRecording gen_noise(const ChannelLayout& layout, std::size_t n_samples,
                       const NoiseSpec& spec, double sample_rate_hz) {
  layout.validate();
  if (sample_rate_hz <= 0) throw std::invalid_argument("sample rate must be positive");
  if (spec.sd_uv < 0) throw std::invalid_argument("noise sd must be non-negative");

  EegRecording rec = EegRecording::zeros(layout, n_samples, sample_rate_hz);
  if (n_samples == 0 || spec.sd_uv == 0.0) return rec;

  std::vector<float> buf(n_samples);
  std::unique_ptr<FftwPlans> plans;
  if (spec.kind == NoiseKind::Pink && n_samples >= 2)
    plans = std::make_unique<FftwPlans>(n_samples);

  for (std::size_t c = 0; c < layout.size(); ++c) {
    Rng rng(derive_seed(spec.seed, SeedStream::noise_channel, c));
    if (spec.kind == NoiseKind::Pink && plans != nullptr) {
      fill_white(buf, rng, 1.0);
      shape_pink(buf, *plans, sample_rate_hz, spec.sd_uv);
    } else {
      fill_white(buf, rng, spec.sd_uv);
    }
    auto dst = rec.channel(c);
    for (std::size_t i = 0; i < n_samples; ++i) dst[i] = static_cast<double>(buf[i]);
  }
  return rec;
}

std::size_t fft_friendly_length(std::size_t n) {
  if (n <= 1) return 1;
  std::size_t best = std::numeric_limits<std::size_t>::max();
  for (std::size_t p5 = 1; p5 < best; p5 *= 5) {
    for (std::size_t p35 = p5; p35 < best; p35 *= 3) {
      std::size_t v = p35;
      while (v < n) v *= 2;
      best = std::min(best, v);
      if (p35 >= n) break;
    }
    if (p5 >= n) break;
  }
  return best;
}

ErpTemplate ErpTemplate::frontal_default() {
  ErpTemplate t;
  t.channel_weights = {
      {"Fz", 1.0}, {"FCz", 1.0}, {"F3", 0.8},  {"F4", 0.8},  {"FC3", 0.7}, {"FC4", 0.7},
      {"Cz", 0.6}, {"Fp1", 0.3}, {"Fp2", 0.3}, {"F7", 0.3},  {"F8", 0.3},  {"C3", 0.3},
      {"C4", 0.3}, {"FT7", 0.2}, {"FT8", 0.2}, {"CPz", 0.2}, {"CP3", 0.1}, {"CP4", 0.1},
  };
  return t;
}

void ErpTemplate::validate() const {
  if (!(width_ms > 0)) throw std::invalid_argument("template width must be positive");
  if (peak_latency_ms < 0) throw std::invalid_argument("template latency must be non-negative");
}

TemplateWaveform render_template(const ErpTemplate& tmpl, double sample_rate_hz,
                                 const ChannelLayout& layout) {
  tmpl.validate();
  layout.validate();
  if (sample_rate_hz <= 0) throw std::invalid_argument("sample rate must be positive");

  TemplateWaveform out;
  out.sample_rate_hz = sample_rate_hz;
  const double span_ms = tmpl.peak_latency_ms + 4.0 * tmpl.width_ms;
  const auto len = static_cast<std::size_t>(std::llround(span_ms / 1000.0 * sample_rate_hz)) + 1;
  out.kernel.resize(len);
  for (std::size_t i = 0; i < len; ++i) {
    const double t_ms = static_cast<double>(i) * 1000.0 / sample_rate_hz;
    const double z = (t_ms - tmpl.peak_latency_ms) / tmpl.width_ms;
    out.kernel[i] = tmpl.peak_amplitude_uv * std::exp(-0.5 * z * z);
  }

  out.channel_gain.assign(layout.size(), 0.0);
  for (const auto& [label, w] : tmpl.channel_weights)
    out.channel_gain[layout.index_of(label)] = w;  // throws on unknown label
  return out;
}

ScenarioSpec ScenarioSpec::default_scales() {
  ScenarioSpec s;
  s.scales = {
      {{HandStyle::S1, DLevel::D1}, 0.0}, {{HandStyle::S1, DLevel::D2}, 1.0},
      {{HandStyle::S2, DLevel::D1}, 0.0}, {{HandStyle::S2, DLevel::D2}, 0.4},
      {{HandStyle::S3, DLevel::D1}, 0.0}, {{HandStyle::S3, DLevel::D2}, 0.0},
  };
  return s;
}

double ScenarioSpec::scale_for(const Condition& cond) const {
  if (!cond.style || !cond.d_level) return 0.0;
  auto it = scales.find(Key{*cond.style, *cond.d_level});
  return it == scales.end() ? 0.0 : it->second;
}

EegRecording inject(const EegRecording& rec, std::span<const EventMarker> markers,
                    const ErpTemplate& tmpl, const ScenarioSpec& scenario) {
  validate_markers(rec, markers);
  const TemplateWaveform tw = render_template(tmpl, rec.sample_rate_hz, rec.layout);

  EegRecording out = rec;
  for (const auto& m : markers) {
    if (m.code != MarkerCode::FeedbackOnset) continue;
    const double scale = scenario.scale_for(m.condition);
    if (scale == 0.0) continue;
    const std::size_t len = std::min(tw.kernel.size(), rec.n_samples - m.sample_index);
    const std::span<const double> kernel(tw.kernel.data(), len);
    for (std::size_t c = 0; c < out.n_channels(); ++c) {
      const double gain = tw.channel_gain[c] * scale;
      if (gain == 0.0) continue;
      kernels::axpy(out.channel(c).subspan(m.sample_index, len), gain, kernel);
    }
  }
  return out;
}

}  // namespace vrconflict
