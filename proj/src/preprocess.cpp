#include "vrconflict/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace vrconflict {

void FilterSpec::validate(double sample_rate_hz) const {
  if (sample_rate_hz <= 0) throw std::invalid_argument("sample rate must be positive");
  if (!(high_pass_hz > 0)) throw std::invalid_argument("high_pass_hz must be positive");
  if (!(low_pass_hz > high_pass_hz))
    throw std::invalid_argument("low_pass_hz must exceed high_pass_hz");
  if (!(low_pass_hz < sample_rate_hz / 2))
    throw std::invalid_argument("low_pass_hz must sit below Nyquist");
  if (order < 2 || order % 2 != 0 || order > 16)
    throw std::invalid_argument("filter order must be even, between 2 and 16");
}

std::vector<kernels::Biquad> design_bandpass(const FilterSpec& spec, double fs) {
  spec.validate(fs);
  using cplx = std::complex<double>;
  const double pi = std::numbers::pi;

  // prewarped edge frequencies (rad/s), geometric center and width
  const double w1 = 2.0 * fs * std::tan(pi * spec.high_pass_hz / fs);
  const double w2 = 2.0 * fs * std::tan(pi * spec.low_pass_hz / fs);
  const double bw = w2 - w1;
  const double w0 = std::sqrt(w1 * w2);

  // Butterworth prototype poles on the unit circle, upper half plane only;
  // the band-pass transform s_lp = (s^2 + w0^2)/(bw*s) splits each into two
  // poles, and conjugates complete every biquad.
  const int n = spec.order;
  std::vector<cplx> bp_poles;
  for (int k = 1; k <= n; ++k) {
    const double theta = pi * (2.0 * k + n - 1.0) / (2.0 * n);
    const cplx p(std::cos(theta), std::sin(theta));
    if (p.imag() <= 0) continue;
    const cplx a = 0.5 * bw * p;
    const cplx disc = std::sqrt(a * a - cplx(w0 * w0, 0.0));
    bp_poles.push_back(a + disc);
    bp_poles.push_back(a - disc);
  }

  // bilinear transform; numerator zeros land at z = +1 and z = -1, one pair
  // per section: b(z) = g * (1 - z^-2)
  const double fs2 = 2.0 * fs;
  const double omega0 = 2.0 * std::atan(w0 / fs2);  // digital center frequency
  const cplx e1 = std::exp(cplx(0.0, -omega0));
  const cplx e2 = e1 * e1;

  std::vector<kernels::Biquad> sections;
  sections.reserve(bp_poles.size());
  for (const cplx& q : bp_poles) {
    const cplx zq = (cplx(fs2, 0.0) + q) / (cplx(fs2, 0.0) - q);
    kernels::Biquad s;
    s.a1 = -2.0 * zq.real();
    s.a2 = std::norm(zq);
    // unit gain at the center frequency, section by section
    const cplx num = cplx(1.0, 0.0) - e2;
    const cplx den = cplx(1.0, 0.0) + s.a1 * e1 + s.a2 * e2;
    const double g = std::abs(den) / std::abs(num);
    s.b0 = g;
    s.b1 = 0.0;
    s.b2 = -g;
    sections.push_back(s);
  }
  return sections;
}

namespace {

constexpr double kPadSeconds = 1.0;

// odd reflection about the end points, scipy-style
void fill_extended_lane(std::span<double> dst4, std::size_t lane, std::span<const double> src,
                        std::size_t pad) {
  const std::size_t n = src.size();
  auto put = [&](std::size_t frame, double v) { dst4[frame * kernels::biquad_lanes + lane] = v; };
  for (std::size_t i = 0; i < pad; ++i) put(i, 2.0 * src[0] - src[pad - i]);
  for (std::size_t i = 0; i < n; ++i) put(pad + i, src[i]);
  for (std::size_t i = 0; i < pad; ++i) put(pad + n + i, 2.0 * src[n - 1] - src[n - 2 - i]);
}

void reverse_frames(std::span<double> buf) {
  const std::size_t lanes = kernels::biquad_lanes;
  const std::size_t n_frames = buf.size() / lanes;
  for (std::size_t t = 0; t < n_frames / 2; ++t) {
    double* a = buf.data() + t * lanes;
    double* b = buf.data() + (n_frames - 1 - t) * lanes;
    std::swap_ranges(a, a + lanes, b);
  }
}

}  // namespace

EegRecording bandpass_filter(const EegRecording& rec, const FilterSpec& spec) {
  spec.validate(rec.sample_rate_hz);
  const auto pad = static_cast<std::size_t>(std::llround(rec.sample_rate_hz * kPadSeconds));
  if (rec.n_samples < 2 * pad)
    throw std::invalid_argument("recording too short to filter: need at least " +
                                std::to_string(2 * pad) + " samples for reflection padding");

  const auto sections = design_bandpass(spec, rec.sample_rate_hz);
  const std::size_t lanes = kernels::biquad_lanes;
  const std::size_t n = rec.n_samples;
  const std::size_t ext = n + 2 * pad;

  EegRecording out = rec;
  std::vector<double> buf(ext * lanes);
  for (std::size_t group = 0; group < rec.n_channels(); group += lanes) {
    const std::size_t width = std::min(lanes, rec.n_channels() - group);
    std::fill(buf.begin(), buf.end(), 0.0);
    for (std::size_t l = 0; l < width; ++l)
      fill_extended_lane(buf, l, rec.channel(group + l), pad);

    kernels::biquad_forward_x4(buf, sections);
    if (spec.zero_phase) {
      reverse_frames(buf);
      kernels::biquad_forward_x4(buf, sections);
      reverse_frames(buf);
    }

    for (std::size_t l = 0; l < width; ++l) {
      auto dst = out.channel(group + l);
      for (std::size_t i = 0; i < n; ++i) dst[i] = buf[(pad + i) * lanes + l];
    }
  }
  return out;
}

std::size_t EpochWindow::pre_samples(double fs) const {
  return static_cast<std::size_t>(std::llround(pre_ms / 1000.0 * fs));
}

std::size_t EpochWindow::post_samples(double fs) const {
  return static_cast<std::size_t>(std::llround(post_ms / 1000.0 * fs));
}

std::size_t EpochWindow::length(double fs) const { return pre_samples(fs) + post_samples(fs); }

std::span<double> Epoch::channel(std::size_t c) {
  return {data.data() + c * n_samples, n_samples};
}

std::span<const double> Epoch::channel(std::size_t c) const {
  return {data.data() + c * n_samples, n_samples};
}

double Epoch::time_ms(std::size_t i) const {
  return (static_cast<double>(i) - static_cast<double>(pre_samples)) * 1000.0 / sample_rate_hz;
}

EpochSet extract_epochs(const EegRecording& rec, std::span<const EventMarker> markers,
                        const EpochWindow& window, const std::set<MarkerCode>& codes) {
  validate_markers(rec, markers);
  const double fs = rec.sample_rate_hz;
  const std::size_t pre = window.pre_samples(fs);
  const std::size_t post = window.post_samples(fs);
  if (pre + post == 0) throw std::invalid_argument("epoch window is empty");

  EpochSet set;
  set.layout = rec.layout;
  set.sample_rate_hz = fs;
  set.window = window;
  for (const auto& m : markers) {
    if (codes.find(m.code) == codes.end()) continue;
    if (m.sample_index < pre) {
      set.rejection_log.push_back({m, "pre-boundary", 0.0});
      continue;
    }
    if (m.sample_index + post > rec.n_samples) {
      set.rejection_log.push_back({m, "post-boundary", 0.0});
      continue;
    }
    Epoch e;
    e.condition = m.condition;
    e.marker_sample = m.sample_index;
    e.n_channels = rec.n_channels();
    e.n_samples = pre + post;
    e.pre_samples = pre;
    e.sample_rate_hz = fs;
    e.data.resize(e.n_channels * e.n_samples);
    const std::size_t start = m.sample_index - pre;
    for (std::size_t c = 0; c < e.n_channels; ++c) {
      auto src = rec.channel(c).subspan(start, e.n_samples);
      std::copy(src.begin(), src.end(), e.channel(c).begin());
    }
    set.epochs.push_back(std::move(e));
  }
  return set;
}

Epoch baseline_correct(const Epoch& epoch, double baseline_lo_ms, double baseline_hi_ms) {
  if (!(baseline_lo_ms < baseline_hi_ms))
    throw std::invalid_argument("baseline window must be non-empty");
  const double fs = epoch.sample_rate_hz;
  const auto to_idx = [&](double t_ms) {
    return std::llround(t_ms / 1000.0 * fs) + static_cast<long long>(epoch.pre_samples);
  };
  const long long lo = to_idx(baseline_lo_ms);
  const long long hi = to_idx(baseline_hi_ms);
  if (lo < 0 || hi > static_cast<long long>(epoch.n_samples) || lo >= hi)
    throw std::out_of_range("baseline window outside the epoch");

  Epoch out = epoch;
  const auto count = static_cast<std::size_t>(hi - lo);
  for (std::size_t c = 0; c < out.n_channels; ++c) {
    const double mean =
        kernels::sum(epoch.channel(c).subspan(static_cast<std::size_t>(lo), count)) /
        static_cast<double>(count);
    kernels::shift(out.channel(c), -mean);
  }
  return out;
}

EpochSet baseline_correct(const EpochSet& set) {
  EpochSet out = set;
  for (auto& e : out.epochs) e = baseline_correct(e, -set.window.pre_ms, 0.0);
  return out;
}

EpochSet reject_artifacts(const EpochSet& set, double threshold_uv) {
  if (!(threshold_uv > 0)) throw std::invalid_argument("artifact threshold must be positive");
  EpochSet out;
  out.layout = set.layout;
  out.sample_rate_hz = set.sample_rate_hz;
  out.window = set.window;
  out.rejection_log = set.rejection_log;
  for (const auto& e : set.epochs) {
    double peak = 0.0;
    for (std::size_t c = 0; c < e.n_channels; ++c)
      peak = std::max(peak, kernels::max_abs(e.channel(c)));
    if (peak > threshold_uv) {
      out.rejection_log.push_back(
          {{e.marker_sample, MarkerCode::FeedbackOnset, e.condition}, "amplitude", peak});
    } else {
      out.epochs.push_back(e);
    }
  }
  return out;
}

}  // namespace vrconflict
