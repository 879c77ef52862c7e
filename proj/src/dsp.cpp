#include "acnn/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "acnn/errors.hpp"

namespace acnn {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

// -- FrameConfig --------------------------------------------------------------

void FrameConfig::validate(int sample_rate) const {
  if (sample_rate <= 0) throw InvalidRange("sample_rate must be positive");
  if (frame_len <= 0 || frame_shift <= 0)
    throw InvalidRange("frame_len and frame_shift must be positive");
  if (frame_shift > frame_len) throw InvalidRange("frame_shift must not exceed frame_len");
  if (fft_size < frame_len_samples(sample_rate))
    throw InvalidRange("fft_size smaller than frame length in samples");
  if (!(mel_fmin < mel_fmax)) throw InvalidRange("mel_fmin must be below mel_fmax");
  if (mel_fmax > sample_rate / 2.0)
    throw InvalidRange("mel_fmax above Nyquist (" + std::to_string(sample_rate / 2) + " Hz)");
  if (num_mel < 1 || num_mfcc < 1) throw InvalidRange("num_mel and num_mfcc must be >= 1");
  if (num_mfcc + (mfcc_include_c0 ? 0 : 1) > num_mel)
    throw InvalidRange("num_mfcc too large for num_mel");
}

int FrameConfig::frame_len_samples(int sample_rate) const {
  return static_cast<int>(std::llround(frame_len * sample_rate));
}

int FrameConfig::frame_shift_samples(int sample_rate) const {
  return static_cast<int>(std::llround(frame_shift * sample_rate));
}

const char* feature_kind_name(FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kLogMel: return "logmel";
    case FeatureKind::kMfcc: return "mfcc";
    case FeatureKind::kProsody: return "prosody";
    case FeatureKind::kFused: return "logmel+prosody";
  }
  return "?";
}

FeatureKind feature_kind_from_name(const std::string& name) {
  if (name == "logmel") return FeatureKind::kLogMel;
  if (name == "mfcc") return FeatureKind::kMfcc;
  if (name == "prosody") return FeatureKind::kProsody;
  if (name == "logmel+prosody" || name == "fused") return FeatureKind::kFused;
  throw InvalidRange("unknown feature kind: " + name);
}

int feature_dim(FeatureKind kind, const FrameConfig& cfg) {
  switch (kind) {
    case FeatureKind::kLogMel: return cfg.num_mel;
    case FeatureKind::kMfcc: return cfg.num_mfcc;
    case FeatureKind::kProsody: return 7;
    case FeatureKind::kFused: return cfg.num_mel + 7;
  }
  return 0;
}

// -- framing -------------------------------------------------------------------

int frame_count(long long n_samples, int frame_len, int frame_shift) {
  if (n_samples < frame_len) return 0;
  return static_cast<int>((n_samples - frame_len) / frame_shift) + 1;
}

int frame_count_for_duration(double len_seconds, const FrameConfig& cfg) {
  // Integer-safe: (len - frame_len)/frame_shift + 1 with a small epsilon so
  // exact multiples do not round down.
  double q = (len_seconds - cfg.frame_len) / cfg.frame_shift;
  return static_cast<int>(std::floor(q + 1e-6)) + 1;
}

std::vector<std::vector<double>> frame_signal(const AudioClip& clip, const FrameConfig& cfg) {
  cfg.validate(clip.sample_rate);
  const int L = cfg.frame_len_samples(clip.sample_rate);
  const int S = cfg.frame_shift_samples(clip.sample_rate);
  const long long n = static_cast<long long>(clip.samples.size());
  if (n < L)
    throw ClipTooShort("clip has " + std::to_string(n) + " samples, need at least " +
                       std::to_string(L));
  const int count = frame_count(n, L, S);
  std::vector<std::vector<double>> frames(count);
  for (int t = 0; t < count; ++t) {
    const double* src = clip.samples.data() + static_cast<size_t>(t) * S;
    frames[t].assign(src, src + L);
  }
  return frames;
}

std::vector<double> hamming_window(int n) {
  if (n < 1) throw InvalidRange("window length must be >= 1");
  std::vector<double> w(n);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (int k = 0; k < n; ++k) w[k] = 0.54 - 0.46 * std::cos(2.0 * kPi * k / (n - 1));
  return w;
}

// -- FFT -----------------------------------------------------------------------

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, decimation in time.
void fft_inplace(std::vector<std::complex<double>>& a) {
  const int n = static_cast<int>(a.size());
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * kPi / len;
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (int j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[i + j];
        std::complex<double> t = a[i + j + len / 2] * w;
        a[i + j] = u + t;
        a[i + j + len / 2] = u - t;
        w *= wlen;
      }
    }
  }
}

}  // namespace

std::vector<double> power_spectrum(std::span<const double> frame, int fft_size) {
  if (fft_size < 1) throw InvalidRange("fft_size must be >= 1");
  if (static_cast<int>(frame.size()) > fft_size)
    throw DimensionMismatch("frame longer than fft_size");

  const int half = fft_size / 2;
  std::vector<double> out(half + 1);

  if (is_pow2(fft_size)) {
    std::vector<std::complex<double>> buf(fft_size, {0.0, 0.0});
    for (size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i];
    fft_inplace(buf);
    for (int k = 0; k <= half; ++k) out[k] = std::norm(buf[k]);
  } else {
    // Direct DFT fallback for non power-of-two sizes.
    for (int k = 0; k <= half; ++k) {
      double re = 0.0, im = 0.0;
      for (size_t t = 0; t < frame.size(); ++t) {
        double ang = -2.0 * kPi * k * static_cast<double>(t) / fft_size;
        re += frame[t] * std::cos(ang);
        im += frame[t] * std::sin(ang);
      }
      out[k] = re * re + im * im;
    }
  }
  return out;
}

// -- mel filterbank --------------------------------------------------------------

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Matrix mel_filterbank(const FrameConfig& cfg, int sample_rate) {
  if (cfg.mel_fmax > sample_rate / 2.0)
    throw InvalidRange("mel_fmax above Nyquist");
  if (!(cfg.mel_fmin < cfg.mel_fmax)) throw InvalidRange("mel_fmin must be below mel_fmax");

  const int bins = cfg.fft_size / 2 + 1;
  const double mel_lo = hz_to_mel(cfg.mel_fmin);
  const double mel_hi = hz_to_mel(cfg.mel_fmax);
  std::vector<double> centers(cfg.num_mel + 2);
  for (int m = 0; m < cfg.num_mel + 2; ++m)
    centers[m] = mel_lo + (mel_hi - mel_lo) * m / (cfg.num_mel + 1);

  Matrix fb(cfg.num_mel, bins);
  for (int k = 0; k < bins; ++k) {
    const double mel_k = hz_to_mel(static_cast<double>(k) * sample_rate / cfg.fft_size);
    for (int m = 1; m <= cfg.num_mel; ++m) {
      const double left = centers[m - 1], center = centers[m], right = centers[m + 1];
      double w = 0.0;
      if (mel_k >= left && mel_k <= center)
        w = (mel_k - left) / (center - left);
      else if (mel_k > center && mel_k <= right)
        w = (right - mel_k) / (right - center);
      fb(m - 1, k) = w;
    }
  }
  return fb;
}

std::vector<double> log_mel(std::span<const double> power_spec, const Matrix& filterbank) {
  if (static_cast<int>(power_spec.size()) != filterbank.cols)
    throw DimensionMismatch("power spectrum bins do not match filterbank");
  std::vector<double> out(filterbank.rows);
  for (int m = 0; m < filterbank.rows; ++m) {
    double e = dot(filterbank.row(m), power_spec.data(), filterbank.cols);
    out[m] = std::log(std::max(e, kLogFloorEps));
  }
  return out;
}

std::vector<double> mfcc(std::span<const double> logmel, const FrameConfig& cfg) {
  const int n = static_cast<int>(logmel.size());
  if (n != cfg.num_mel) throw DimensionMismatch("log-mel length does not match num_mel");
  const int first = cfg.mfcc_include_c0 ? 0 : 1;
  std::vector<double> out(cfg.num_mfcc);
  for (int i = 0; i < cfg.num_mfcc; ++i) {
    const int k = first + i;
    const double scale = k == 0 ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
    double acc = 0.0;
    for (int m = 0; m < n; ++m) acc += logmel[m] * std::cos(kPi * k * (2.0 * m + 1.0) / (2.0 * n));
    out[i] = scale * acc;
  }
  return out;
}

// -- pitch ----------------------------------------------------------------------

F0Estimate estimate_f0(std::span<const double> frame, int sample_rate, double f0_min,
                       double f0_max, double voicing_threshold) {
  F0Estimate est;
  const int n = static_cast<int>(frame.size());
  if (n < 4) return est;

  int lag_min = std::max(2, static_cast<int>(std::floor(sample_rate / f0_max)));
  int lag_max = std::min(n - 2, static_cast<int>(std::ceil(sample_rate / f0_min)));
  if (lag_min > lag_max) return est;

  // Prefix sums of squares for the normalization terms.
  std::vector<double> sq_prefix(n + 1, 0.0);
  for (int i = 0; i < n; ++i) sq_prefix[i + 1] = sq_prefix[i] + frame[i] * frame[i];
  const double total_energy = sq_prefix[n];
  if (total_energy < 1e-12) return est;  // silence

  const int nlags = lag_max - lag_min + 1;
  std::vector<double> r(nlags, 0.0);
  for (int lag = lag_min; lag <= lag_max; ++lag) {
    const int m = n - lag;
    double num = dot(frame.data(), frame.data() + lag, m);
    double e1 = sq_prefix[m];
    double e2 = sq_prefix[n] - sq_prefix[lag];
    double denom = std::sqrt(e1 * e2);
    r[lag - lag_min] = denom > 1e-20 ? num / denom : 0.0;
  }

  double r_max = r[0];
  for (double x : r) r_max = std::max(r_max, x);

  // Among local maxima close to the global peak, prefer the shortest lag.
  // This avoids halving the pitch when a multiple of the period correlates
  // about as well as the period itself.
  int best = -1;
  const double accept = 0.9 * r_max;
  for (int i = 0; i < nlags; ++i) {
    bool local_max = (i == 0 || r[i] >= r[i - 1]) && (i == nlags - 1 || r[i] >= r[i + 1]);
    if (local_max && r[i] >= accept) {
      best = i;
      break;
    }
  }
  if (best < 0) return est;

  // Parabolic refinement around the integer peak.
  double lag = lag_min + best;
  if (best > 0 && best < nlags - 1) {
    const double denom = r[best - 1] - 2.0 * r[best] + r[best + 1];
    if (std::abs(denom) > 1e-12) {
      double delta = 0.5 * (r[best - 1] - r[best + 1]) / denom;
      if (std::abs(delta) <= 0.5) lag += delta;
    }
  }

  est.voicing_prob = std::clamp(r[best], 0.0, 1.0);
  est.f0 = est.voicing_prob >= voicing_threshold ? sample_rate / lag : 0.0;
  return est;
}

// -- prosody --------------------------------------------------------------------

FeatureMatrix prosody_features(const AudioClip& clip, const FrameConfig& cfg) {
  const auto frames = frame_signal(clip, cfg);
  const int s = static_cast<int>(frames.size());
  FeatureMatrix out;
  out.kind = FeatureKind::kProsody;
  out.frame_shift = cfg.frame_shift;
  out.data.resize(7, s);

  std::vector<double> f0(s, 0.0), voicing(s, 0.0), peak(s, 0.0);
  for (int t = 0; t < s; ++t) {
    const auto& fr = frames[t];
    double energy = 0.0, pk = 0.0;
    for (double x : fr) {
      energy += x * x;
      pk = std::max(pk, std::abs(x));
    }
    out.data(0, t) = std::log(energy / fr.size() + kLogFloorEps);
    peak[t] = pk;
    auto est = estimate_f0(fr, clip.sample_rate, cfg.f0_min, cfg.f0_max, cfg.voicing_threshold);
    f0[t] = est.f0;
    voicing[t] = est.voicing_prob;
  }

  // F0 envelope: linear interpolation across unvoiced gaps, held at edges.
  std::vector<int> voiced;
  for (int t = 0; t < s; ++t)
    if (f0[t] > 0.0) voiced.push_back(t);

  std::vector<double> envelope(s, 0.0);
  if (!voiced.empty()) {
    for (int t = 0; t < voiced.front(); ++t) envelope[t] = f0[voiced.front()];
    for (int t = voiced.back() + 1; t < s; ++t) envelope[t] = f0[voiced.back()];
    for (size_t i = 0; i < voiced.size(); ++i) {
      envelope[voiced[i]] = f0[voiced[i]];
      if (i + 1 < voiced.size()) {
        int a = voiced[i], b = voiced[i + 1];
        for (int t = a + 1; t < b; ++t) {
          double alpha = static_cast<double>(t - a) / (b - a);
          envelope[t] = (1.0 - alpha) * f0[a] + alpha * f0[b];
        }
      }
    }
  }

  // Utterance-level perturbation measures over the voiced track, repeated on
  // every frame.
  double jitter_local = 0.0, jitter_diff = 0.0, shimmer_local = 0.0;
  const int nv = static_cast<int>(voiced.size());
  if (nv >= 2) {
    std::vector<double> period(nv), amp(nv);
    for (int i = 0; i < nv; ++i) {
      period[i] = clip.sample_rate / f0[voiced[i]];
      amp[i] = peak[voiced[i]];
    }
    double mean_period = 0.0, mean_amp = 0.0;
    for (int i = 0; i < nv; ++i) {
      mean_period += period[i];
      mean_amp += amp[i];
    }
    mean_period /= nv;
    mean_amp /= nv;

    double dsum = 0.0, asum = 0.0;
    for (int i = 1; i < nv; ++i) {
      dsum += std::abs(period[i] - period[i - 1]);
      asum += std::abs(amp[i] - amp[i - 1]);
    }
    if (mean_period > 0.0) jitter_local = dsum / (nv - 1) / mean_period;
    if (mean_amp > 0.0) shimmer_local = asum / (nv - 1) / mean_amp;

    if (nv >= 3 && mean_period > 0.0) {
      double ddsum = 0.0;
      for (int i = 2; i < nv; ++i)
        ddsum += std::abs((period[i] - period[i - 1]) - (period[i - 1] - period[i - 2]));
      jitter_diff = ddsum / (nv - 2) / mean_period;
    }
  }

  for (int t = 0; t < s; ++t) {
    out.data(1, t) = envelope[t];
    out.data(2, t) = voicing[t];
    out.data(3, t) = f0[t];
    out.data(4, t) = jitter_local;
    out.data(5, t) = jitter_diff;
    out.data(6, t) = shimmer_local;
  }
  return out;
}

// -- log-mel / MFCC extraction -----------------------------------------------------

FeatureMatrix extract_logmel(const AudioClip& clip, const FrameConfig& cfg) {
  const auto frames = frame_signal(clip, cfg);
  const auto window = hamming_window(static_cast<int>(frames[0].size()));
  const Matrix fb = mel_filterbank(cfg, clip.sample_rate);

  FeatureMatrix out;
  out.kind = FeatureKind::kLogMel;
  out.frame_shift = cfg.frame_shift;
  out.data.resize(cfg.num_mel, static_cast<int>(frames.size()));

  std::vector<double> windowed(frames[0].size());
  for (size_t t = 0; t < frames.size(); ++t) {
    for (size_t i = 0; i < windowed.size(); ++i) windowed[i] = frames[t][i] * window[i];
    const auto spec = power_spectrum(windowed, cfg.fft_size);
    const auto lm = log_mel(spec, fb);
    for (int m = 0; m < cfg.num_mel; ++m) out.data(m, static_cast<int>(t)) = lm[m];
  }
  return out;
}

FeatureMatrix extract_mfcc(const AudioClip& clip, const FrameConfig& cfg) {
  FeatureMatrix lm = extract_logmel(clip, cfg);
  FeatureMatrix out;
  out.kind = FeatureKind::kMfcc;
  out.frame_shift = cfg.frame_shift;
  out.data.resize(cfg.num_mfcc, lm.frames());
  std::vector<double> col(cfg.num_mel);
  for (int t = 0; t < lm.frames(); ++t) {
    for (int m = 0; m < cfg.num_mel; ++m) col[m] = lm.data(m, t);
    const auto c = mfcc(col, cfg);
    for (int i = 0; i < cfg.num_mfcc; ++i) out.data(i, t) = c[i];
  }
  return out;
}

FeatureMatrix extract_features(const AudioClip& clip, const FrameConfig& cfg, FeatureKind kind) {
  switch (kind) {
    case FeatureKind::kLogMel: return extract_logmel(clip, cfg);
    case FeatureKind::kMfcc: return extract_mfcc(clip, cfg);
    case FeatureKind::kProsody: return prosody_features(clip, cfg);
    case FeatureKind::kFused: {
      FeatureMatrix a = extract_logmel(clip, cfg);
      FeatureMatrix b = prosody_features(clip, cfg);
      FeatureMatrix fused;
      fused.kind = FeatureKind::kFused;
      fused.frame_shift = cfg.frame_shift;
      fused.data.resize(a.dim() + b.dim(), a.frames());
      for (int i = 0; i < a.dim(); ++i)
        std::copy(a.data.row(i), a.data.row(i) + a.frames(), fused.data.row(i));
      for (int i = 0; i < b.dim(); ++i)
        std::copy(b.data.row(i), b.data.row(i) + b.frames(), fused.data.row(a.dim() + i));
      return fused;
    }
  }
  throw InvalidRange("unknown feature kind");
}

// -- speaker normalization -----------------------------------------------------------

SpeakerStats compute_speaker_stats(const std::vector<const FeatureMatrix*>& matrices,
                                   const std::string& speaker_id) {
  if (matrices.empty()) throw InsufficientFrames("no matrices for speaker " + speaker_id);
  const int d = matrices.front()->dim();
  const FeatureKind kind = matrices.front()->kind;
  long long total = 0;
  std::vector<double> sum(d, 0.0), sumsq(d, 0.0);
  for (const FeatureMatrix* m : matrices) {
    if (m->dim() != d || m->kind != kind)
      throw DimensionMismatch("mixed feature kinds/dims for speaker " + speaker_id);
    for (int i = 0; i < d; ++i) {
      const double* row = m->data.row(i);
      for (int t = 0; t < m->frames(); ++t) {
        sum[i] += row[t];
        sumsq[i] += row[t] * row[t];
      }
    }
    total += m->frames();
  }
  if (total < 2)
    throw InsufficientFrames("speaker " + speaker_id + " has " + std::to_string(total) +
                             " frames, need >= 2");

  SpeakerStats stats;
  stats.speaker_id = speaker_id;
  stats.mean.resize(d);
  stats.std.resize(d);
  for (int i = 0; i < d; ++i) {
    stats.mean[i] = sum[i] / total;
    double var = sumsq[i] / total - stats.mean[i] * stats.mean[i];
    stats.std[i] = std::max(std::sqrt(std::max(var, 0.0)), kStdFloor);
  }
  return stats;
}

FeatureMatrix normalize(const FeatureMatrix& m, const SpeakerStats& stats) {
  if (m.dim() != static_cast<int>(stats.mean.size()))
    throw DimensionMismatch("matrix dim " + std::to_string(m.dim()) + " vs stats dim " +
                            std::to_string(stats.mean.size()));
  FeatureMatrix out = m;
  for (int i = 0; i < m.dim(); ++i) {
    double* row = out.data.row(i);
    const double mu = stats.mean[i], sd = stats.std[i];
    for (int t = 0; t < m.frames(); ++t) row[t] = (row[t] - mu) / sd;
  }
  return out;
}

}  // namespace acnn
