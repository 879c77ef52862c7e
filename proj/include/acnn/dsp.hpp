#pragma once

#include <span>
#include <string>
#include <vector>

#include "acnn/matrix.hpp"
#include "acnn/wav.hpp"

namespace acnn {

// Framing / spectral analysis parameters.
struct FrameConfig {
  double frame_len = 0.025;   // seconds
  double frame_shift = 0.010; // seconds
  int fft_size = 512;
  int num_mel = 26;
  int num_mfcc = 13;
  bool mfcc_include_c0 = false;  // false: coefficients 1..num_mfcc; true: 0..num_mfcc-1
  double mel_fmin = 0.0;
  double mel_fmax = 6500.0;
  double f0_min = 55.0;
  double f0_max = 400.0;
  double voicing_threshold = 0.45;

  void validate(int sample_rate) const;
  int frame_len_samples(int sample_rate) const;
  int frame_shift_samples(int sample_rate) const;
};

// Floor applied before logarithms so silence and padding stay finite.
inline constexpr double kLogFloorEps = 1e-10;
// Per-dimension standard deviations are floored here to guard constant dims.
inline constexpr double kStdFloor = 1e-6;

enum class FeatureKind { kLogMel = 0, kMfcc = 1, kProsody = 2, kFused = 3 };

const char* feature_kind_name(FeatureKind kind);
FeatureKind feature_kind_from_name(const std::string& name);

// Frame-level feature matrix: one row per feature dimension, one column per
// frame.
struct FeatureMatrix {
  Matrix data;
  FeatureKind kind = FeatureKind::kLogMel;
  double frame_shift = 0.010;  // seconds

  int dim() const { return data.rows; }
  int frames() const { return data.cols; }
};

struct SpeakerStats {
  std::string speaker_id;
  std::vector<double> mean;
  std::vector<double> std;
};

// -- framing and spectra ----------------------------------------------------

// Contiguous frames of frame_len samples every frame_shift samples; the tail
// remainder shorter than a frame is dropped. ClipTooShort if the clip does
// not cover one frame.
std::vector<std::vector<double>> frame_signal(const AudioClip& clip, const FrameConfig& cfg);

// Number of frames produced by frame_signal for n samples.
int frame_count(long long n_samples, int frame_len, int frame_shift);
// Frame count of a clip lasting len_seconds, computed from the config.
int frame_count_for_duration(double len_seconds, const FrameConfig& cfg);

// w[k] = 0.54 - 0.46 cos(2 pi k / (n - 1)); n == 1 yields {1.0}.
std::vector<double> hamming_window(int n);

// |FFT(frame zero-padded to fft_size)|^2 for bins 0..fft_size/2. Radix-2 FFT
// when fft_size is a power of two, direct DFT otherwise.
std::vector<double> power_spectrum(std::span<const double> frame, int fft_size);

// mel(f) = 2595 log10(1 + f/700)  (HTK convention).
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters, num_mel x (fft_size/2 + 1). Centers equally spaced on
// the mel scale between mel_fmin and mel_fmax; triangles evaluated in mel
// space so adjacent filters cross at half height. InvalidRange if mel_fmax
// exceeds Nyquist.
Matrix mel_filterbank(const FrameConfig& cfg, int sample_rate);

// out[m] = ln(max(filterbank row m . power_spec, kLogFloorEps))
std::vector<double> log_mel(std::span<const double> power_spec, const Matrix& filterbank);

// Orthonormal DCT-II of the log-mel vector; returns num_mfcc coefficients
// starting at index 1 (or 0 when cfg.mfcc_include_c0).
std::vector<double> mfcc(std::span<const double> logmel, const FrameConfig& cfg);

// -- pitch and prosody -------------------------------------------------------

struct F0Estimate {
  double f0 = 0.0;           // Hz; 0 when unvoiced
  double voicing_prob = 0.0; // clamped normalized autocorrelation peak
};

// Normalized-autocorrelation pitch estimate over lags [sr/f0_max, sr/f0_min]
// (clamped to the frame). The frame is used as-is, without tapering.
F0Estimate estimate_f0(std::span<const double> frame, int sample_rate,
                       double f0_min = 55.0, double f0_max = 400.0,
                       double voicing_threshold = 0.45);

// 7 x frames matrix, rows in order: log energy, F0 envelope (unvoiced gaps
// linearly interpolated, held at the edges), voicing probability, F0 contour,
// local jitter, differential jitter, local shimmer. The perturbation rows are
// utterance-level values repeated on every frame.
FeatureMatrix prosody_features(const AudioClip& clip, const FrameConfig& cfg);

// -- full extraction ---------------------------------------------------------

FeatureMatrix extract_logmel(const AudioClip& clip, const FrameConfig& cfg);
FeatureMatrix extract_mfcc(const AudioClip& clip, const FrameConfig& cfg);
// kFused = logMel rows stacked over prosody rows.
FeatureMatrix extract_features(const AudioClip& clip, const FrameConfig& cfg, FeatureKind kind);

int feature_dim(FeatureKind kind, const FrameConfig& cfg);

// -- per-speaker normalization ------------------------------------------------

// Population mean/std per dimension over all frames of all matrices, std
// floored at kStdFloor. InsufficientFrames when fewer than two frames total.
SpeakerStats compute_speaker_stats(const std::vector<const FeatureMatrix*>& matrices,
                                   const std::string& speaker_id);

// (x - mean) / std per row. DimensionMismatch if dimensions disagree.
FeatureMatrix normalize(const FeatureMatrix& m, const SpeakerStats& stats);

}  // namespace acnn
