#pragma once

#include <string>
#include <vector>

namespace acnn {

// Mono PCM audio with amplitudes in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;

  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

inline constexpr int kRequiredSampleRate = 16000;

// Reads a RIFF/WAVE file. Accepts only PCM (format code 1), 16-bit
// little-endian, mono, 16 kHz; anything else raises FormatError with a
// description of what was found. MissingFile if the path cannot be opened.
AudioClip read_wav(const std::string& path);

// Writes 16 kHz mono 16-bit PCM. Samples are clamped to [-1, 1].
void write_wav(const std::string& path, const std::vector<double>& samples,
               int sample_rate = kRequiredSampleRate);

}  // namespace acnn
