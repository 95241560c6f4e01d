#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace tajweed {

/// Mono PCM signal. Samples are kept in [-1, 1].
class AudioClip {
 public:
  AudioClip() = default;
  AudioClip(std::vector<double> samples, int sample_rate_hz);

  std::span<const double> samples() const noexcept { return samples_; }
  int sample_rate_hz() const noexcept { return sample_rate_hz_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }
  double duration_s() const noexcept {
    return static_cast<double>(samples_.size()) / sample_rate_hz_;
  }

  friend bool operator==(const AudioClip&, const AudioClip&) = default;

 private:
  std::vector<double> samples_;
  int sample_rate_hz_ = 0;
};

struct Window {
  double offset_s = 0.0;
  AudioClip clip;
};

/// Reads RIFF/WAVE PCM (8-bit unsigned or 16-bit signed, 1 or 2 channels).
/// Stereo frames are averaged to mono.
AudioClip load_wav(const std::filesystem::path& path);

/// Writes a 16-bit mono PCM file.
void save_wav(const AudioClip& clip, const std::filesystem::path& path);

/// Decimation runs a 63-tap Hamming-windowed-sinc low-pass (cutoff 0.45 x
/// target rate) before linear interpolation. Same-rate input is returned as is.
AudioClip resample(const AudioClip& clip, int target_hz);

/// Pads with trailing zeros or cuts one seeded, uniformly placed segment so the
/// result holds exactly round(target_s * rate) samples.
AudioClip normalize_duration(const AudioClip& clip, double target_s,
                             std::uint64_t seed);

std::vector<Window> slide_windows(const AudioClip& clip, double window_s = 4.0,
                                  double stride_s = 0.5);

}  // namespace tajweed
