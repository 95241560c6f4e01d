#include "tajweed/audio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>

#include "tajweed/error.hpp"

namespace tajweed {

namespace {

constexpr int kMinRateHz = 1000;
constexpr int kResampleTaps = 63;
constexpr double kResampleCutoff = 0.45;

std::uint32_t read_u32(const unsigned char* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
         (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

// Zero-phase FIR low-pass; normalized to unit DC gain.
std::vector<double> lowpass_kernel(double cutoff_fraction_of_source) {
  std::vector<double> h(kResampleTaps);
  const int mid = kResampleTaps / 2;
  const double fc = cutoff_fraction_of_source;
  double sum = 0.0;
  for (int k = 0; k < kResampleTaps; ++k) {
    const int n = k - mid;
    const double sinc =
        n == 0 ? 2.0 * fc
               : std::sin(2.0 * std::numbers::pi * fc * n) / (std::numbers::pi * n);
    const double w =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * k / (kResampleTaps - 1));
    h[k] = sinc * w;
    sum += h[k];
  }
  for (double& v : h) v /= sum;
  return h;
}

std::vector<double> filter_centered(std::span<const double> x,
                                    std::span<const double> h) {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  const auto mid = static_cast<std::ptrdiff_t>(h.size() / 2);
  std::vector<double> y(x.size(), 0.0);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(h.size()); ++k) {
      const std::ptrdiff_t j = i + mid - k;
      if (j >= 0 && j < n) acc += h[k] * x[j];
    }
    y[i] = acc;
  }
  return y;
}

}  // namespace

AudioClip::AudioClip(std::vector<double> samples, int sample_rate_hz)
    : samples_(std::move(samples)), sample_rate_hz_(sample_rate_hz) {
  if (sample_rate_hz_ <= 0) fail(ErrorCode::InvalidRate, "sample rate must be positive");
  for (double& s : samples_) {
    if (!std::isfinite(s)) s = 0.0;
    s = std::clamp(s, -1.0, 1.0);
  }
}

AudioClip load_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::NotFound, path.string());
  const std::vector<unsigned char> bytes{std::istreambuf_iterator<char>(in),
                                         std::istreambuf_iterator<char>()};
  if (bytes.size() < 12) fail(ErrorCode::CorruptHeader, "file shorter than RIFF header");
  if (std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    fail(ErrorCode::UnsupportedFormat, "not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = read_u32(chunk + 4);
    if (size > bytes.size() - pos - 8) {
      fail(ErrorCode::CorruptHeader, "chunk size exceeds file length");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) fail(ErrorCode::CorruptHeader, "fmt chunk too small");
      format = read_u16(chunk + 8);
      channels = read_u16(chunk + 10);
      rate = read_u32(chunk + 12);
      bits = read_u16(chunk + 22);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = size;
    }
    pos += 8 + size + (size & 1u);
  }
  if (!have_fmt || data == nullptr) {
    fail(ErrorCode::CorruptHeader, "missing fmt or data chunk");
  }
  if (format != 1) fail(ErrorCode::UnsupportedFormat, "only PCM (format 1) is supported");
  if (channels < 1 || channels > 2) {
    fail(ErrorCode::UnsupportedFormat, "unsupported channel count " + std::to_string(channels));
  }
  if (bits != 8 && bits != 16) {
    fail(ErrorCode::UnsupportedFormat, "unsupported bit depth " + std::to_string(bits));
  }
  if (rate < static_cast<std::uint32_t>(kMinRateHz)) {
    fail(ErrorCode::UnsupportedFormat, "sample rate below 1000 Hz");
  }

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  if (data_size % frame_bytes != 0) {
    fail(ErrorCode::CorruptHeader, "data size is not a whole number of frames");
  }
  const std::size_t frames = data_size / frame_bytes;
  std::vector<double> samples(frames);
  for (std::size_t f = 0; f < frames; ++f) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + f * frame_bytes + c * bytes_per_sample;
      if (bits == 8) {
        acc += (static_cast<double>(p[0]) - 128.0) / 128.0;
      } else {
        acc += static_cast<std::int16_t>(read_u16(p)) / 32768.0;
      }
    }
    samples[f] = acc / channels;
  }
  return AudioClip(std::move(samples), static_cast<int>(rate));
}

void save_wav(const AudioClip& clip, const std::filesystem::path& path) {
  const auto data_bytes = static_cast<std::uint32_t>(clip.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate_hz()));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate_hz()) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (double s : clip.samples()) {
    const long q = std::lround(std::clamp(s, -1.0, 1.0) * 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) fail(ErrorCode::IoError, "cannot write " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) fail(ErrorCode::IoError, "write failed for " + path.string());
}

AudioClip resample(const AudioClip& clip, int target_hz) {
  if (target_hz < kMinRateHz) {
    fail(ErrorCode::InvalidRate, "target rate " + std::to_string(target_hz) + " below 1000 Hz");
  }
  const int source_hz = clip.sample_rate_hz();
  if (target_hz == source_hz) return clip;

  std::vector<double> source(clip.samples().begin(), clip.samples().end());
  if (target_hz < source_hz) {
    const auto h = lowpass_kernel(kResampleCutoff * target_hz / source_hz);
    source = filter_centered(source, h);
  }

  const double ratio = static_cast<double>(source_hz) / target_hz;
  const auto out_len = static_cast<std::size_t>(std::max<long>(
      1, std::lround(static_cast<double>(source.size()) * target_hz / source_hz)));
  std::vector<double> out(out_len);
  const std::size_t last = source.size() - 1;
  for (std::size_t i = 0; i < out_len; ++i) {
    const double t = static_cast<double>(i) * ratio;
    const auto i0 = std::min(static_cast<std::size_t>(t), last);
    const std::size_t i1 = std::min(i0 + 1, last);
    const double frac = std::clamp(t - static_cast<double>(i0), 0.0, 1.0);
    out[i] = source[i0] + (source[i1] - source[i0]) * frac;
  }
  return AudioClip(std::move(out), target_hz);
}

AudioClip normalize_duration(const AudioClip& clip, double target_s,
                             std::uint64_t seed) {
  if (clip.empty()) fail(ErrorCode::TooShort, "cannot normalize an empty clip");
  const auto target_len =
      static_cast<std::size_t>(std::llround(target_s * clip.sample_rate_hz()));
  const auto src = clip.samples();
  if (src.size() == target_len) return clip;

  std::vector<double> out(target_len, 0.0);
  if (src.size() < target_len) {
    std::copy(src.begin(), src.end(), out.begin());
  } else {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, src.size() - target_len);
    const std::size_t start = pick(rng);
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(start), target_len, out.begin());
  }
  return AudioClip(std::move(out), clip.sample_rate_hz());
}

std::vector<Window> slide_windows(const AudioClip& clip, double window_s,
                                  double stride_s) {
  if (!(window_s > 0.0) || !(stride_s > 0.0)) {
    fail(ErrorCode::InvalidArgument, "window and stride must be positive");
  }
  const int rate = clip.sample_rate_hz();
  const auto window_len = static_cast<std::size_t>(std::llround(window_s * rate));
  const auto stride_len =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(stride_s * rate)));
  const auto src = clip.samples();

  std::vector<Window> windows;
  if (src.size() < window_len) {
    std::vector<double> padded(window_len, 0.0);
    std::copy(src.begin(), src.end(), padded.begin());
    windows.push_back({0.0, AudioClip(std::move(padded), rate)});
    return windows;
  }
  for (std::size_t k = 0; k * stride_len + window_len <= src.size(); ++k) {
    const std::size_t start = k * stride_len;
    std::vector<double> samples(src.begin() + static_cast<std::ptrdiff_t>(start),
                                src.begin() + static_cast<std::ptrdiff_t>(start + window_len));
    windows.push_back({static_cast<double>(k) * stride_s, AudioClip(std::move(samples), rate)});
  }
  return windows;
}

}  // namespace tajweed
