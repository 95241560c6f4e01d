#include "tajweed/synth.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>
#include <random>
#include <sstream>

#include "tajweed/error.hpp"
#include "tajweed/hash.hpp"

namespace tajweed {

namespace {

using json = nlohmann::json;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kNoisePartials = 32;
constexpr double kRampSeconds = 0.03;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Raised-cosine ramp in and out over `ramp` samples.
double edge_envelope(std::size_t i, std::size_t n, std::size_t ramp) {
  if (ramp == 0) return 1.0;
  const std::size_t d = std::min(i, n - 1 - i);
  if (d >= ramp) return 1.0;
  return 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(d) / static_cast<double>(ramp));
}

std::uint64_t path_seed(std::uint64_t seed, const std::string& rel_path) {
  Fnv1a h;
  h.text(rel_path);
  return derive_seed(seed, h.value());
}

void add_noise_floor(std::vector<double>& x, double level, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, level);
  for (double& v : x) v += noise(rng);
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::pair<double, double> range_or(const json& j, const char* key, std::pair<double, double> fallback) {
  if (!j.contains(key)) return fallback;
  const auto& r = j.at(key);
  if (!r.is_array() || r.size() != 2) {
    fail(ErrorCode::ParseError, std::string("'") + key + "' must be a two-element array");
  }
  return {r[0].get<double>(), r[1].get<double>()};
}

}  // namespace

std::vector<RuleId> SynthRecipe::rules() const {
  std::vector<RuleId> out;
  for (const auto& c : classes) {
    if (std::find(out.begin(), out.end(), c.rule) == out.end()) out.push_back(c.rule);
  }
  return out;
}

SynthRecipe parse_recipe(std::string_view json_text) {
  SynthRecipe r;
  try {
    const json j = json::parse(json_text);
    r.sample_rate_hz = get_or(j, "sample_rate_hz", r.sample_rate_hz);
    r.noise_floor = get_or(j, "noise_floor", r.noise_floor);
    std::tie(r.event_min_s, r.event_max_s) =
        range_or(j, "event_seconds", {r.event_min_s, r.event_max_s});
    r.clips_per_class = get_or(j, "clips_per_class", r.clips_per_class);
    r.negatives_per_rule = get_or(j, "negatives_per_rule", r.negatives_per_rule);
    r.negative_seconds = get_or(j, "negative_seconds", r.negative_seconds);
    r.verses_per_rule = get_or(j, "verses_per_rule", r.verses_per_rule);
    r.empty_verses_per_rule = get_or(j, "empty_verses_per_rule", r.empty_verses_per_rule);
    std::tie(r.verse_min_s, r.verse_max_s) =
        range_or(j, "verse_seconds", {r.verse_min_s, r.verse_max_s});
    if (j.contains("background")) {
      const auto& b = j.at("background");
      std::tie(r.background.f0_lo_hz, r.background.f0_hi_hz) =
          range_or(b, "f0_hz", {r.background.f0_lo_hz, r.background.f0_hi_hz});
      r.background.level = get_or(b, "level", r.background.level);
      std::tie(r.background.segment_lo_s, r.background.segment_hi_s) = range_or(
          b, "segment_seconds", {r.background.segment_lo_s, r.background.segment_hi_s});
    }
    for (const auto& c : j.at("classes")) {
      SynthClass cls;
      cls.rule = parse_rule_id(c.at("rule_id").get<std::string>());
      const Label label = parse_label(c.at("polarity").get<std::string>());
      if (!label) fail(ErrorCode::ParseError, "class polarity must be Right or Wrong");
      cls.polarity = *label;
      cls.f0_hz = get_or(c, "f0_hz", cls.f0_hz);
      cls.f0_jitter_hz = get_or(c, "f0_jitter_hz", cls.f0_jitter_hz);
      cls.harmonics = get_or(c, "harmonics", cls.harmonics);
      cls.harmonic_decay = get_or(c, "harmonic_decay", cls.harmonic_decay);
      std::tie(cls.noise_lo_hz, cls.noise_hi_hz) =
          range_or(c, "noise_band_hz", {cls.noise_lo_hz, cls.noise_hi_hz});
      cls.noise_level = get_or(c, "noise_level", cls.noise_level);
      cls.breath_level = get_or(c, "breath_level", cls.breath_level);
      cls.breath_pole = get_or(c, "breath_pole", cls.breath_pole);
      if (!(std::abs(cls.breath_pole) < 1.0)) fail(ErrorCode::ParseError, "breath_pole must lie in (-1, 1)");
      cls.am_rate_hz = get_or(c, "am_rate_hz", cls.am_rate_hz);
      cls.am_depth = get_or(c, "am_depth", cls.am_depth);
      cls.amplitude = get_or(c, "amplitude", cls.amplitude);
      r.classes.push_back(cls);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("recipe: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    fail(ErrorCode::ParseError, std::string("recipe: ") + e.what());
  }
  if (r.classes.empty()) fail(ErrorCode::ParseError, "recipe defines no classes");
  if (r.sample_rate_hz < 1000) fail(ErrorCode::ParseError, "recipe sample rate below 1000 Hz");
  if (!(r.event_min_s > 0.0 && r.event_max_s >= r.event_min_s)) {
    fail(ErrorCode::ParseError, "bad event_seconds range");
  }
  if (!(r.verse_min_s >= r.event_max_s + 1.0 && r.verse_max_s >= r.verse_min_s)) {
    fail(ErrorCode::ParseError, "verse_seconds must leave at least 1 s around an event");
  }
  return r;
}

SynthRecipe load_recipe(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::NotFound, path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_recipe(buf.str());
}

AudioClip render_event(const SynthClass& cls, const SynthRecipe& recipe, double duration_s,
                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double rate = recipe.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * rate));
  const double f0 = std::max(40.0, cls.f0_hz + std::normal_distribution<double>(0.0, cls.f0_jitter_hz)(rng));
  const double vibrato_hz = uniform(rng, 4.0, 6.0);
  const double vibrato_phase = uniform(rng, 0.0, kTwoPi);
  const double am_phase = uniform(rng, 0.0, kTwoPi);
  const double gain = uniform(rng, 0.8, 1.2);

  // Harmonic h is Im(weight_h * z^h) with z = exp(i * base_phase).
  std::vector<std::complex<double>> harmonic_weight;
  double norm = 0.0;
  for (int h = 1; h <= cls.harmonics && h * f0 * 1.02 < rate / 2.0 - 100.0; ++h) {
    const double amp = std::pow(cls.harmonic_decay, h - 1);
    harmonic_weight.push_back(std::polar(amp, uniform(rng, 0.0, kTwoPi)));
    norm += amp;
  }
  // Noise partials advance by a fixed rotation per sample.
  std::vector<std::complex<double>> partial(kNoisePartials), rotation(kNoisePartials);
  for (int k = 0; k < kNoisePartials; ++k) {
    rotation[k] = std::polar(1.0, kTwoPi * uniform(rng, cls.noise_lo_hz, cls.noise_hi_hz) / rate);
    partial[k] = std::polar(1.0, uniform(rng, 0.0, kTwoPi));
  }
  const double partial_amp = cls.noise_level * std::sqrt(2.0 / kNoisePartials);
  // Unit-variance output: a one-pole filter on white noise has gain 1 / (1 - p^2).
  const double breath_gain = cls.breath_level * std::sqrt(1.0 - cls.breath_pole * cls.breath_pole);
  std::normal_distribution<double> white(0.0, 1.0);
  double breath = 0.0;

  std::vector<double> out(n);
  const auto ramp = static_cast<std::size_t>(kRampSeconds * rate);
  double base_phase = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / rate;
    const double inst_f0 = f0 * (1.0 + 0.015 * std::sin(kTwoPi * vibrato_hz * t + vibrato_phase));
    base_phase += kTwoPi * inst_f0 / rate;
    const std::complex<double> z = std::polar(1.0, base_phase);
    std::complex<double> zh = z;
    double voiced = 0.0;
    for (const auto& w : harmonic_weight) {
      voiced += (w * zh).imag();
      zh *= z;
    }
    double noise = 0.0;
    for (int k = 0; k < kNoisePartials; ++k) {
      noise += partial[k].imag();
      partial[k] *= rotation[k];
    }
    breath = white(rng) + cls.breath_pole * breath;
    const double am = 1.0 + cls.am_depth * std::sin(kTwoPi * cls.am_rate_hz * t + am_phase);
    out[i] = gain * am * edge_envelope(i, n, ramp) *
             (cls.amplitude * voiced / norm + partial_amp * noise + breath_gain * breath);
  }
  return AudioClip(std::move(out), recipe.sample_rate_hz);
}

AudioClip render_background(const SynthRecipe& recipe, double duration_s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double rate = recipe.sample_rate_hz;
  const auto n = static_cast<std::size_t>(std::llround(duration_s * rate));
  const auto& bg = recipe.background;
  std::vector<double> out(n, 0.0);
  const auto ramp = static_cast<std::size_t>(0.02 * rate);

  std::size_t start = 0;
  while (start < n) {
    const auto len = std::min(
        n - start, static_cast<std::size_t>(uniform(rng, bg.segment_lo_s, bg.segment_hi_s) * rate));
    const bool pause = uniform(rng, 0.0, 1.0) < 0.2;
    const double f0 = uniform(rng, bg.f0_lo_hz, bg.f0_hi_hz);
    const double decay = uniform(rng, 0.5, 0.8);
    const double level = bg.level * uniform(rng, 0.5, 1.0);
    const double phase0 = uniform(rng, 0.0, kTwoPi);
    if (!pause) {
      double norm = 0.0;
      for (int h = 1; h <= 8; ++h) norm += std::pow(decay, h - 1);
      std::vector<std::complex<double>> osc, step;
      for (int h = 1; h <= 8 && h * f0 < rate / 2.0 - 100.0; ++h) {
        osc.push_back(std::polar(std::pow(decay, h - 1), h * phase0));
        step.push_back(std::polar(1.0, kTwoPi * h * f0 / rate));
      }
      for (std::size_t i = 0; i < len; ++i) {
        double v = 0.0;
        for (std::size_t h = 0; h < osc.size(); ++h) {
          v += osc[h].imag();
          osc[h] *= step[h];
        }
        out[start + i] = level * edge_envelope(i, len, ramp) * v / norm;
      }
    }
    start += std::max<std::size_t>(len, 1);
  }
  return AudioClip(std::move(out), recipe.sample_rate_hz);
}

AudioClip render_clip(const SynthClass& cls, const SynthRecipe& recipe, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double duration = uniform(rng, recipe.event_min_s, recipe.event_max_s);
  const AudioClip event = render_event(cls, recipe, duration, derive_seed(seed, 1));
  std::vector<double> samples(event.samples().begin(), event.samples().end());
  add_noise_floor(samples, recipe.noise_floor, derive_seed(seed, 2));
  return AudioClip(std::move(samples), recipe.sample_rate_hz);
}

Verse render_verse(const SynthClass& cls, const SynthRecipe& recipe, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double rate = recipe.sample_rate_hz;
  const double length = uniform(rng, recipe.verse_min_s, recipe.verse_max_s);
  const double event_len = uniform(rng, recipe.event_min_s, recipe.event_max_s);
  const double onset = uniform(rng, 0.5, length - event_len - 0.5);

  Verse v;
  v.event = render_event(cls, recipe, event_len, derive_seed(seed, 1));
  const AudioClip bg = render_background(recipe, length, derive_seed(seed, 2));
  std::vector<double> samples(bg.samples().begin(), bg.samples().end());
  v.onset_sample = static_cast<std::size_t>(std::llround(onset * rate));
  v.onset_s = static_cast<double>(v.onset_sample) / rate;
  const auto ev = v.event.samples();
  for (std::size_t i = 0; i < ev.size() && v.onset_sample + i < samples.size(); ++i) {
    samples[v.onset_sample + i] = ev[i];
  }
  add_noise_floor(samples, recipe.noise_floor, derive_seed(seed, 3));
  v.audio = AudioClip(std::move(samples), recipe.sample_rate_hz);
  return v;
}

AudioClip render_empty_verse(const SynthRecipe& recipe, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const double length = uniform(rng, recipe.verse_min_s, recipe.verse_max_s);
  const AudioClip bg = render_background(recipe, length, derive_seed(seed, 2));
  std::vector<double> samples(bg.samples().begin(), bg.samples().end());
  add_noise_floor(samples, recipe.noise_floor, derive_seed(seed, 3));
  return AudioClip(std::move(samples), recipe.sample_rate_hz);
}

SynthOutput synth_generate(const SynthRecipe& recipe, std::uint64_t seed,
                           const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  for (const char* sub : {"clips", "negatives", "verses"}) {
    fs::create_directories(out_dir / sub, ec);
    if (ec) fail(ErrorCode::IoError, "cannot create " + (out_dir / sub).string() + ": " + ec.message());
  }

  const auto index_name = [](std::size_t i) {
    std::string s = std::to_string(i);
    return std::string(s.size() < 3 ? 3 - s.size() : 0, '0') + s;
  };

  SynthOutput out;
  for (const auto& cls : recipe.classes) {
    for (std::size_t i = 0; i < recipe.clips_per_class; ++i) {
      const std::string rel = "clips/" + std::string(to_string(cls.rule)) + "_" +
                              std::string(to_string(cls.polarity)) + "_" + index_name(i) + ".wav";
      save_wav(render_clip(cls, recipe, path_seed(seed, rel)), out_dir / rel);
      out.clips.push_back({rel, cls.rule, cls.polarity, std::nullopt, Split::Unassigned});
    }
  }

  for (RuleId rule : recipe.rules()) {
    const std::string rule_name(to_string(rule));
    for (std::size_t i = 0; i < recipe.negatives_per_rule; ++i) {
      const std::string rel = "negatives/" + rule_name + "_None_" + index_name(i) + ".wav";
      const std::uint64_t s = path_seed(seed, rel);
      const AudioClip bg = render_background(recipe, recipe.negative_seconds, derive_seed(s, 2));
      std::vector<double> samples(bg.samples().begin(), bg.samples().end());
      add_noise_floor(samples, recipe.noise_floor, derive_seed(s, 3));
      save_wav(AudioClip(std::move(samples), recipe.sample_rate_hz), out_dir / rel);
      out.clips.push_back({rel, rule, std::nullopt, std::nullopt, Split::Unassigned});
    }

    std::vector<const SynthClass*> rule_classes;
    for (const auto& c : recipe.classes) {
      if (c.rule == rule) rule_classes.push_back(&c);
    }
    for (std::size_t i = 0; i < recipe.verses_per_rule; ++i) {
      const SynthClass& cls = *rule_classes[i % rule_classes.size()];
      const std::string rel = "verses/" + rule_name + "_" + std::string(to_string(cls.polarity)) +
                              "_" + index_name(i) + ".wav";
      const Verse v = render_verse(cls, recipe, path_seed(seed, rel));
      save_wav(v.audio, out_dir / rel);
      out.verses.push_back({rel, rule, cls.polarity, v.onset_s, Split::Test});
    }
    for (std::size_t i = 0; i < recipe.empty_verses_per_rule; ++i) {
      const std::string rel = "verses/" + rule_name + "_empty_" + index_name(i) + ".wav";
      save_wav(render_empty_verse(recipe, path_seed(seed, rel)), out_dir / rel);
      out.verses.push_back({rel, rule, std::nullopt, std::nullopt, Split::Test});
    }
  }

  out.manifest_path = out_dir / "manifest.csv";
  out.verses_path = out_dir / "verses.csv";
  save_manifest(out.clips, out.manifest_path);
  save_manifest(out.verses, out.verses_path);
  return out;
}

}  // namespace tajweed
