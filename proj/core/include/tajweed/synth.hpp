#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

#include "tajweed/audio.hpp"
#include "tajweed/manifest.hpp"
#include "tajweed/rules.hpp"

namespace tajweed {

/// Signal family for one (rule, polarity) class: a vibrato harmonic stack,
/// band-limited noise and spectrally tilted broadband breath noise, all under
/// a slow amplitude modulation.
struct SynthClass {
  RuleId rule = RuleId::EdghamMeem;
  Polarity polarity = Polarity::Right;
  double f0_hz = 150.0;
  double f0_jitter_hz = 5.0;
  int harmonics = 10;
  double harmonic_decay = 0.7;
  double noise_lo_hz = 1500.0;
  double noise_hi_hz = 2500.0;
  double noise_level = 0.05;
  double breath_level = 0.0;
  double breath_pole = 0.0;  ///< one-pole coefficient: > 0 tilts down, < 0 tilts up
  double am_rate_hz = 4.0;
  double am_depth = 0.3;
  double amplitude = 0.4;
};

/// Event-free "recitation": harmonic segments with random pitch.
struct SynthBackground {
  double f0_lo_hz = 90.0;
  double f0_hi_hz = 330.0;
  double level = 0.1;
  double segment_lo_s = 0.3;
  double segment_hi_s = 0.8;
};

struct SynthRecipe {
  int sample_rate_hz = 8000;
  double noise_floor = 0.003;
  double event_min_s = 4.0;
  double event_max_s = 4.6;
  std::size_t clips_per_class = 80;
  std::size_t negatives_per_rule = 20;
  double negative_seconds = 8.0;
  std::size_t verses_per_rule = 10;
  std::size_t empty_verses_per_rule = 10;
  double verse_min_s = 10.0;
  double verse_max_s = 15.0;
  SynthBackground background;
  std::vector<SynthClass> classes;

  std::vector<RuleId> rules() const;
};

/// JSON recipe; throws ParseError on malformed input.
SynthRecipe parse_recipe(std::string_view json_text);
SynthRecipe load_recipe(const std::filesystem::path& path);

/// The class event alone (no noise floor).
AudioClip render_event(const SynthClass& cls, const SynthRecipe& recipe, double duration_s,
                       std::uint64_t seed);
AudioClip render_background(const SynthRecipe& recipe, double duration_s, std::uint64_t seed);

/// A training clip: one event of random length plus the noise floor.
AudioClip render_clip(const SynthClass& cls, const SynthRecipe& recipe, std::uint64_t seed);

struct Verse {
  AudioClip audio;
  AudioClip event;  ///< template inserted at onset_sample
  std::size_t onset_sample = 0;
  double onset_s = 0.0;
};

/// Background with one event replacing it from onset_sample onwards.
Verse render_verse(const SynthClass& cls, const SynthRecipe& recipe, std::uint64_t seed);
/// Background-only recording of random verse length.
AudioClip render_empty_verse(const SynthRecipe& recipe, std::uint64_t seed);

struct SynthOutput {
  std::vector<ManifestEntry> clips;   ///< class clips and negatives (manifest.csv)
  std::vector<ManifestEntry> verses;  ///< long recordings (verses.csv)
  std::filesystem::path manifest_path;
  std::filesystem::path verses_path;
};

/// Writes clips/, negatives/, verses/ plus manifest.csv and verses.csv under
/// out_dir. Identical seeds give byte-identical output.
SynthOutput synth_generate(const SynthRecipe& recipe, std::uint64_t seed,
                           const std::filesystem::path& out_dir);

}  // namespace tajweed
