#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "onset.hpp"
#include "tajweed/error.hpp"
#include "tajweed/synth.hpp"
#include "temp_dir.hpp"

using namespace tajweed;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{};
}

// Two classes of one rule, kept short so the brute-force oracle stays fast.
constexpr const char* kSmallRecipe = R"({
  "sample_rate_hz": 8000,
  "noise_floor": 0.003,
  "event_seconds": [0.4, 0.6],
  "clips_per_class": 3,
  "negatives_per_rule": 2,
  "negative_seconds": 5.0,
  "verses_per_rule": 4,
  "empty_verses_per_rule": 2,
  "verse_seconds": [2.0, 3.0],
  "classes": [
    {"rule_id": "tarqeeq_lam", "polarity": "Right", "f0_hz": 230.0, "harmonics": 7,
     "noise_band_hz": [3000.0, 3800.0], "breath_level": 0.05, "breath_pole": -0.8},
    {"rule_id": "tarqeeq_lam", "polarity": "Wrong", "f0_hz": 160.0, "harmonics": 9,
     "noise_band_hz": [600.0, 1200.0]}
  ]
})";

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST(Synth, RecipeParsing) {
  const SynthRecipe r = parse_recipe(kSmallRecipe);
  EXPECT_EQ(r.classes.size(), 2u);
  EXPECT_EQ(r.classes[0].breath_pole, -0.8);
  EXPECT_EQ(r.rules(), std::vector<RuleId>{RuleId::TarqeeqLam});
  EXPECT_EQ(code_of([] { parse_recipe("{"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { parse_recipe(R"({"classes": []})"); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] {
              parse_recipe(R"({"classes": [{"rule_id": "tarqeeq_lam", "polarity": "Right",
                                            "breath_pole": 1.0}]})");
            }),
            ErrorCode::ParseError);
}

TEST(Synth, ShippedRecipeLoads) {
  const SynthRecipe r = load_recipe(TAJWEED_RECIPE_PATH);
  EXPECT_EQ(r.rules().size(), 4u);
  EXPECT_EQ(r.classes.size(), 8u);
  EXPECT_EQ(r.sample_rate_hz, 8000);
}

TEST(Synth, ClipsAreDeterministicAndBounded) {
  const SynthRecipe r = parse_recipe(kSmallRecipe);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const AudioClip a = render_clip(r.classes[0], r, seed);
    EXPECT_EQ(a, render_clip(r.classes[0], r, seed));
    EXPECT_NE(a, render_clip(r.classes[0], r, seed + 1));
    EXPECT_GE(a.duration_s(), 0.4 - 1e-9);
    EXPECT_LE(a.duration_s(), 0.6 + 1e-9);
    for (double v : a.samples()) ASSERT_LE(std::abs(v), 1.0);
  }
}

TEST(Synth, VerseOnsetMatchesCrossCorrelation) {
  const SynthRecipe r = parse_recipe(kSmallRecipe);
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Verse v = render_verse(r.classes[seed % 2], r, seed);
    EXPECT_GE(v.onset_s, 0.5 - 1e-9);
    EXPECT_LE(v.onset_s + v.event.duration_s(), v.audio.duration_s() - 0.5 + 1e-3);
    const std::size_t lag = oracle::best_lag(v.audio.samples(), v.event.samples());
    EXPECT_LE(lag > v.onset_sample ? lag - v.onset_sample : v.onset_sample - lag, 1u)
        << "seed " << seed;
  }
}

TEST(Synth, GenerateWritesManifestsAndFiles) {
  const SynthRecipe r = parse_recipe(kSmallRecipe);
  support::TempDir a, b;
  const SynthOutput out = synth_generate(r, 42, a.path());
  EXPECT_EQ(out.clips.size(), 2u * 3u + 2u);
  EXPECT_EQ(out.verses.size(), 4u + 2u);
  const Manifest m = load_manifest(out.manifest_path);
  EXPECT_EQ(m.entries, out.clips);
  EXPECT_TRUE(m.dangling_paths.empty());
  const Manifest verses = load_manifest(out.verses_path);
  EXPECT_TRUE(verses.dangling_paths.empty());
  for (const auto& e : verses.entries) {
    EXPECT_EQ(e.polarity.has_value(), e.onset_s.has_value());
    if (e.polarity) {
      const AudioClip clip = load_wav(verses.resolve(e));
      EXPECT_LT(*e.onset_s, clip.duration_s());
    }
  }

  synth_generate(r, 42, b.path());
  for (const auto& e : out.clips) {
    EXPECT_EQ(read_bytes(a / e.path), read_bytes(b / e.path)) << e.path;
  }
  EXPECT_EQ(read_bytes(out.manifest_path), read_bytes(b / "manifest.csv"));
  EXPECT_EQ(read_bytes(out.verses_path), read_bytes(b / "verses.csv"));
}
