#pragma once

#include <filesystem>
#include <string>

#include "tajweed/detection.hpp"

namespace tajweed {

inline constexpr int kModelFormatVersion = 1;
inline constexpr std::string_view kModelMagic = "TAJWEED-RULE-MODEL";

/// Text header (magic, format_version, rule_id, payload size) followed by a
/// little-endian binary payload; every real is stored as its IEEE-754
/// binary64 image, so a round trip is bit-exact.
std::string serialize_model(const RuleModel& model);

/// Throws VersionMismatch or SchemaError.
RuleModel deserialize_model(std::string_view bytes);

/// Writes to a sibling temp file, then renames over `path`.
void save_model(const RuleModel& model, const std::filesystem::path& path);
RuleModel load_model(const std::filesystem::path& path);

}  // namespace tajweed
