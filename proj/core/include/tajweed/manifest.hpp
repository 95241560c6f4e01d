#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tajweed/rules.hpp"

namespace tajweed {

enum class Split : std::uint8_t { Unassigned = 0, Train = 1, Test = 2 };

std::string_view to_string(Split split) noexcept;
Split parse_split(std::string_view text);

struct ManifestEntry {
  std::string path;  ///< relative paths resolve against the manifest's directory
  RuleId rule = RuleId::EdghamMeem;
  Label polarity;
  std::optional<double> onset_s;
  Split split = Split::Unassigned;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct Manifest {
  std::vector<ManifestEntry> entries;
  /// Entries whose audio file does not exist.
  std::vector<std::string> dangling_paths;
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const ManifestEntry& entry) const;
};

inline constexpr std::string_view kManifestHeader = "path,rule_id,polarity,onset_s,split";

/// Throws ParseError carrying the 1-based line number.
Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir = {});
Manifest load_manifest(const std::filesystem::path& path);

std::string format_manifest(const std::vector<ManifestEntry>& entries);
void save_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path);

/// Shortest text that parses back to the same double.
std::string format_double(double value);

/// Per (rule_id, polarity) stratum: round(fraction * n) entries go to train,
/// the rest to test. Throws StratumTooSmall for strata with fewer than 2.
std::vector<ManifestEntry> split(std::vector<ManifestEntry> entries, double train_fraction,
                                 std::uint64_t seed);

}  // namespace tajweed
