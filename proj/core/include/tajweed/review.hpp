#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tajweed/detection.hpp"
#include "tajweed/manifest.hpp"

namespace tajweed {

enum class ReviewStatus : std::uint8_t { Pending, Approved, Corrected };

std::string_view to_string(ReviewStatus status) noexcept;
ReviewStatus parse_review_status(std::string_view text);

struct ReviewRecord {
  std::uint64_t record_id = 0;  ///< 0 asks the queue to assign the next id
  std::string audio_path;
  RuleId rule = RuleId::EdghamMeem;
  std::optional<Detection> verdict;
  std::string created_at;  ///< ISO-8601 UTC
  ReviewStatus status = ReviewStatus::Pending;
  /// Present iff status == Corrected. The inner nullopt means "no rule".
  std::optional<Label> corrected_label;
};

/// What `detect` hands to the review queue.
struct VerdictFile {
  std::string audio_path;
  RuleId rule = RuleId::EdghamMeem;
  std::optional<Detection> verdict;
};

std::string format_verdict_file(const VerdictFile& v);
VerdictFile parse_verdict_file(std::string_view text);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

/// Append-only, newline-delimited JSON log. Line 1 is a versioned schema
/// header; later lines are "append" or "label" events replayed on open.
/// Writers hold an exclusive flock for the duration of each append.
class ReviewQueue {
 public:
  static constexpr int kSchemaVersion = 1;

  /// Creates the file (with header) if it does not exist.
  static ReviewQueue open(const std::filesystem::path& path);

  /// Returns the record id. Re-appending an existing id is a no-op.
  std::uint64_t append(ReviewRecord record);

  /// Moves a record to Approved or Corrected. Records that are no longer
  /// pending need `force`; Corrected needs a label.
  void label(std::uint64_t record_id, ReviewStatus status,
             std::optional<Label> corrected_label = std::nullopt, bool force = false);

  std::vector<ReviewRecord> list(std::optional<ReviewStatus> filter = std::nullopt) const;
  const ReviewRecord& get(std::uint64_t record_id) const;

  /// Reviewed records as unassigned manifest rows for retraining.
  std::vector<ManifestEntry> export_labeled() const;

  /// Re-reads the log from disk.
  void reload();

 private:
  explicit ReviewQueue(std::filesystem::path path) : path_(std::move(path)) {}
  void parse_text(const std::string& text);
  void apply_line(const std::string& line, std::size_t line_no);

  std::filesystem::path path_;
  std::vector<ReviewRecord> records_;
};

}  // namespace tajweed
