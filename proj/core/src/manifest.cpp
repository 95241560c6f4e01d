#include "tajweed/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "tajweed/error.hpp"

namespace tajweed {

namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  fail(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

// Splits one CSV record; fields may be double-quoted with "" escapes.
std::vector<std::string> split_fields(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          fields.back() += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  if (quoted) parse_error(line_no, "unterminated quote");
  return fields;
}

std::string quote_if_needed(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string_view to_string(Split split) noexcept {
  switch (split) {
    case Split::Train: return "train";
    case Split::Test: return "test";
    case Split::Unassigned: return "unassigned";
  }
  return "unassigned";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "test") return Split::Test;
  if (text == "unassigned" || text.empty()) return Split::Unassigned;
  fail(ErrorCode::ParseError, "unknown split '" + std::string(text) + "'");
}

std::filesystem::path Manifest::resolve(const ManifestEntry& entry) const {
  const std::filesystem::path p(entry.path);
  return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

Manifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
  Manifest manifest;
  manifest.base_dir = base_dir;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool seen_header = false;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;

    if (!seen_header) {
      if (line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
      if (line != kManifestHeader) {
        parse_error(line_no, "expected header '" + std::string(kManifestHeader) + "'");
      }
      seen_header = true;
      continue;
    }

    const auto fields = split_fields(line, line_no);
    if (fields.size() != 5) {
      parse_error(line_no, "expected 5 fields, found " + std::to_string(fields.size()));
    }
    ManifestEntry e;
    e.path = fields[0];
    if (e.path.empty()) parse_error(line_no, "empty path");
    try {
      e.rule = parse_rule_id(fields[1]);
      e.polarity = parse_label(fields[2]);
      e.split = parse_split(fields[4]);
    } catch (const Error& err) {
      parse_error(line_no, err.what());
    }
    if (!fields[3].empty()) {
      double onset = 0.0;
      const auto* first = fields[3].data();
      const auto* last = first + fields[3].size();
      const auto res = std::from_chars(first, last, onset);
      if (res.ec != std::errc() || res.ptr != last || !std::isfinite(onset) || onset < 0.0) {
        parse_error(line_no, "bad onset_s '" + fields[3] + "'");
      }
      e.onset_s = onset;
    }
    manifest.entries.push_back(std::move(e));
  }
  if (!seen_header) parse_error(line_no == 0 ? 1 : line_no, "missing header");

  for (const auto& e : manifest.entries) {
    std::error_code ec;
    if (!std::filesystem::exists(manifest.resolve(e), ec)) manifest.dangling_paths.push_back(e.path);
  }
  return manifest;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::NotFound, path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str(), path.parent_path());
}

std::string format_manifest(const std::vector<ManifestEntry>& entries) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const auto& e : entries) {
    out += quote_if_needed(e.path);
    out += ',';
    out += to_string(e.rule);
    out += ',';
    out += label_name(e.polarity);
    out += ',';
    if (e.onset_s) out += format_double(*e.onset_s);
    out += ',';
    out += to_string(e.split);
    out += '\n';
  }
  return out;
}

void save_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path.string());
  const std::string text = format_manifest(entries);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::IoError, "write failed for " + path.string());
}

std::vector<ManifestEntry> split(std::vector<ManifestEntry> entries, double train_fraction,
                                 std::uint64_t seed) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0)) {
    fail(ErrorCode::InvalidArgument, "train fraction must lie in [0, 1]");
  }
  // Strata in order of first appearance.
  std::vector<std::pair<RuleId, Label>> order;
  std::map<std::pair<RuleId, int>, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const int pol = entries[i].polarity ? static_cast<int>(*entries[i].polarity) : -1;
    auto& members = strata[{entries[i].rule, pol}];
    if (members.empty()) order.emplace_back(entries[i].rule, entries[i].polarity);
    members.push_back(i);
  }

  std::mt19937_64 rng(seed);
  for (const auto& [rule, label] : order) {
    auto& members = strata[{rule, label ? static_cast<int>(*label) : -1}];
    if (members.size() < 2) {
      fail(ErrorCode::StratumTooSmall, std::string(to_string(rule)) + "/" +
                                           std::string(label_name(label)) + " has " +
                                           std::to_string(members.size()) + " entries");
    }
    std::shuffle(members.begin(), members.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(members.size())));
    for (std::size_t r = 0; r < members.size(); ++r) {
      entries[members[r]].split = r < n_train ? Split::Train : Split::Test;
    }
  }
  return entries;
}

}  // namespace tajweed
