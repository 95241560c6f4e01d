#include "tajweed/review.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <nlohmann/json.hpp>

#include "tajweed/error.hpp"

namespace tajweed {

namespace {

using json = nlohmann::json;
constexpr std::string_view kSchemaName = "tajweed.review";

// RAII file descriptor holding a flock for its lifetime.
class LockedFile {
 public:
  LockedFile(const std::filesystem::path& path, int flags, int lock_op) {
    fd_ = ::open(path.c_str(), flags | O_CLOEXEC, 0644);
    if (fd_ < 0) fail(ErrorCode::IoError, path.string() + ": " + std::strerror(errno));
    while (::flock(fd_, lock_op) != 0) {
      if (errno != EINTR) {
        ::close(fd_);
        fail(ErrorCode::IoError, "flock " + path.string() + ": " + std::strerror(errno));
      }
    }
  }
  LockedFile(const LockedFile&) = delete;
  LockedFile& operator=(const LockedFile&) = delete;
  ~LockedFile() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }

  std::string read_all() const {
    std::string out;
    char buf[8192];
    ::lseek(fd_, 0, SEEK_SET);
    for (;;) {
      const ssize_t n = ::read(fd_, buf, sizeof buf);
      if (n < 0 && errno == EINTR) continue;
      if (n < 0) fail(ErrorCode::IoError, std::string("read: ") + std::strerror(errno));
      if (n == 0) break;
      out.append(buf, static_cast<std::size_t>(n));
    }
    return out;
  }

  void write_all(std::string_view data) const {
    while (!data.empty()) {
      const ssize_t n = ::write(fd_, data.data(), data.size());
      if (n < 0 && errno == EINTR) continue;
      if (n < 0) fail(ErrorCode::IoError, std::string("write: ") + std::strerror(errno));
      data.remove_prefix(static_cast<std::size_t>(n));
    }
    ::fsync(fd_);
  }

 private:
  int fd_ = -1;
};

std::string header_line() {
  return json{{"schema", kSchemaName}, {"version", ReviewQueue::kSchemaVersion}}.dump() + "\n";
}

json detection_to_json(const std::optional<Detection>& d) {
  if (!d) return nullptr;
  return json{{"offset_s", d->offset_s},
              {"polarity", to_string(d->polarity)},
              {"score", d->score},
              {"closeness_pct", d->closeness_pct}};
}

std::optional<Detection> detection_from_json(const json& j) {
  if (j.is_null()) return std::nullopt;
  Detection d;
  d.offset_s = j.at("offset_s").get<double>();
  const Label pol = parse_label(j.at("polarity").get<std::string>());
  if (!pol) fail(ErrorCode::ParseError, "verdict polarity must be Right or Wrong");
  d.polarity = *pol;
  d.score = j.at("score").get<double>();
  d.closeness_pct = j.at("closeness_pct").get<int>();
  return d;
}

}  // namespace

std::string_view to_string(ReviewStatus status) noexcept {
  switch (status) {
    case ReviewStatus::Pending: return "pending";
    case ReviewStatus::Approved: return "approved";
    case ReviewStatus::Corrected: return "corrected";
  }
  return "pending";
}

ReviewStatus parse_review_status(std::string_view text) {
  if (text == "pending") return ReviewStatus::Pending;
  if (text == "approved") return ReviewStatus::Approved;
  if (text == "corrected") return ReviewStatus::Corrected;
  fail(ErrorCode::ParseError, "unknown review status '" + std::string(text) + "'");
}

std::string format_verdict_file(const VerdictFile& v) {
  return json{{"audio", v.audio_path},
              {"rule_id", to_string(v.rule)},
              {"verdict", detection_to_json(v.verdict)}}
             .dump(2) +
         "\n";
}

VerdictFile parse_verdict_file(std::string_view text) {
  try {
    const json j = json::parse(text);
    VerdictFile v;
    v.audio_path = j.at("audio").get<std::string>();
    v.rule = parse_rule_id(j.at("rule_id").get<std::string>());
    v.verdict = detection_from_json(j.at("verdict"));
    return v;
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("verdict file: ") + e.what());
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ReviewQueue ReviewQueue::open(const std::filesystem::path& path) {
  {
    LockedFile f(path, O_RDWR | O_CREAT, LOCK_EX);
    if (f.read_all().empty()) f.write_all(header_line());
  }
  ReviewQueue q(path);
  q.reload();
  return q;
}

void ReviewQueue::reload() {
  LockedFile f(path_, O_RDONLY, LOCK_SH);
  parse_text(f.read_all());
}

void ReviewQueue::parse_text(const std::string& text) {
  records_.clear();
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      json h;
      try {
        h = json::parse(line);
      } catch (const json::exception&) {
        fail(ErrorCode::ParseError, "review queue line 1: bad header");
      }
      if (h.value("schema", "") != kSchemaName) {
        fail(ErrorCode::ParseError, "review queue line 1: not a review queue");
      }
      const int version = h.value("version", 0);
      if (version != kSchemaVersion) {
        fail(ErrorCode::VersionMismatch, "review queue version " + std::to_string(version) +
                                             ", reader supports " + std::to_string(kSchemaVersion));
      }
      continue;
    }
    apply_line(line, line_no);
  }
}

void ReviewQueue::apply_line(const std::string& line, std::size_t line_no) {
  try {
    const json j = json::parse(line);
    const std::string op = j.at("op").get<std::string>();
    const auto id = j.at("record_id").get<std::uint64_t>();
    const auto it = std::find_if(records_.begin(), records_.end(),
                                 [&](const ReviewRecord& r) { return r.record_id == id; });
    if (op == "append") {
      if (it != records_.end()) return;  // idempotent replay
      ReviewRecord r;
      r.record_id = id;
      r.audio_path = j.at("audio").get<std::string>();
      r.rule = parse_rule_id(j.at("rule_id").get<std::string>());
      r.verdict = detection_from_json(j.at("verdict"));
      r.created_at = j.at("created_at").get<std::string>();
      records_.push_back(std::move(r));
    } else if (op == "label") {
      if (it == records_.end()) return;
      it->status = parse_review_status(j.at("status").get<std::string>());
      it->corrected_label.reset();
      if (it->status == ReviewStatus::Corrected) {
        it->corrected_label = parse_label(j.at("label").get<std::string>());
      }
    } else {
      fail(ErrorCode::ParseError, "unknown op '" + op + "'");
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, "review queue line " + std::to_string(line_no) + ": " + e.what());
  }
}

std::uint64_t ReviewQueue::append(ReviewRecord record) {
  LockedFile f(path_, O_RDWR | O_APPEND, LOCK_EX);
  // Other writers may have appended since we last read.
  parse_text(f.read_all());

  if (record.record_id != 0) {
    const bool exists = std::any_of(records_.begin(), records_.end(), [&](const ReviewRecord& r) {
      return r.record_id == record.record_id;
    });
    if (exists) return record.record_id;
  } else {
    std::uint64_t next = 1;
    for (const auto& r : records_) next = std::max(next, r.record_id + 1);
    record.record_id = next;
  }
  if (record.created_at.empty()) record.created_at = utc_timestamp();

  const json line{{"op", "append"},
                  {"record_id", record.record_id},
                  {"audio", record.audio_path},
                  {"rule_id", to_string(record.rule)},
                  {"verdict", detection_to_json(record.verdict)},
                  {"created_at", record.created_at}};
  f.write_all(line.dump() + "\n");
  record.status = ReviewStatus::Pending;
  record.corrected_label.reset();
  records_.push_back(record);
  return record.record_id;
}

void ReviewQueue::label(std::uint64_t record_id, ReviewStatus status,
                        std::optional<Label> corrected_label, bool force) {
  if (status == ReviewStatus::Pending) {
    fail(ErrorCode::InvalidTransition, "records cannot be moved back to pending");
  }
  if (status == ReviewStatus::Corrected && !corrected_label) {
    fail(ErrorCode::InvalidTransition, "a corrected record needs a label");
  }
  LockedFile f(path_, O_RDWR | O_APPEND, LOCK_EX);
  parse_text(f.read_all());
  const ReviewRecord& current = get(record_id);
  if (current.status != ReviewStatus::Pending && !force) {
    fail(ErrorCode::InvalidTransition, "record " + std::to_string(record_id) + " is already " +
                                           std::string(to_string(current.status)) +
                                           "; pass force to relabel");
  }
  json line{{"op", "label"}, {"record_id", record_id}, {"status", to_string(status)}};
  if (status == ReviewStatus::Corrected) line["label"] = label_name(*corrected_label);
  const std::string text = line.dump() + "\n";
  f.write_all(text);
  apply_line(text.substr(0, text.size() - 1), 0);
}

std::vector<ReviewRecord> ReviewQueue::list(std::optional<ReviewStatus> filter) const {
  std::vector<ReviewRecord> out;
  for (const auto& r : records_) {
    if (!filter || r.status == *filter) out.push_back(r);
  }
  return out;
}

const ReviewRecord& ReviewQueue::get(std::uint64_t record_id) const {
  const auto it = std::find_if(records_.begin(), records_.end(),
                               [&](const ReviewRecord& r) { return r.record_id == record_id; });
  if (it == records_.end()) fail(ErrorCode::UnknownRecord, "no record " + std::to_string(record_id));
  return *it;
}

std::vector<ManifestEntry> ReviewQueue::export_labeled() const {
  std::vector<ManifestEntry> out;
  for (const auto& r : records_) {
    if (r.status == ReviewStatus::Pending) continue;
    ManifestEntry e;
    e.path = r.audio_path;
    e.rule = r.rule;
    if (r.status == ReviewStatus::Corrected) {
      e.polarity = *r.corrected_label;
    } else if (r.verdict) {
      e.polarity = r.verdict->polarity;
    }
    if (e.polarity && r.verdict) e.onset_s = r.verdict->offset_s;
    e.split = Split::Unassigned;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace tajweed
