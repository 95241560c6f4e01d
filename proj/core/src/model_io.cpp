#include "tajweed/model_io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include "tajweed/error.hpp"
#include "tajweed/hash.hpp"

namespace tajweed {

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f64s(std::span<const double> vs) {
    u64(vs.size());
    for (double v : vs) f64(v);
  }
  const std::string& bytes() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint32_t u32() {
    const auto p = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const auto p = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(p[i])) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::vector<double> f64s() {
    const std::uint64_t n = u64();
    if (n > remaining() / 8) fail(ErrorCode::SchemaError, "array length exceeds payload");
    std::vector<double> out(n);
    for (double& v : out) v = f64();
    return out;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

 private:
  std::string_view take(std::size_t n) {
    if (n > remaining()) fail(ErrorCode::SchemaError, "truncated model payload");
    const auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint64_t checksum(std::string_view bytes) {
  Fnv1a h;
  h.bytes({reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()});
  return h.value();
}

// Reads "key: value" and returns value.
std::string_view header_field(std::string_view& text, std::string_view key) {
  const auto nl = text.find('\n');
  if (nl == std::string_view::npos) fail(ErrorCode::SchemaError, "truncated header");
  std::string_view line = text.substr(0, nl);
  text.remove_prefix(nl + 1);
  const std::string prefix = std::string(key) + ": ";
  if (line.substr(0, prefix.size()) != prefix) {
    fail(ErrorCode::SchemaError, "expected header field '" + std::string(key) + "'");
  }
  return line.substr(prefix.size());
}

std::uint64_t parse_uint(std::string_view text, std::string_view what) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    fail(ErrorCode::SchemaError, "bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return v;
}

}  // namespace

std::string serialize_model(const RuleModel& model) {
  model.svm.validate();
  Writer w;
  const FeatureConfig& fc = model.features;
  w.u32(static_cast<std::uint32_t>(fc.frame_ms));
  w.u32(static_cast<std::uint32_t>(fc.hop_ms));
  w.u32(static_cast<std::uint32_t>(fc.num_filters));
  w.u32(static_cast<std::uint32_t>(fc.fft_size));
  w.u32(static_cast<std::uint32_t>(fc.sample_rate_hz));
  w.f64(fc.f_min_hz);
  w.f64(fc.f_max_hz);
  w.f64(fc.log_floor);
  w.u8(static_cast<std::uint8_t>(fc.aggregation));
  w.u64(model.feature_fingerprint);

  w.f64s(model.svm.scaler.mean);
  w.f64s(model.svm.scaler.stddev);
  w.u64(model.svm.support_vectors.rows());
  w.u64(model.svm.support_vectors.cols());
  w.f64s(model.svm.support_vectors.data());
  w.f64s(model.svm.dual_coefs);
  w.f64(model.svm.bias);
  w.f64(model.svm.C);
  w.f64(model.svm.kernel.gamma);

  w.f64(model.calibration.A);
  w.f64(model.calibration.B);
  w.f64(model.tau_right);
  w.f64(model.tau_wrong);
  w.u64(model.training.dataset_hash);
  w.u64(model.training.seed);

  std::string payload = w.bytes();
  Writer tail;
  tail.u64(checksum(payload));
  payload += tail.bytes();

  std::ostringstream out;
  out << kModelMagic << '\n'
      << "format_version: " << kModelFormatVersion << '\n'
      << "rule_id: " << to_string(model.rule) << '\n'
      << "payload_bytes: " << payload.size() << '\n'
      << '\n';
  return out.str() + payload;
}

RuleModel deserialize_model(std::string_view bytes) {
  std::string_view text = bytes;
  const auto nl = text.find('\n');
  if (nl == std::string_view::npos || text.substr(0, nl) != kModelMagic) {
    fail(ErrorCode::SchemaError, "missing model magic");
  }
  text.remove_prefix(nl + 1);
  const auto version = parse_uint(header_field(text, "format_version"), "format_version");
  if (version != static_cast<std::uint64_t>(kModelFormatVersion)) {
    fail(ErrorCode::VersionMismatch, "file has format_version " + std::to_string(version) +
                                         ", reader supports " +
                                         std::to_string(kModelFormatVersion));
  }
  RuleModel model;
  try {
    model.rule = parse_rule_id(header_field(text, "rule_id"));
  } catch (const Error& e) {
    fail(ErrorCode::SchemaError, e.what());
  }
  const auto payload_size = parse_uint(header_field(text, "payload_bytes"), "payload_bytes");
  if (text.empty() || text.front() != '\n') fail(ErrorCode::SchemaError, "missing header terminator");
  text.remove_prefix(1);
  if (text.size() != payload_size || payload_size < 8) {
    fail(ErrorCode::SchemaError, "payload is " + std::to_string(text.size()) + " bytes, header says " +
                                     std::to_string(payload_size));
  }
  const std::string_view body = text.substr(0, payload_size - 8);
  Reader tail(text.substr(payload_size - 8));
  if (tail.u64() != checksum(body)) fail(ErrorCode::SchemaError, "payload checksum mismatch");

  Reader r(body);
  FeatureConfig& fc = model.features;
  fc.frame_ms = static_cast<int>(r.u32());
  fc.hop_ms = static_cast<int>(r.u32());
  fc.num_filters = static_cast<int>(r.u32());
  fc.fft_size = static_cast<int>(r.u32());
  fc.sample_rate_hz = static_cast<int>(r.u32());
  fc.f_min_hz = r.f64();
  fc.f_max_hz = r.f64();
  fc.log_floor = r.f64();
  const std::uint8_t agg = r.u8();
  if (agg > static_cast<std::uint8_t>(Aggregation::Flatten)) {
    fail(ErrorCode::SchemaError, "unknown aggregation code");
  }
  fc.aggregation = static_cast<Aggregation>(agg);
  try {
    fc.validate();
  } catch (const Error& e) {
    fail(ErrorCode::SchemaError, e.what());
  }
  model.feature_fingerprint = r.u64();

  model.svm.scaler.mean = r.f64s();
  model.svm.scaler.stddev = r.f64s();
  const std::uint64_t rows = r.u64();
  const std::uint64_t cols = r.u64();
  auto sv = r.f64s();
  if (cols == 0 || rows > sv.size() || sv.size() != rows * cols) {
    fail(ErrorCode::SchemaError, "support vector array does not match its shape");
  }
  model.svm.support_vectors = Matrix(rows, cols, std::move(sv));
  model.svm.dual_coefs = r.f64s();
  model.svm.bias = r.f64();
  model.svm.C = r.f64();
  model.svm.kernel.gamma = r.f64();
  model.calibration.A = r.f64();
  model.calibration.B = r.f64();
  model.tau_right = r.f64();
  model.tau_wrong = r.f64();
  model.training.dataset_hash = r.u64();
  model.training.seed = r.u64();
  if (r.remaining() != 0) fail(ErrorCode::SchemaError, "trailing bytes in payload");

  model.svm.validate();
  if (!(model.tau_right >= 0.5 && model.tau_right < 1.0) ||
      !(model.tau_wrong >= 0.5 && model.tau_wrong < 1.0)) {
    fail(ErrorCode::SchemaError, "thresholds must lie in [0.5, 1)");
  }
  return model;
}

void save_model(const RuleModel& model, const std::filesystem::path& path) {
  const std::string bytes = serialize_model(model);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) fail(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(ErrorCode::IoError, "rename to " + path.string() + ": " + ec.message());
}

RuleModel load_model(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorCode::NotFound, path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str());
}

}  // namespace tajweed
