#include "core/io.hpp"

#include <zlib.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mdgait::io {
namespace {

namespace fs = std::filesystem;

constexpr char kRecordingMagic[4] = {'M', 'D', 'O', 'P'};
constexpr char kModelMagic[4] = {'M', 'D', 'P', 'C'};
constexpr std::uint16_t kRecordingVersion = 1;
constexpr std::uint16_t kModelVersion = 1;
constexpr std::uint8_t kNoLabel = 255;

// Explicit little-endian packing keeps the files byte-identical across hosts.
void put_u16(std::string& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xff));
  b.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& b, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& b, double v) { put_u64(b, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  Reader(const std::string& bytes, std::string origin)
      : bytes_(bytes), origin_(std::move(origin)) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }

  std::uint16_t u16() {
    const auto* p = take(2);
    return static_cast<std::uint16_t>(static_cast<std::uint8_t>(p[0]) |
                                      (static_cast<std::uint8_t>(p[1]) << 8));
  }

  std::uint32_t u32() {
    const auto* p = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(p[i])) << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    const auto* p = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(p[i])) << (8 * i);
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  void magic(const char expected[4], const char* what) {
    const auto* p = take(4);
    if (std::memcmp(p, expected, 4) != 0) {
      throw std::runtime_error(origin_ + ": not a " + what + " file (bad magic)");
    }
  }

  std::size_t position() const { return pos_; }

  void expect_end() const {
    if (pos_ != bytes_.size()) throw std::runtime_error(origin_ + ": trailing bytes");
  }

 private:
  const char* take(std::size_t n) {
    if (pos_ + n > bytes_.size()) throw std::runtime_error(origin_ + ": truncated file");
    const char* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  const std::string& bytes_;
  std::string origin_;
  std::size_t pos_ = 0;
};

std::uint32_t checksum(const std::string& bytes, std::size_t length) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(length));
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (!in && !in.eof()) throw std::runtime_error("read failed: " + path);
  return ss.str();
}

void save_recording(const IQRecording& rec, const std::string& path) {
  if (!(rec.sampling_frequency_hz > 0.0) || !(rec.carrier_frequency_hz > 0.0)) {
    throw std::invalid_argument("save_recording: missing acquisition parameters");
  }
  std::string bytes;
  bytes.reserve(4 + 2 + 8 + 8 + 8 + 2 + rec.samples.size() * 16);
  bytes.append(kRecordingMagic, 4);
  put_u16(bytes, kRecordingVersion);
  put_f64(bytes, rec.sampling_frequency_hz);
  put_f64(bytes, rec.carrier_frequency_hz);
  put_u64(bytes, rec.samples.size());
  bytes.push_back(static_cast<char>(rec.direction == Direction::Toward ? 0 : 1));
  bytes.push_back(static_cast<char>(
      rec.label.has_value() ? static_cast<std::uint8_t>(static_cast<int>(*rec.label)) : kNoLabel));
  for (const cplx& s : rec.samples) {
    put_f64(bytes, s.real());
    put_f64(bytes, s.imag());
  }
  write_file_atomic(path, bytes);
}

IQRecording load_recording(const std::string& path) {
  const std::string bytes = read_file(path);
  Reader r(bytes, path);
  r.magic(kRecordingMagic, "recording");
  const std::uint16_t version = r.u16();
  if (version != kRecordingVersion) {
    throw std::runtime_error(path + ": unsupported recording version " + std::to_string(version));
  }
  IQRecording rec;
  rec.sampling_frequency_hz = r.f64();
  rec.carrier_frequency_hz = r.f64();
  const std::uint64_t n = r.u64();
  const std::uint8_t dir = r.u8();
  if (dir > 1) throw std::runtime_error(path + ": bad direction byte");
  rec.direction = dir == 0 ? Direction::Toward : Direction::Away;
  const std::uint8_t label = r.u8();
  if (label != kNoLabel) {
    if (label >= kNumClasses) throw std::runtime_error(path + ": bad label byte");
    rec.label = static_cast<GaitClass>(label);
  }
  rec.samples.resize(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double re = r.f64();
    const double im = r.f64();
    rec.samples[i] = {re, im};
  }
  r.expect_end();
  return rec;
}

void save_manifest(const Manifest& manifest, const std::string& path) {
  std::string out = "file,subject_id,class,direction\n";
  for (const auto& e : manifest.entries) {
    if (e.file.find(',') != std::string::npos || e.subject_id.find(',') != std::string::npos) {
      throw std::invalid_argument("save_manifest: commas not allowed in fields");
    }
    out += e.file + "," + e.subject_id + "," + to_string(e.label) + "," + to_string(e.direction) +
           "\n";
  }
  write_file_atomic(path, out);
}

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  Manifest manifest;
  manifest.root = fs::path(path).parent_path().string();

  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty manifest");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "file,subject_id,class,direction") {
    throw std::runtime_error(path + ": unexpected manifest header '" + line + "'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": expected 4 fields");
    }
    ManifestEntry e;
    e.file = fields[0];
    e.subject_id = fields[1];
    e.label = gait_class_from_string(fields[2]);
    e.direction = direction_from_string(fields[3]);
    manifest.entries.push_back(std::move(e));
  }
  return manifest;
}

std::string resolve_recording_path(const Manifest& manifest, const ManifestEntry& entry) {
  const fs::path p(entry.file);
  if (p.is_absolute() || manifest.root.empty()) return entry.file;
  return (fs::path(manifest.root) / p).string();
}

void save_model(const StoredModel& stored, const std::string& path) {
  const auto& m = stored.model;
  if (m.dim == 0 || m.rank == 0 || m.mean.size() != m.dim ||
      m.basis.size() != m.dim * m.rank || m.eigenvalues.size() != m.rank) {
    throw std::invalid_argument("save_model: inconsistent model");
  }
  std::string bytes;
  bytes.reserve(64 + 8 * (m.mean.size() + m.basis.size() + m.eigenvalues.size()));
  bytes.append(kModelMagic, 4);
  put_u16(bytes, kModelVersion);
  bytes.push_back(static_cast<char>(static_cast<int>(stored.kind)));
  put_u64(bytes, m.dim);
  put_u64(bytes, m.n_train);
  put_u64(bytes, m.rank);
  bytes.push_back(1);  // centering flag: this implementation always centers
  for (double v : m.mean) put_f64(bytes, v);
  for (double v : m.basis) put_f64(bytes, v);
  for (double v : m.eigenvalues) put_f64(bytes, v);
  put_f64(bytes, m.total_variance);
  put_u32(bytes, checksum(bytes, bytes.size()));
  write_file_atomic(path, bytes);
}

StoredModel load_model(const std::string& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 4 + 2 + 1 + 24 + 1 + 8 + 4) {
    throw std::runtime_error(path + ": truncated model file");
  }
  Reader r(bytes, path);
  r.magic(kModelMagic, "model");
  const std::uint16_t version = r.u16();
  if (version != kModelVersion) {
    throw std::runtime_error(path + ": unsupported model version " + std::to_string(version));
  }
  const std::uint8_t kind = r.u8();
  if (kind >= kNumRepresentations) throw std::runtime_error(path + ": bad representation byte");

  StoredModel stored;
  stored.kind = static_cast<RepresentationKind>(kind);
  auto& m = stored.model;
  m.dim = r.u64();
  m.n_train = r.u64();
  m.rank = r.u64();
  const std::uint8_t centering = r.u8();
  if (centering != 1) throw std::runtime_error(path + ": unsupported centering flag");
  if (m.dim == 0 || m.rank == 0 || m.rank > m.dim) {
    throw std::runtime_error(path + ": implausible model dimensions");
  }

  m.mean.resize(m.dim);
  for (auto& v : m.mean) v = r.f64();
  m.basis.resize(m.dim * m.rank);
  for (auto& v : m.basis) v = r.f64();
  m.eigenvalues.resize(m.rank);
  for (auto& v : m.eigenvalues) v = r.f64();
  m.total_variance = r.f64();

  const std::size_t body = r.position();
  const std::uint32_t stored_crc = r.u32();
  r.expect_end();
  if (stored_crc != checksum(bytes, body)) {
    throw std::runtime_error(path + ": checksum mismatch (corrupt model file)");
  }
  return stored;
}

void save_matrix_csv(const std::string& path, const std::vector<double>& values,
                     std::size_t rows, std::size_t cols) {
  if (values.size() != rows * cols) throw std::invalid_argument("save_matrix_csv: size mismatch");
  std::string out;
  out.reserve(values.size() * 20);
  char buf[32];
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", values[r * cols + c]);
      out += buf;
      out += (c + 1 == cols) ? '\n' : ',';
    }
  }
  write_file_atomic(path, out);
}

}  // namespace mdgait::io
