#include "acnn/io.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "acnn/errors.hpp"

namespace acnn {

namespace {

// All integers and floats in the binary formats are little-endian. The
// helpers below assemble bytes explicitly so the files are portable to
// big-endian hosts too.

void put_u16(std::string& out, uint16_t x) {
  out.push_back(static_cast<char>(x & 0xff));
  out.push_back(static_cast<char>((x >> 8) & 0xff));
}

void put_u32(std::string& out, uint32_t x) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t x) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float x) {
  uint32_t bits;
  std::memcpy(&bits, &x, 4);
  put_u32(out, bits);
}

void put_f64(std::string& out, double x) {
  uint64_t bits;
  std::memcpy(&bits, &x, 8);
  put_u64(out, bits);
}

struct Reader {
  const std::string& buf;
  size_t pos = 0;
  const std::string& path;

  void need(size_t n) const {
    if (pos + n > buf.size()) throw FormatError(path + ": truncated file");
  }
  uint16_t u16() {
    need(2);
    uint16_t x = static_cast<uint8_t>(buf[pos]) | (static_cast<uint8_t>(buf[pos + 1]) << 8);
    pos += 2;
    return x;
  }
  uint32_t u32() {
    need(4);
    uint32_t x = 0;
    for (int i = 0; i < 4; ++i) x |= static_cast<uint32_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
    pos += 4;
    return x;
  }
  uint64_t u64() {
    need(8);
    uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<uint64_t>(static_cast<uint8_t>(buf[pos + i])) << (8 * i);
    pos += 8;
    return x;
  }
  float f32() {
    uint32_t bits = u32();
    float x;
    std::memcpy(&x, &bits, 4);
    return x;
  }
  double f64() {
    uint64_t bits = u64();
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
  }
  std::string bytes(size_t n) {
    need(n);
    std::string s = buf.substr(pos, n);
    pos += n;
    return s;
  }
};

}  // namespace

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("rename failed: " + tmp.string() + " -> " + path + ": " + ec.message());
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_feature_file(const std::string& path, const FeatureMatrix& m) {
  std::string out;
  out.reserve(24 + m.data.size() * 4);
  out += "ACNF";
  put_u32(out, 1);
  put_u32(out, static_cast<uint32_t>(m.kind));
  put_u32(out, static_cast<uint32_t>(m.dim()));
  put_u32(out, static_cast<uint32_t>(m.frames()));
  put_f64(out, m.frame_shift);
  for (double x : m.data.v) put_f32(out, static_cast<float>(x));
  atomic_write(path, out);
}

FeatureMatrix read_feature_file(const std::string& path) {
  const std::string buf = read_text_file(path);
  Reader r{buf, 0, path};
  if (r.bytes(4) != "ACNF") throw FormatError(path + ": bad magic, expected ACNF");
  const uint32_t version = r.u32();
  if (version != 1) throw FormatError(path + ": unsupported version " + std::to_string(version));
  const uint32_t kind = r.u32();
  if (kind > 3) throw FormatError(path + ": unknown feature kind code " + std::to_string(kind));
  const uint32_t d = r.u32();
  const uint32_t s = r.u32();
  FeatureMatrix m;
  m.kind = static_cast<FeatureKind>(kind);
  m.frame_shift = r.f64();
  m.data.resize(static_cast<int>(d), static_cast<int>(s));
  for (auto& x : m.data.v) x = static_cast<double>(r.f32());
  return m;
}

void write_tensor_file(const std::string& path, const std::vector<NamedTensor>& tensors) {
  std::string out;
  out += "ACNP";
  put_u32(out, 1);
  put_u32(out, static_cast<uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    if (t.name.size() > 0xffff) throw IoError("tensor name too long: " + t.name);
    put_u16(out, static_cast<uint16_t>(t.name.size()));
    out += t.name;
    put_u32(out, static_cast<uint32_t>(t.value.rows));
    put_u32(out, static_cast<uint32_t>(t.value.cols));
    for (double x : t.value.v) put_f64(out, x);
  }
  atomic_write(path, out);
}

std::vector<NamedTensor> read_tensor_file(const std::string& path) {
  const std::string buf = read_text_file(path);
  Reader r{buf, 0, path};
  if (r.bytes(4) != "ACNP") throw FormatError(path + ": bad magic, expected ACNP");
  const uint32_t version = r.u32();
  if (version != 1) throw FormatError(path + ": unsupported version " + std::to_string(version));
  const uint32_t count = r.u32();
  std::vector<NamedTensor> tensors(count);
  for (auto& t : tensors) {
    const uint16_t name_len = r.u16();
    t.name = r.bytes(name_len);
    const uint32_t rows = r.u32();
    const uint32_t cols = r.u32();
    t.value.resize(static_cast<int>(rows), static_cast<int>(cols));
    for (auto& x : t.value.v) x = r.f64();
  }
  return tensors;
}

uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string fingerprint_hex(std::string_view s) {
  static const char* hex = "0123456789abcdef";
  uint64_t h = fnv1a64(s);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = hex[h & 0xf];
    h >>= 4;
  }
  return out;
}

}  // namespace acnn
