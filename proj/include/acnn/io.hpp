#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "acnn/dsp.hpp"
#include "acnn/matrix.hpp"

namespace acnn {

// Feature file ("ACNF"): magic, u32 version=1, u32 kind code, u32 d, u32 s,
// f64 frame_shift, then d*s little-endian f32 values row-major.
void write_feature_file(const std::string& path, const FeatureMatrix& m);
FeatureMatrix read_feature_file(const std::string& path);

// Named tensor blob ("ACNP"): magic, u32 version=1, u32 tensor count, then
// per tensor: u16 name length, UTF-8 name, u32 rows, u32 cols, f64 values
// row-major. Little-endian throughout.
struct NamedTensor {
  std::string name;
  Matrix value;
};
void write_tensor_file(const std::string& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_tensor_file(const std::string& path);

// Writes via a temp file in the same directory followed by a rename, so a
// crash never leaves a half-written artifact behind.
void atomic_write(const std::string& path, const std::string& content);

std::string read_text_file(const std::string& path);

// FNV-1a 64-bit; stable across platforms, used for config fingerprints.
uint64_t fnv1a64(std::string_view s);
std::string fingerprint_hex(std::string_view s);

}  // namespace acnn
