#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "regiosim/errors.hpp"

namespace regiosim {

/// 64-bit FNV-1a over a byte string. Used for reproducibility manifests
/// (identity of outputs across reruns), not for anything adversarial.
inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string to_hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

inline std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  detail::require(in.good(), ErrorCode::IoError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string file_hash_hex(const std::string& path) {
  return to_hex(fnv1a64(read_file_bytes(path)));
}

}  // namespace regiosim
