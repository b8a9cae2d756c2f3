#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "naus/common.hpp"

namespace naus::binio {

// Little-endian scalar packing, independent of host byte order.

inline void put_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

inline void put_u64(std::ostream& out, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

inline void put_i32(std::ostream& out, int32_t v) { put_u32(out, static_cast<uint32_t>(v)); }

inline void put_f32(std::ostream& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

inline void put_f64(std::ostream& out, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

inline void put_str(std::ostream& out, const std::string& s) {
  put_u32(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

[[noreturn]] inline void truncated(const std::string& what) {
  raise(ErrorKind::CorruptFile, "truncated or corrupt file while reading " + what);
}

inline uint32_t get_u32(std::istream& in, const char* what = "u32") {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) truncated(what);
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline uint64_t get_u64(std::istream& in, const char* what = "u64") {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) truncated(what);
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

inline int32_t get_i32(std::istream& in, const char* what = "i32") {
  return static_cast<int32_t>(get_u32(in, what));
}

inline float get_f32(std::istream& in, const char* what = "f32") {
  uint32_t bits = get_u32(in, what);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

inline double get_f64(std::istream& in, const char* what = "f64") {
  uint64_t bits = get_u64(in, what);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

inline std::string get_str(std::istream& in, const char* what = "string") {
  uint32_t len = get_u32(in, what);
  std::string s(len, '\0');
  if (len && !in.read(s.data(), len)) truncated(what);
  return s;
}

inline void expect_magic(std::istream& in, const std::string& magic, const std::string& path) {
  std::string line;
  if (!std::getline(in, line)) truncated("magic line of " + path);
  if (line != magic)
    raise(ErrorKind::VersionMismatch, "expected magic '" + magic + "' in " + path);
}

}  // namespace naus::binio
