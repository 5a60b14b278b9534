#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace addthin::binary {

// Fixed little-endian encoding independent of host byte order.

inline void write_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
  out.write(bytes, 8);
}

inline void write_u32(std::ostream& out, std::uint32_t v) {
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xffU);
  out.write(bytes, 4);
}

inline void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }

inline void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline void read_exact(std::istream& in, char* dst, std::size_t n) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) throw std::runtime_error("unexpected end of binary stream");
}

inline std::uint64_t read_u64(std::istream& in) {
  unsigned char bytes[8];
  read_exact(in, reinterpret_cast<char*>(bytes), 8);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

inline std::uint32_t read_u32(std::istream& in) {
  unsigned char bytes[4];
  read_exact(in, reinterpret_cast<char*>(bytes), 4);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | bytes[i];
  return v;
}

inline double read_f64(std::istream& in) { return std::bit_cast<double>(read_u64(in)); }

inline std::string read_string(std::istream& in) {
  const std::uint32_t n = read_u32(in);
  if (n > (1U << 20)) throw std::runtime_error("binary string length out of range");
  std::string s(n, '\0');
  read_exact(in, s.data(), n);
  return s;
}

}  // namespace addthin::binary
