#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "screening/error.hpp"

namespace screening::binio {

inline void put_u64(std::ostream& out, std::uint64_t v) {
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes, 8);
}

inline std::uint64_t get_u64(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw IoError("truncated model file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

inline void put_f64(std::ostream& out, double d) {
  std::uint64_t v;
  std::memcpy(&v, &d, sizeof v);
  put_u64(out, v);
}

inline double get_f64(std::istream& in) {
  const std::uint64_t v = get_u64(in);
  double d;
  std::memcpy(&d, &v, sizeof d);
  return d;
}

inline void put_f64s(std::ostream& out, const std::vector<double>& xs) {
  put_u64(out, xs.size());
  for (double x : xs) put_f64(out, x);
}

inline std::vector<double> get_f64s(std::istream& in, std::uint64_t expected) {
  const auto n = get_u64(in);
  if (n != expected) throw IoError("model file: unexpected array length " + std::to_string(n));
  std::vector<double> xs(n);
  for (auto& x : xs) x = get_f64(in);
  return xs;
}

}  // namespace screening::binio
