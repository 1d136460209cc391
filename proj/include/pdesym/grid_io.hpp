#pragma once

// PDEGRID1 binary trajectory files:
//   "PDEGRID1" | uint32 LE header length | JSON header | nt*nx float64 LE, time-major
// Header: {"nt": int, "nx": int, "t": [..], "x0": real, "dx": real}

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pdesym/error.hpp"
#include "pdesym/solver.hpp"

namespace pdesym {

namespace detail {

inline constexpr char kGridMagic[8] = {'P', 'D', 'E', 'G', 'R', 'I', 'D', '1'};

template <class T>
void put_le(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.append(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get_le(const char* p) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, p, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace detail

inline std::string encode_grid(const SpaceTimeField& f) {
  nlohmann::json h;
  h["nt"] = f.nt();
  h["nx"] = f.grid.nx;
  h["t"] = f.times;
  h["x0"] = f.grid.x0;
  h["dx"] = f.grid.dx;
  std::string header = h.dump();
  std::string out(detail::kGridMagic, sizeof detail::kGridMagic);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  out.reserve(out.size() + 8 * f.values.size());
  for (double v : f.values) detail::put_le<double>(out, v);
  return out;
}

inline SpaceTimeField decode_grid(const std::string& bytes) {
  auto bad = [](const std::string& why) { return Error(ErrorKind::Io, "malformed PDEGRID1 data: " + why); };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), detail::kGridMagic, 8) != 0) throw bad("bad magic");
  std::uint32_t hlen = detail::get_le<std::uint32_t>(bytes.data() + 8);
  if (bytes.size() < 12 + static_cast<std::size_t>(hlen)) throw bad("truncated header");
  nlohmann::json h;
  try {
    h = nlohmann::json::parse(bytes.begin() + 12, bytes.begin() + 12 + hlen);
  } catch (const nlohmann::json::exception& e) {
    throw bad(e.what());
  }
  SpaceTimeField f;
  try {
    auto nt = h.at("nt").get<std::size_t>();
    f.grid.nx = h.at("nx").get<std::size_t>();
    f.grid.x0 = h.at("x0").get<double>();
    f.grid.dx = h.at("dx").get<double>();
    f.times = h.at("t").get<std::vector<double>>();
    if (f.times.size() != nt) throw bad("timestamp count differs from nt");
  } catch (const nlohmann::json::exception& e) {
    throw bad(e.what());
  }
  std::size_t n = f.times.size() * f.grid.nx;
  std::size_t off = 12 + hlen;
  if (bytes.size() != off + 8 * n) throw bad("payload size mismatch");
  f.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) f.values[i] = detail::get_le<double>(bytes.data() + off + 8 * i);
  return f;
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error(ErrorKind::Io, "write failed: " + path);
}

inline std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorKind::Io, "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(is), {});
}

inline void write_grid(const std::string& path, const SpaceTimeField& f) { write_file(path, encode_grid(f)); }
inline SpaceTimeField read_grid(const std::string& path) { return decode_grid(read_file(path)); }

}  // namespace pdesym
