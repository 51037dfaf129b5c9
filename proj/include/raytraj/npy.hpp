#pragma once

// NPY v1.0 reader/writer for little-endian float32, C-order arrays.
//
// Layout: "\x93NUMPY", version (1, 0), u16 little-endian header length, ASCII
// dict padded with spaces and terminated by '\n' so that the whole preamble is
// a multiple of 64 bytes, then the raw payload.

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "raytraj/errors.hpp"
#include "raytraj/tensor.hpp"

namespace raytraj::npy {

inline constexpr char kMagic[] = "\x93NUMPY";
inline constexpr std::size_t kMagicSize = 6;
inline constexpr std::size_t kAlignment = 64;

/// Raised when the payload is shorter than the header promises.
class TruncatedPayloadError : public Error {
 public:
  TruncatedPayloadError(std::size_t expected, std::size_t actual)
      : Error(Errc::TruncatedPayload, "expected " + std::to_string(expected) + " payload bytes, got " +
                                          std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  [[nodiscard]] std::size_t expected() const noexcept { return expected_; }
  [[nodiscard]] std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

namespace detail {

inline std::string shape_literal(const Shape& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  if (shape.size() == 1) s += ',';
  s += ')';
  return s;
}

inline std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
  return v;
}

inline void skip_ws(std::string_view s, std::size_t& pos) {
  while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
}

// Locates the value following `'key':` in a Python dict literal.
inline std::size_t find_value(std::string_view header, std::string_view key) {
  const std::string quoted = "'" + std::string(key) + "'";
  std::size_t pos = header.find(quoted);
  if (pos == std::string_view::npos) {
    throw Error(Errc::BadHeader, "header is missing key " + quoted);
  }
  pos += quoted.size();
  skip_ws(header, pos);
  if (pos >= header.size() || header[pos] != ':') throw Error(Errc::BadHeader, "expected ':' after " + quoted);
  ++pos;
  skip_ws(header, pos);
  return pos;
}

struct Header {
  std::string descr;
  bool fortran_order = false;
  Shape shape;
};

inline Header parse_header(std::string_view header) {
  Header h;

  std::size_t pos = find_value(header, "descr");
  if (pos >= header.size() || (header[pos] != '\'' && header[pos] != '"')) {
    throw Error(Errc::BadHeader, "descr must be a string");
  }
  const char quote = header[pos];
  const std::size_t end = header.find(quote, pos + 1);
  if (end == std::string_view::npos) throw Error(Errc::BadHeader, "unterminated descr");
  h.descr = std::string(header.substr(pos + 1, end - pos - 1));

  pos = find_value(header, "fortran_order");
  if (header.substr(pos, 4) == "True") {
    h.fortran_order = true;
  } else if (header.substr(pos, 5) == "False") {
    h.fortran_order = false;
  } else {
    throw Error(Errc::BadHeader, "fortran_order must be True or False");
  }

  pos = find_value(header, "shape");
  if (pos >= header.size() || header[pos] != '(') throw Error(Errc::BadHeader, "shape must be a tuple");
  ++pos;
  for (;;) {
    skip_ws(header, pos);
    if (pos >= header.size()) throw Error(Errc::BadHeader, "unterminated shape tuple");
    if (header[pos] == ')') break;
    std::size_t value = 0;
    const std::size_t start = pos;
    while (pos < header.size() && std::isdigit(static_cast<unsigned char>(header[pos]))) {
      value = value * 10 + static_cast<std::size_t>(header[pos] - '0');
      ++pos;
    }
    if (pos == start) throw Error(Errc::BadHeader, "shape entries must be non-negative integers");
    // numpy writes "5L" for longs in some python 2 era files
    if (pos < header.size() && header[pos] == 'L') ++pos;
    h.shape.push_back(value);
    skip_ws(header, pos);
    if (pos < header.size() && header[pos] == ',') ++pos;
  }
  return h;
}

}  // namespace detail

/// Preamble (magic through trailing newline) for a float32 tensor of `shape`.
inline std::string preamble(const Shape& shape) {
  std::string dict = "{'descr': '<f4', 'fortran_order': False, 'shape': " + detail::shape_literal(shape) + ", }";
  const std::size_t fixed = kMagicSize + 2 + 2;
  std::size_t total = fixed + dict.size() + 1;
  total = (total + kAlignment - 1) / kAlignment * kAlignment;
  dict.append(total - fixed - dict.size() - 1, ' ');
  dict.push_back('\n');

  std::string out(kMagic, kMagicSize);
  out.push_back('\x01');
  out.push_back('\x00');
  const auto len = static_cast<std::uint16_t>(dict.size());
  out.push_back(static_cast<char>(len & 0xff));
  out.push_back(static_cast<char>(len >> 8));
  out += dict;
  return out;
}

inline void write_npy(const Tensor& t, std::ostream& out) {
  const std::string pre = preamble(t.shape());
  out.write(pre.data(), static_cast<std::streamsize>(pre.size()));
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(t.data().data()),
              static_cast<std::streamsize>(t.size() * sizeof(float)));
  } else {
    for (float f : t.data()) {
      const std::uint32_t le = detail::to_little(std::bit_cast<std::uint32_t>(f));
      out.write(reinterpret_cast<const char*>(&le), sizeof le);
    }
  }
  if (!out) throw Error(Errc::Io, "failed to write npy stream");
}

inline std::string encode(const Tensor& t) {
  std::ostringstream os(std::ios::binary);
  write_npy(t, os);
  return std::move(os).str();
}

inline Tensor read_npy(std::istream& in) {
  char magic[kMagicSize] = {};
  in.read(magic, kMagicSize);
  if (in.gcount() != static_cast<std::streamsize>(kMagicSize) || std::memcmp(magic, kMagic, kMagicSize) != 0) {
    throw Error(Errc::BadMagic, "not an NPY stream");
  }
  unsigned char version[2] = {};
  in.read(reinterpret_cast<char*>(version), 2);
  if (in.gcount() != 2) throw Error(Errc::BadHeader, "truncated version");

  std::size_t header_len = 0;
  if (version[0] == 1) {
    unsigned char b[2] = {};
    in.read(reinterpret_cast<char*>(b), 2);
    if (in.gcount() != 2) throw Error(Errc::BadHeader, "truncated header length");
    header_len = b[0] | (std::size_t{b[1]} << 8);
  } else if (version[0] == 2 || version[0] == 3) {
    unsigned char b[4] = {};
    in.read(reinterpret_cast<char*>(b), 4);
    if (in.gcount() != 4) throw Error(Errc::BadHeader, "truncated header length");
    header_len = b[0] | (std::size_t{b[1]} << 8) | (std::size_t{b[2]} << 16) | (std::size_t{b[3]} << 24);
  } else {
    throw Error(Errc::BadHeader, "unsupported NPY version " + std::to_string(version[0]));
  }

  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  if (in.gcount() != static_cast<std::streamsize>(header_len)) throw Error(Errc::BadHeader, "truncated header");

  const detail::Header h = detail::parse_header(header);
  if (h.descr != "<f4") throw Error(Errc::UnsupportedDtype, "dtype '" + h.descr + "' (only '<f4' is supported)");
  if (h.fortran_order) throw Error(Errc::UnsupportedOrder, "fortran_order arrays are not supported");

  Tensor t(h.shape);
  const std::size_t expected = t.size() * sizeof(float);
  in.read(reinterpret_cast<char*>(t.data().data()), static_cast<std::streamsize>(expected));
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got != expected) throw TruncatedPayloadError(expected, got);

  if constexpr (std::endian::native == std::endian::big) {
    for (float& f : t.data()) f = std::bit_cast<float>(detail::to_little(std::bit_cast<std::uint32_t>(f)));
  }
  return t;
}

inline Tensor decode(const std::string& bytes) {
  std::istringstream is(bytes, std::ios::binary);
  return read_npy(is);
}

inline void save(const Tensor& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot open " + path.string() + " for writing");
  write_npy(t, out);
  out.close();
  if (!out) throw Error(Errc::Io, "failed to write " + path.string());
}

inline Tensor load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  return read_npy(in);
}

}  // namespace raytraj::npy
