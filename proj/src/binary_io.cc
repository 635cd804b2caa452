// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0

#include "binary_io.h"

#include <zlib.h>

#include <fstream>
#include <iterator>

#include "mrcp/errors.h"

namespace mrcp::io {

std::uint32_t crc32(const std::uint8_t* data, std::size_t size) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  while (size > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
    crc = ::crc32(crc, data, chunk);
    data += chunk;
    size -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void Writer::finish(const std::string& path) {
  put<std::uint32_t>(crc32(buf_.data(), buf_.size()));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
  if (!out) throw std::runtime_error("failed writing " + path);
  buf_.resize(buf_.size() - sizeof(std::uint32_t));
}

Reader::Reader(const std::string& path, std::string_view magic, std::uint32_t version) : path_(path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path + ": cannot open file");
  buf_.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  if (buf_.size() < magic.size() + 2 * sizeof(std::uint32_t)) {
    throw FormatError(path + ": file truncated (" + std::to_string(buf_.size()) + " bytes)");
  }
  if (std::memcmp(buf_.data(), magic.data(), magic.size()) != 0) {
    throw FormatError(path + ": bad magic, expected " + std::string(magic));
  }
  end_ = buf_.size() - sizeof(std::uint32_t);
  std::uint32_t stored;
  std::memcpy(&stored, buf_.data() + end_, sizeof(stored));
  if (stored != crc32(buf_.data(), end_)) throw FormatError(path + ": CRC32 mismatch (corrupt or truncated)");
  pos_ = magic.size();
  const auto v = get<std::uint32_t>();
  if (v != version) {
    throw FormatError(path + ": unsupported version " + std::to_string(v) + ", expected " +
                      std::to_string(version));
  }
}

const std::uint8_t* Reader::take(std::size_t n) {
  if (n > end_ - pos_) throw FormatError(path_ + ": unexpected end of data at byte " + std::to_string(pos_));
  const std::uint8_t* p = buf_.data() + pos_;
  pos_ += n;
  return p;
}

std::string Reader::string() {
  const auto n = get<std::uint32_t>();
  const auto* p = take(n);
  return std::string(reinterpret_cast<const char*>(p), n);
}

}  // namespace mrcp::io
