// Copyright 2026 The mrcp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Little-endian byte buffers with a trailing CRC32, shared by the checkpoint
// and dataset formats.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

namespace mrcp::io {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

std::uint32_t crc32(const std::uint8_t* data, std::size_t size);

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    buf_.insert(buf_.end(), b, b + n);
  }
  template <typename T>
  void put(T v) {
    bytes(&v, sizeof(T));
  }
  void string(std::string_view s) {
    put<std::uint32_t>(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::size_t size() const { return buf_.size(); }
  // Appends the CRC32 of the buffer and writes it to `path`.
  void finish(const std::string& path);

 private:
  std::vector<std::uint8_t> buf_;
};

// Reads a whole file and verifies magic, version and trailing CRC before any
// field is decoded. Every read is bounds-checked; errors throw FormatError.
class Reader {
 public:
  Reader(const std::string& path, std::string_view magic, std::uint32_t version);

  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof(T)), sizeof(T));
    return v;
  }
  const std::uint8_t* take(std::size_t n);
  std::string string();
  bool at_end() const { return pos_ == end_; }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return end_ - pos_; }

 private:
  std::string path_;
  std::vector<std::uint8_t> buf_;
  std::size_t pos_ = 0;
  std::size_t end_ = 0;  // excludes the CRC
};

}  // namespace mrcp::io
