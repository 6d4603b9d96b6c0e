/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace wssp::leb {

// Writers always emit the canonical (minimal-length) encoding.

inline void write_u32(std::vector<uint8_t>& out, uint32_t value) {
  do {
    uint8_t byte = value & 0x7F;
    value >>= 7;
    if (value != 0) byte |= 0x80;
    out.push_back(byte);
  } while (value != 0);
}

inline void write_u64(std::vector<uint8_t>& out, uint64_t value) {
  do {
    uint8_t byte = value & 0x7F;
    value >>= 7;
    if (value != 0) byte |= 0x80;
    out.push_back(byte);
  } while (value != 0);
}

inline void write_s64(std::vector<uint8_t>& out, int64_t value) {
  bool more = true;
  while (more) {
    uint8_t byte = value & 0x7F;
    value >>= 7;  // arithmetic shift
    if ((value == 0 && !(byte & 0x40)) || (value == -1 && (byte & 0x40))) {
      more = false;
    } else {
      byte |= 0x80;
    }
    out.push_back(byte);
  }
}

inline void write_s32(std::vector<uint8_t>& out, int32_t value) {
  write_s64(out, static_cast<int64_t>(value));
}

inline size_t size_u32(uint32_t value) {
  size_t n = 1;
  while (value >= 0x80) {
    value >>= 7;
    n++;
  }
  return n;
}

// Decoders accept padded (non-minimal) encodings up to the spec's byte
// limits; they report success/failure through the return value and advance
// `pos` only on success.

inline bool read_u64(const uint8_t* data, size_t len, size_t& pos, uint64_t& value, int max_bytes = 10) {
  value = 0;
  unsigned shift = 0;
  for (int i = 0; i < max_bytes; i++) {
    if (pos >= len) return false;
    uint8_t byte = data[pos++];
    if (shift < 64) value |= static_cast<uint64_t>(byte & 0x7F) << shift;
    if (!(byte & 0x80)) {
      // reject set bits beyond the target width
      if (shift >= 64 && (byte & 0x7F) != 0) return false;
      return true;
    }
    shift += 7;
  }
  return false;
}

inline bool read_u32(const uint8_t* data, size_t len, size_t& pos, uint32_t& value) {
  uint64_t v = 0;
  size_t p = pos;
  unsigned shift = 0;
  for (int i = 0; i < 5; i++) {
    if (p >= len) return false;
    uint8_t byte = data[p++];
    v |= static_cast<uint64_t>(byte & 0x7F) << shift;
    shift += 7;
    if (!(byte & 0x80)) {
      if (v > UINT32_MAX) return false;
      value = static_cast<uint32_t>(v);
      pos = p;
      return true;
    }
  }
  return false;
}

inline bool read_s64(const uint8_t* data, size_t len, size_t& pos, int64_t& value, int max_bytes = 10) {
  value = 0;
  unsigned shift = 0;
  uint8_t byte = 0;
  for (int i = 0; i < max_bytes; i++) {
    if (pos >= len) return false;
    byte = data[pos++];
    if (shift < 64) value |= static_cast<int64_t>(static_cast<uint64_t>(byte & 0x7F) << shift);
    shift += 7;
    if (!(byte & 0x80)) {
      if (shift < 64 && (byte & 0x40)) value |= -(static_cast<int64_t>(1) << shift);
      return true;
    }
  }
  return false;
}

inline bool read_s32(const uint8_t* data, size_t len, size_t& pos, int32_t& value) {
  int64_t v = 0;
  size_t p = pos;
  if (!read_s64(data, len, p, v, 5)) return false;
  if (v < INT32_MIN || v > INT32_MAX) return false;
  value = static_cast<int32_t>(v);
  pos = p;
  return true;
}

}  // namespace wssp::leb
