/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <doctest.h>

#include <cstdint>
#include <vector>

#include "wasm/leb128.hpp"

using namespace wssp;

TEST_CASE("leb128 unsigned round-trip") {
  std::vector<uint32_t> values = {0, 1, 63, 64, 127, 128, 300, 624485, 0x7FFFFFFF, 0xFFFFFFFF};
  // xorshift-derived extras for coverage beyond the hand-picked values
  uint32_t x = 0x12345678;
  for (int i = 0; i < 500; i++) {
    x ^= x << 13;
    x ^= x >> 17;
    x ^= x << 5;
    values.push_back(x);
  }
  for (uint32_t v : values) {
    std::vector<uint8_t> buf;
    leb::write_u32(buf, v);
    CHECK(buf.size() == leb::size_u32(v));
    CHECK(buf.size() <= 5);
    size_t pos = 0;
    uint32_t out = 0;
    REQUIRE(leb::read_u32(buf.data(), buf.size(), pos, out));
    CHECK(out == v);
    CHECK(pos == buf.size());
  }
}

TEST_CASE("leb128 signed round-trip") {
  std::vector<int64_t> values = {0,  1,  -1, 63, -64, 64,  -65, 127, -128, 624485, -624485,
                                 INT32_MAX, INT32_MIN, INT64_MAX, INT64_MIN};
  for (int64_t v : values) {
    std::vector<uint8_t> buf;
    leb::write_s64(buf, v);
    size_t pos = 0;
    int64_t out = 0;
    REQUIRE(leb::read_s64(buf.data(), buf.size(), pos, out));
    CHECK(out == v);
    CHECK(pos == buf.size());
  }
}

TEST_CASE("leb128 accepts padded forms") {
  // 0 encoded with a redundant continuation byte
  std::vector<uint8_t> padded = {0x80, 0x00};
  size_t pos = 0;
  uint32_t out = 7;
  REQUIRE(leb::read_u32(padded.data(), padded.size(), pos, out));
  CHECK(out == 0);
  CHECK(pos == 2);

  // canonical writer never produces the padded form
  std::vector<uint8_t> buf;
  leb::write_u32(buf, 0);
  CHECK(buf == std::vector<uint8_t>{0x00});
}

TEST_CASE("leb128 rejects overlong and overflowing input") {
  std::vector<uint8_t> too_long = {0x80, 0x80, 0x80, 0x80, 0x80, 0x00};
  size_t pos = 0;
  uint32_t out = 0;
  CHECK_FALSE(leb::read_u32(too_long.data(), too_long.size(), pos, out));

  // 2^32 does not fit u32
  std::vector<uint8_t> overflow = {0x80, 0x80, 0x80, 0x80, 0x10};
  pos = 0;
  CHECK_FALSE(leb::read_u32(overflow.data(), overflow.size(), pos, out));

  // truncation
  std::vector<uint8_t> truncated = {0x80};
  pos = 0;
  CHECK_FALSE(leb::read_u32(truncated.data(), truncated.size(), pos, out));
}
