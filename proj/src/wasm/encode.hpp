/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <vector>

#include "wasm/module.hpp"

namespace wssp::wasm {

// Deterministic binary emission: canonical LEB128s, spec section order,
// preserved custom sections, regenerated name section. Throws EncodeError.
std::vector<uint8_t> encode(const WasmModule& m);

}  // namespace wssp::wasm
