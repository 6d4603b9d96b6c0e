/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wasm/module.hpp"

namespace wssp::wasm {

// Decodes a core 1.0 (+ mutable-globals) binary. Unknown custom sections are
// preserved verbatim; the "name" section is parsed. Throws MalformedModule.
WasmModule decode(std::span<const uint8_t> bytes);

}  // namespace wssp::wasm
