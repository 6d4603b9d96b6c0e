/**
 * Copyright 2026 The wssp Authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include "corpus/corpus.hpp"
#include "harness/harness.hpp"

namespace wssp::corpus {

// Builds the {none, legacy, hardened} flavors of every guest and runs each
// (flavor, random mode) cell from the guest's expected table.
harness::EvalReport evaluate_corpus(const std::vector<Guest>& guests, unsigned jobs = 1,
                                    uint64_t fuel = 0);

}  // namespace wssp::corpus
