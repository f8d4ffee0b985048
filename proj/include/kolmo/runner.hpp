#pragma once

#include "kolmo/config.hpp"

namespace kolmo {

inline constexpr const char* kVersion = "0.1.0";

/// Execute one configured run and write its CSV artifacts into the output
/// directory.  Returns the number of failed check rows (0 for non-verify
/// commands that complete).
int run(const RunConfig& config);

}  // namespace kolmo
