#pragma once

#include "gasnet/types.hpp"

#include <string>

namespace gasnet {

// Built-in study networks with embedded 24 h boundary profiles. Loads are
// smooth sinusoid sums (periods 6 h and up) sampled every 15 minutes, so the
// scenario survives a serialize/parse round trip bit for bit.

// Five nodes in a ring with a chord, three compressors, supply held at the
// density floor. Refining at 5 km yields a 95-state linear model.
NetworkSpec bench_cyclic5();

// Twenty-five nodes, one supply, five compressors, one short loop near the
// trunk. Refining at 10 km yields a 137-state linear model.
NetworkSpec bench_tree25();

// Lookup by name ("cyclic5" | "tree25"); throws input_error otherwise.
NetworkSpec bench_by_name(const std::string& name);

} // namespace gasnet
