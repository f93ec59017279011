#pragma once

#include "gasnet/types.hpp"

namespace gasnet {

// Checks structural consistency and normalizes ordering (nodes by id, pipes
// by id, compressors by edge). Throws input_error naming the offending field.
void validate(NetworkSpec& net);

Layout layout(const NetworkSpec& net);

// Splits every pipe into ceil(length/lmax) equal segments. Inserted junction
// nodes are zero-withdrawal nodes labeled after all existing nodes; segment
// pipes are renumbered 1..E in source-pipe order; a compressor moves to the
// first segment of its source pipe. Applying refine again at the same lmax
// reproduces the network unchanged.
RefinedNetwork refine(const NetworkSpec& net, double lmax_m);

// Boundary values bound to a network layout.
class BoundarySampler {
public:
    BoundarySampler(const NetworkSpec& net, const BoundaryScenario& scn);

    // Supply densities / withdrawal offtakes at time t in [0, horizon].
    VectorXd supply(double t) const;
    VectorXd withdrawal(double t) const;
    double horizon() const { return scn_.horizon_s; }

private:
    BoundaryScenario scn_;
    std::vector<const Profile*> sup_;  // per supply node, required
    std::vector<const Profile*> wdr_;  // per withdrawal node, null -> 0
    void check_time(double t) const;
};

// Scenario from a network document's embedded profiles (horizon = latest
// breakpoint across profiles).
BoundaryScenario embedded_scenario(const NetworkSpec& net);

} // namespace gasnet
