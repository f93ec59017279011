#pragma once

// Shared fixtures: seeded random pipeline graphs and small math utilities.

#include "gasnet/linearize.hpp"
#include "gasnet/network.hpp"
#include "gasnet/simulate.hpp"

#include <random>

namespace testutil {

using namespace gasnet;

// Connected random network: node 1 is the single supply, nodes 2..V hang off
// a random spanning tree oriented away from the root, plus `chords` extra
// edges that never point into the supply. Every withdrawal node ends up with
// at least one incoming edge, so the volume matrix is nonsingular.
inline NetworkSpec random_network(std::mt19937& rng, int edges, int chords = 0,
                                  int compressors = 0) {
    const int V = edges - chords + 1;
    NetworkSpec net;
    net.lim.sigma = 377.964;
    net.lim.rho_min = 20.0;
    net.lim.rho_max = 60.0;
    net.lim.phi_min = -1e9;

    for (int i = 1; i <= V; ++i) net.nodes.push_back({i, i == 1});

    std::uniform_real_distribution<double> len(5e3, 5e4), dia(0.4, 1.0), fric(0.008, 0.015);
    int id = 1;
    for (int i = 2; i <= V; ++i) {
        int parent = 1 + int(rng() % unsigned(i - 1));
        net.pipes.push_back({id++, parent, i, len(rng), dia(rng), fric(rng)});
    }
    while (id <= edges) {
        int u = 1 + int(rng() % unsigned(V));
        int v = 2 + int(rng() % unsigned(V - 1));
        if (u == v) continue;
        net.pipes.push_back({id++, u, v, len(rng), dia(rng), fric(rng)});
    }

    for (int c = 0; c < compressors; ++c) {
        int edge = 1 + int(rng() % unsigned(edges));
        bool dup = false;
        for (const auto& cs : net.compressors) dup |= cs.edge == edge;
        if (dup) continue;
        net.compressors.push_back({edge, 2.0, 1.0});
    }

    validate(net);
    return net;
}

// Boundary vectors in layout order: every supply at 40 kg/m^3, withdrawals
// drawing a random share of a fixed 150 kg/s total so the flux through the
// root pipe stays moderate at any network size.
inline void random_loads(std::mt19937& rng, const Layout& lay, VectorXd& s, VectorXd& w) {
    std::uniform_real_distribution<double> u(0.2, 1.0);
    s = VectorXd::Constant(lay.Vs(), 40.0);
    w = VectorXd(lay.Vw());
    for (int j = 0; j < lay.Vw(); ++j) w[j] = u(rng) * 150.0 / double(lay.Vw());
}

inline NetworkSpec single_pipe(double length_m, double diameter_m, double friction,
                               double sigma, double rho_min = 5.0, double rho_max = 80.0) {
    NetworkSpec net;
    net.nodes = {{1, true}, {2, false}};
    net.pipes = {{1, 1, 2, length_m, diameter_m, friction}};
    net.lim = {sigma, rho_min, rho_max, -1e9, std::numeric_limits<double>::infinity()};
    validate(net);
    return net;
}

// Backward-Euler step of the affine model: z+ = z + dt (A z+ + b).
inline State linear_step(const Dynamics& dyn, const LinearModel& m, const State& x, double dt,
                         const VectorXd& mu, const VectorXd& s, const VectorXd& w) {
    State zero{VectorXd::Zero(m.Vw), VectorXd::Zero(m.E)};
    VectorXd b = linear_rhs(dyn, m, zero, mu, s, w);
    MatrixXd W = MatrixXd::Identity(m.dim(), m.dim()) - dt * m.A;
    VectorXd zp = W.partialPivLu().solve(m.stack(x) + dt * b);
    return m.unstack(zp);
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

} // namespace testutil
