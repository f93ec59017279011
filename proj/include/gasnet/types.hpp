#pragma once

#include <Eigen/Dense>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace gasnet {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Piecewise-linear time profile over breakpoints with strictly increasing
// times. Between breakpoints values interpolate linearly; outside the
// breakpoint span the nearest endpoint value extends constantly.
struct Profile {
    std::vector<double> t;
    std::vector<double> v;

    double sample(double at) const;
    bool operator==(const Profile&) const = default;
};

struct NodeSpec {
    int id = 0;
    bool is_supply = false;
    bool operator==(const NodeSpec&) const = default;
};

struct PipeSpec {
    int id = 0;
    int from = 0;
    int to = 0;
    double length_m = 0.0;
    double diameter_m = 0.0;
    double friction = 0.0; // Darcy-Weisbach factor, dimensionless

    double area() const { return 0.25 * 3.14159265358979323846 * diameter_m * diameter_m; }
    bool operator==(const PipeSpec&) const = default;
};

struct CompressorSpec {
    int edge = 0;          // pipe id; boost applies at the pipe inlet
    double max_ratio = 1.0;
    double efficiency = 1.0; // cost weight c_k
    bool operator==(const CompressorSpec&) const = default;
};

struct Limits {
    double sigma = 0.0;    // isothermal sound speed, m/s
    double rho_min = 0.0;  // kg/m^3
    double rho_max = 0.0;
    double phi_min = 0.0;  // kg/(m^2 s)
    double phi_max = std::numeric_limits<double>::infinity();
    bool operator==(const Limits&) const = default;
};

struct NetworkSpec {
    std::vector<NodeSpec> nodes;            // sorted by id
    std::vector<PipeSpec> pipes;            // sorted by id
    std::vector<CompressorSpec> compressors; // sorted by edge id
    Limits lim;
    std::map<int, Profile> profiles;        // optional embedded boundary data

    bool operator==(const NetworkSpec&) const = default;
};

// Node and edge orderings shared by every matrix and state vector:
// supply nodes first (ascending id), then withdrawal nodes (ascending id),
// edges ascending by pipe id.
struct Layout {
    std::vector<int> supply_ids;
    std::vector<int> withdrawal_ids;
    std::vector<int> edge_ids;
    std::map<int, int> node_col;  // node id -> 0..V-1
    std::map<int, int> edge_row;  // pipe id -> 0..E-1

    int V() const { return int(supply_ids.size() + withdrawal_ids.size()); }
    int Vs() const { return int(supply_ids.size()); }
    int Vw() const { return int(withdrawal_ids.size()); }
    int E() const { return int(edge_ids.size()); }
};

struct RefinedNetwork {
    NetworkSpec net;
    std::map<int, int> parent_edge; // refined pipe id -> source pipe id
    double lmax_m = 0.0;
};

// Boundary conditions over [0, horizon_s]: supply profiles carry density
// (kg/m^3), withdrawal profiles carry mass offtake (kg/s, default zero).
struct BoundaryScenario {
    double horizon_s = 0.0;
    std::map<int, Profile> profiles;

    bool operator==(const BoundaryScenario&) const = default;
};

// Densities at withdrawal nodes and fluxes on edges, in layout order.
struct State {
    VectorXd rho;
    VectorXd phi;
};

// Piecewise-constant compressor ratios: mu(t) = mu[k] on (t[k-1], t[k]],
// extended constantly on both sides.
struct Policy {
    std::vector<double> t;
    std::vector<VectorXd> mu;

    VectorXd at(double time) const;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<State> x;
    std::vector<VectorXd> mu; // ratios in effect at each sample
};

} // namespace gasnet
