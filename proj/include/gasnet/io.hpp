#pragma once

#include "gasnet/types.hpp"

#include <Eigen/Sparse>
#include <cstdint>
#include <iosfwd>

namespace gasnet {

NetworkSpec parse_network(const std::string& text);
std::string serialize_network(const NetworkSpec& net);
NetworkSpec load_network(const std::string& path);
void save_network(const NetworkSpec& net, const std::string& path);

BoundaryScenario parse_scenario(const std::string& text);
std::string serialize_scenario(const BoundaryScenario& scn);
BoundaryScenario load_scenario(const std::string& path);
void save_scenario(const BoundaryScenario& scn, const std::string& path);

// Trajectory CSV: "t,node:<id>.rho,...,edge:<id>.phi,...,comp:<id>.mu,..."
// one row per sample; comp:<id> names the compressor by the pipe it sits on.
std::string trajectory_csv(const NetworkSpec& net, const Trajectory& traj);
void write_trajectory_csv(const NetworkSpec& net, const Trajectory& traj, const std::string& path);
Trajectory read_trajectory_csv(const NetworkSpec& net, const std::string& path);

// Policy CSV: "t,comp:<id>.mu,..." rows at sample times.
void write_policy_csv(const NetworkSpec& net, const Policy& pol, const std::string& path);
Policy read_policy_csv(const NetworkSpec& net, const std::string& path);

// Coordinate-format text dump, one "row col value" line per entry.
void dump_matrix_coo(const Eigen::SparseMatrix<double, Eigen::RowMajor>& m, const std::string& path);
void dump_matrix_coo(const MatrixXd& m, const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

// Stable 64-bit content hash (FNV-1a) used in run summaries.
std::uint64_t content_hash(const std::string& text);

std::string format_double(double v); // shortest round-trip decimal

} // namespace gasnet
