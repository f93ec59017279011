#pragma once

#include "gasnet/types.hpp"

#include <Eigen/Sparse>

namespace gasnet {

using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Incidence-derived matrix family for a refined network at fixed compressor
// ratios. Row k of Xi carries -mu_k at the tail node and +1 at the head node;
// M and N restrict Xi to withdrawal and supply columns. Q is the sign pattern
// of M, split into incoming (Ql) and outgoing (Q0) parts. L, K, X are per-edge
// diagonals (length, friction/2D, area) and Lambda is the diagonal nodal
// volume matrix Ql' X L Ql.
struct IncidenceSet {
    Layout lay;
    SpMat Xi; // E x V
    SpMat M;  // E x Vw
    SpMat N;  // E x Vs
    SpMat Q;  // sign(M)
    SpMat Ql; // positive part of Q
    SpMat Q0; // negative part of Q
    VectorXd ell;    // L diagonal, m
    VectorXd K;      // friction/(2 diameter), 1/m
    VectorXd chi;    // X diagonal, cross-section area m^2
    VectorXd Lambda; // Vw, m^3
    VectorXd mu_edge;          // per-edge ratio (1 off compressors)
    std::vector<int> comp_row; // compressor index -> edge row
};

// mu has one entry per compressor (net order); each must be >= 1.
IncidenceSet assemble(const RefinedNetwork& rn, const VectorXd& mu);

// Diagonal of Ql' X L Ql. The product is provably diagonal, with entry j the
// incoming volume sum over edges into node j; callers invert it entrywise.
VectorXd volume_matrix(const IncidenceSet& inc);

} // namespace gasnet
