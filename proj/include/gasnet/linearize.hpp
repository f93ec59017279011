#pragma once

#include "gasnet/simulate.hpp"

namespace gasnet {

struct NominalPoint {
    State x;
    VectorXd mu; // per compressor
    VectorXd s;  // per supply node
    VectorXd w;  // per withdrawal node
};

// First-order model about a nominal point of the inertial dynamics:
//
//   d/dt [rho; phi] = A [rho; phi] - [Lambda^-1 w ; sigma^2 L^-1 (N(mu) s_bar
//                     + M(mu) rho_bar + N_bar s)] + F
//
// where matrices at the argument ratios multiply nominal boundary data and
// the nominal N_bar multiplies the argument supply. At the nominal arguments
// this reproduces the nonlinear right side exactly.
struct LinearModel {
    NominalPoint nom;
    VectorXd alpha; // K phi|phi| / (Ql rho)^2 at the nominal, per edge
    VectorXd beta;  // 2 K |phi| / (Ql rho) at the nominal, per edge
    MatrixXd A;     // (Vw+E) x (Vw+E)
    VectorXd F;     // affine remainder
    IncidenceSet inc;  // assembled at nominal ratios (M_bar, N_bar)
    VectorXd flux_bar; // nonlinear flux rate at the nominal
    int Vw = 0, E = 0;

    int dim() const { return Vw + E; }
    VectorXd stack(const State& x) const;
    State unstack(const VectorXd& z) const;
};

LinearModel build_model(const Dynamics& dyn, const NominalPoint& nom);

VectorXd linear_rhs(const Dynamics& dyn, const LinearModel& model, const State& x,
                    const VectorXd& mu, const VectorXd& s, const VectorXd& w);

// build_model about fresh operating data (the relinearization step between
// control segments).
LinearModel relinearize(const Dynamics& dyn, const State& x, const VectorXd& mu,
                        const VectorXd& s, const VectorXd& w);

} // namespace gasnet
