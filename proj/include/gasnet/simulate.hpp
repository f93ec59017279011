#pragma once

#include "gasnet/incidence.hpp"
#include "gasnet/network.hpp"
#include "gasnet/types.hpp"

namespace gasnet {

// Lumped isothermal pipeline dynamics on a refined network.
//
//   rho_dot = Lambda^-1 (Q' X phi - w)
//   delta phi_dot = -sigma^2 L^-1 (M rho + N s) - K phi|phi| / (Ql rho)
//
// with delta = 1 by default; inertia = false drops the flux time derivative
// and treats the flux equation as algebraic.
class Dynamics {
public:
    explicit Dynamics(RefinedNetwork rn, bool inertia = true);

    const RefinedNetwork& refined() const { return rn_; }
    const NetworkSpec& net() const { return rn_.net; }
    const Layout& lay() const { return base_.lay; }
    const IncidenceSet& base() const { return base_; } // assembled at mu = 1
    bool inertia() const { return inertia_; }
    double sigma() const { return rn_.net.lim.sigma; }
    int nc() const { return int(rn_.net.compressors.size()); }

    IncidenceSet at(const VectorXd& mu) const { return assemble(rn_, mu); }

    // Time derivatives (delta = 1 form). Outlet densities must be positive.
    State rhs(const State& x, const VectorXd& mu, const VectorXd& s, const VectorXd& w) const;

    // Diagonals of the friction-term Jacobian at a point:
    //   alpha = K phi|phi| / (Ql rho)^2,  beta = 2 K |phi| / (Ql rho)
    void friction_jacobian(const IncidenceSet& inc, const State& x,
                           VectorXd& alpha, VectorXd& beta) const;

    // Damped Newton with analytic Jacobian; scaled residual <= 1e-10.
    // Initial iterate: uniform density at the mean supply value, least-norm
    // flux solving Q' X phi = w (or the caller's guess).
    State steady_state(const VectorXd& mu, const VectorXd& s, const VectorXd& w,
                       const State* guess = nullptr) const;

    // One backward-Euler step with right-endpoint inputs; scaled residual
    // <= 1e-9. With inertia off the flux rows become algebraic.
    State step_implicit(const State& x, double dt, const VectorXd& mu,
                        const VectorXd& s, const VectorXd& w) const;

    // Uniform grid over [0, horizon]; the initial state is the steady state
    // at t = 0 inputs under policy.at(0).
    Trajectory simulate(const BoundaryScenario& scn, const Policy& pol, double dt_s = 60.0) const;

private:
    RefinedNetwork rn_;
    IncidenceSet base_;
    bool inertia_;

    VectorXd outlet_density(const IncidenceSet& inc, const VectorXd& rho) const;
};

} // namespace gasnet
