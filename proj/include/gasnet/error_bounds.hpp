#pragma once

#include "gasnet/linearize.hpp"

namespace gasnet {

// Constants of the a-priori linearization error bounds.
struct BoundParams {
    double a = 0;          // 4 |alpha|inf |rho_bar|inf
    double b = 0;          // 2 |beta|inf |phi_bar|inf
    double state_norm = 0; // |(rho_bar; phi_bar)|inf
};

BoundParams bound_params(const LinearModel& model);

// Precomputed |e^{A tau}|inf samples on [0, horizon] with their running
// integral, refined until the integral is grid-converged to 1e-4 relative.
// uniform() bounds the relative state error against perturbations that stay
// within a fraction kappa of the nominal; time_varying() does the same for a
// sinusoidal perturbation profile of the given period. Both in percent.
class BoundCurve {
public:
    BoundCurve(const LinearModel& model, double horizon_s, int steps = 0);

    double propagator_norm(double t) const;
    double norm_integral(double t) const;
    double uniform(double kappa, double t) const;
    double time_varying(double kappa, double t, double period_s = 3600.0) const;
    double horizon() const { return T_; }
    const std::vector<double>& grid() const { return tau_; }
    const std::vector<double>& norms() const { return nrm_; }

private:
    double weight_check(double kappa) const;

    BoundParams p_;
    double T_ = 0;
    std::vector<double> tau_, nrm_, cum_;
};

// Largest pointwise relative gap between two trajectories on a shared grid,
// in percent: 2 max |a-b|inf / |a+b|inf.
struct EmpiricalGap {
    double rho_pct = 0, phi_pct = 0, mu_pct = 0;
};

EmpiricalGap empirical_gap(const Trajectory& a, const Trajectory& b);

} // namespace gasnet
