#pragma once

#include "gasnet/linearize.hpp"

#include <array>
#include <complex>

namespace gasnet {

using Complex = std::complex<double>;

// Distributed single-pipe model about a uniform operating point, for boundary
// transfer analysis. alpha/beta are the friction gradient coefficients.
struct PipeFrequencyParams {
    double length_m = 0;
    double diameter_m = 0;
    double friction = 0;
    double sigma = 0;       // m/s
    double rho_bar = 0;     // kg/m^3
    double phi_bar = 0;     // kg/m^2/s
    bool inertia = true;    // keep the flux time derivative
    bool with_gradient = true; // keep the friction density gradient term
    // Flips the sign of the friction damping inside the propagation constant.
    // The default places the damping so that boundary responses decay; the
    // flag reproduces the alternative convention for comparison.
    bool flipped_damping = false;

    double alpha() const; // friction * phi|phi| / (2 D rho^2)
    double beta() const;  // friction * |phi| / (D rho)
};

// 2x2 boundary transfer [rho_out; phi_in] = G(s) [rho_in; phi_out],
// row-major: g[0]=G11, g[1]=G12, g[2]=G21, g[3]=G22.
using Transfer2 = std::array<Complex, 4>;

Transfer2 transfer_matrix(const PipeFrequencyParams& p, Complex s);

struct FrequencyResponse {
    std::vector<double> f_cyc_hr; // log-spaced grid
    std::vector<std::array<double, 4>> mag;
    std::vector<std::array<double, 4>> phase; // radians, unwrapped along the grid
};

FrequencyResponse frequency_response(const PipeFrequencyParams& p, double fmin_cyc_hr,
                                     double fmax_cyc_hr, int n);

// Largest frequency (cyc/hr) below which the two pipe models agree in every
// transfer coefficient within the given magnitude (relative) and phase
// (radians) tolerances. Scans a log grid, then bisects the first crossing.
// Returns fmax if no violation, 0 if the models disagree at fmin already.
double max_equivalent_frequency(const PipeFrequencyParams& a, const PipeFrequencyParams& b,
                                double tol_mag_rel, double tol_phase_rad, double fmin_cyc_hr,
                                double fmax_cyc_hr, int grid = 160);

// Eigenvalues of a dense real matrix, sorted by (real, imag).
Eigen::VectorXcd eigenvalues(const MatrixXd& A);

// Mean of the eigenvalue real parts. The sum is also -trace(beta_bar), which
// callers can use as an independent check.
double center_of_gravity(const Eigen::VectorXcd& eigs);
double center_of_gravity(const LinearModel& model);

// Density-only state matrix -Lambda^-1 (RQ)' RQ from the inertia-free,
// gradient-free dynamics at unit ratios, with R^2 = sigma^2 chi (Ql rho) /
// (2 K ell |phi|) per edge. Requires nonzero nominal flux everywhere.
MatrixXd simplified_state_matrix(const Dynamics& dyn, const State& x_bar);

// Exact poles of the single-pipe boundary transfer with the gradient term
// dropped: zeta(m) = -beta/2 +- sqrt((beta/2)^2 - (pi sigma (2m+1) / (2 ell))^2)
// for m = 0..mmax, complex when the root is negative.
std::vector<Complex> pipe_poles(double beta, double sigma, double length_m, int mmax);

struct NetworkPoles {
    std::vector<std::vector<Complex>> per_edge; // pipe_poles of each edge
    VectorXd asymptote;                         // -beta/2 per edge
};

NetworkPoles network_poles(const Dynamics& dyn, const State& x_bar, int mmax);

} // namespace gasnet
