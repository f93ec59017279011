#pragma once

#include "gasnet/linearize.hpp"
#include "gasnet/lp.hpp"

namespace gasnet {

struct ControlOptions {
    double dt = 3600.0;
    bool nonlinear = false;      // iterate each LP against nonlinear restepping
    bool relinearize = true;     // refresh the model between segments (linear mode)
    bool mass_flow_cost = false; // weight compression cost by volumetric flux (chi phi)
    double power_exponent = 0.2359; // (gamma - 1)/gamma of the gas
    int max_outer = 100;
    double outer_tol = 1e-6;
    LpOptions lp;
};

enum class RunStatus { optimal, infeasible, iteration_limit };

struct OptimizationResult {
    std::vector<double> t;    // t_0 = 0 .. t_M
    std::vector<State> x;     // predicted states on the grid
    std::vector<VectorXd> mu; // mu[0] is the initial steady-state choice
    std::vector<double> stage;
    double objective = 0;
    RunStatus status = RunStatus::optimal;
    std::string message;
    double wall_s = 0; // optimization time; initialization excluded
    long lp_iterations = 0;

    Policy policy() const;
    Trajectory trajectory() const;
};

// Compression cost sum over compressors of phi_k (mu_k^e - 1) / efficiency.
double stage_cost(const Dynamics& dyn, const State& x, const VectorXd& mu,
                  const ControlOptions& opt);

// The same cost expanded to first order about (phi_bar, mu_bar).
double linearized_stage_cost(const Dynamics& dyn, const VectorXd& phi_bar,
                             const VectorXd& mu_bar, const State& x, const VectorXd& mu,
                             const ControlOptions& opt);

// Cheapest steady operating point within the box constraints under fixed
// boundary data; the anchor from which the receding and open-loop solvers
// start.
std::pair<VectorXd, State> steady_optimal(const Dynamics& dyn, const VectorXd& s,
                                          const VectorXd& w, const ControlOptions& opt);

// Receding-horizon control: one single-step LP per segment.
OptimizationResult run_mpc(const Dynamics& dyn, const BoundaryScenario& scn,
                           const ControlOptions& opt);

// Open-loop optimal control over the whole horizon in one program.
OptimizationResult run_oc(const Dynamics& dyn, const BoundaryScenario& scn,
                          const ControlOptions& opt);

// Re-simulates a policy with the nonlinear stepper; returns the worst
// constraint violation as a fraction of the density box width (flux bounds
// are scaled by the running flux magnitude).
double feasibility_gap(const Dynamics& dyn, const BoundaryScenario& scn, const Policy& pol,
                       double dt_s);

} // namespace gasnet
