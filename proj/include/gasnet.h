#ifndef GASNET_H
#define GASNET_H

/* C interface to the pipeline simulation and control library. Every call
 * returns a status code; on failure gasnet_last_error() describes the
 * problem (thread-local, valid until the next failing call). */

#ifdef __cplusplus
extern "C" {
#endif

enum {
    GASNET_OK = 0,
    GASNET_ERR_SOLVER = 1, /* no convergence, or the problem is infeasible */
    GASNET_ERR_INPUT = 2   /* malformed document, bad value, precondition */
};

typedef struct gasnet_network gasnet_network;

const char* gasnet_last_error(void);

/* Caps internal linear-algebra parallelism; n <= 0 restores the default. */
void gasnet_set_threads(int n);

/* --- network handles ----------------------------------------------------- */

int gasnet_network_load(const char* path, gasnet_network** out);
int gasnet_network_bench(const char* name, gasnet_network** out);
int gasnet_network_refine(const gasnet_network* net, double lmax_m, gasnet_network** out);
void gasnet_network_free(gasnet_network* net);

/* state_dim = edges + withdrawal nodes; any out pointer may be NULL */
int gasnet_network_counts(const gasnet_network* net, int* nodes, int* supply_nodes,
                          int* pipes, int* compressors, int* state_dim);
int gasnet_network_save(const gasnet_network* net, const char* path);
/* writes the boundary scenario carried by the network's embedded profiles */
int gasnet_network_save_scenario(const gasnet_network* net, const char* path);

/* --- simulation ----------------------------------------------------------
 * scenario_path NULL or empty uses the network's embedded profiles.
 * mu NULL means every compressor ratio 1; otherwise mu_len must equal the
 * compressor count. Output paths NULL skip the file. */

typedef struct {
    double rho_min, rho_max; /* kg/m^3 over all samples */
    double phi_min, phi_max; /* kg/(m^2 s) */
    double line_pack_kg;     /* stored mass at the final sample */
} gasnet_state_summary;

int gasnet_steady(const gasnet_network* net, const char* scenario_path,
                  const double* mu, int mu_len, double t_s,
                  const char* out_csv, gasnet_state_summary* sum);

int gasnet_simulate(const gasnet_network* net, const char* scenario_path,
                    const char* policy_csv, double dt_s,
                    const char* out_csv, gasnet_state_summary* sum);

/* --- linear analysis ------------------------------------------------------
 * Each builds the model about the steady state at scenario time t_s. */

/* writes A.coo, nominal.csv, affine.csv, coefficients.csv into out_dir */
int gasnet_linearize(const gasnet_network* net, const char* scenario_path,
                     const double* mu, int mu_len, double t_s,
                     const char* out_dir, int* state_dim);

/* eigenvalue table (re,im rows); residual of the eigenvalue-sum identity */
int gasnet_spectrum(const gasnet_network* net, const char* scenario_path,
                    const double* mu, int mu_len, double t_s,
                    const char* out_csv, double* center_of_gravity,
                    double* trace_residual);

/* single-pipe boundary transfer magnitudes/phases on a log frequency grid,
 * all four inertia/friction-gradient variants side by side */
int gasnet_bode(double length_m, double diameter_m, double friction, double sigma,
                double rho_bar, double phi_bar, double fmin_cyc_hr, double fmax_cyc_hr,
                int samples, const char* out_csv);

/* linearization error bound curve; sinusoidal != 0 weights the perturbation
 * by |sin(2 pi t / period_s)|. crossing_s gets the first time the bound
 * reaches tol_pct percent, or -1 if it never does within the horizon. */
int gasnet_bound(const gasnet_network* net, const char* scenario_path,
                 const double* mu, int mu_len, double t_s,
                 double kappa, int sinusoidal, double period_s,
                 double horizon_s, double tol_pct,
                 const char* out_csv, double* crossing_s);

/* --- control --------------------------------------------------------------
 * Writes policy.csv, trajectory.csv, summary.csv into out_dir. */

typedef struct {
    int status; /* 0 optimal, 1 infeasible, 2 iteration limit */
    int steps;
    double objective;
    double wall_s; /* optimization only; initialization excluded */
    long long lp_iterations;
} gasnet_control_summary;

int gasnet_mpc(const gasnet_network* net, const char* scenario_path, double dt_s,
               int nonlinear, int fixed_model, const char* out_dir,
               gasnet_control_summary* sum);

int gasnet_oc(const gasnet_network* net, const char* scenario_path, double dt_s,
              int nonlinear, const char* out_dir, gasnet_control_summary* sum);

#ifdef __cplusplus
}
#endif

#endif /* GASNET_H */
